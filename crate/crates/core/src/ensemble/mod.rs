//! Eigenvalues of `PQP` for independent Haar projections `P ∈ G(N,k)`,
//! `Q ∈ G(N,l)`, optionally tilted by `exp(-N Tr ψ(PQP))`.
//!
//! Apart from `n₀` structural zeros and `n₁` structural ones, the `n`
//! remaining eigenvalues have joint density proportional to
//! `∏ x_i^{|k-l|} (1-x_i)^{|k+l-N|} e^{-Nψ(x_i)} ∏_{i<j} (x_i - x_j)²`.

pub mod mcmc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::grassmann::{pqp_spectrum, sample_haar_projection_rng};
use crate::measure::quadrature::gauss_legendre;
use crate::report::ext_real;
use crate::stats::mean_and_se;

pub use mcmc::{mcmc_tilted_spectrum, run_chain, ChainDiagnostics, ChainOptions, ChainResult};

/// Ensemble parameters `(N, k, l)` and tilt `ψ` (absent for the Haar model).
#[derive(Clone)]
pub struct EnsembleSpec {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    psi: Option<Arc<dyn ScalarFunction>>,
    label: String,
}

impl std::fmt::Debug for EnsembleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EnsembleSpec(N={}, k={}, l={}, psi={})", self.n, self.k, self.l, self.label)
    }
}

/// `(n₀, n₁, n)` for `(N, k, l)`.
pub fn structural_multiplicities(n: usize, k: usize, l: usize) -> (usize, usize, usize) {
    let n0 = n - k.min(l);
    let n1 = (k + l).saturating_sub(n);
    (n0, n1, n - n0 - n1)
}

impl EnsembleSpec {
    pub fn new(n: usize, k: usize, l: usize) -> Result<Self> {
        if n < 2 || k == 0 || l == 0 || k >= n || l >= n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k, l <= N-1, got N={n}, k={k}, l={l}"
            )));
        }
        Ok(Self {
            n,
            k,
            l,
            psi: None,
            label: "0".into(),
        })
    }

    pub fn with_tilt(mut self, psi: Arc<dyn ScalarFunction>, label: &str) -> Self {
        self.psi = Some(psi);
        self.label = label.to_string();
        self
    }

    pub fn is_untilted(&self) -> bool {
        self.psi.is_none()
    }

    pub fn tilt_label(&self) -> &str {
        &self.label
    }

    pub fn multiplicities(&self) -> (usize, usize, usize) {
        structural_multiplicities(self.n, self.k, self.l)
    }

    /// `(|k-l|, |k+l-N|)`.
    pub fn exponents(&self) -> (f64, f64) {
        (
            (self.k as f64 - self.l as f64).abs(),
            (self.k as f64 + self.l as f64 - self.n as f64).abs(),
        )
    }

    pub fn psi_value(&self, x: f64) -> f64 {
        self.psi.as_ref().map_or(0.0, |p| p.value(x))
    }

    pub fn psi_d1(&self, x: f64) -> f64 {
        self.psi.as_ref().map_or(0.0, |p| p.d1(x))
    }
}

/// Nontrivial eigenvalues of one draw.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSample {
    pub xs: Vec<f64>,
    pub n0: usize,
    pub n1: usize,
}

/// Unnormalized log joint density; `-∞` at coincident points or outside `[0,1]`.
pub fn log_density(xs: &[f64], spec: &EnsembleSpec) -> f64 {
    log_density_scaled(xs, spec, 1.0)
}

fn log_density_scaled(xs: &[f64], spec: &EnsembleSpec, tilt_scale: f64) -> f64 {
    let (a, b) = spec.exponents();
    let mut s = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        if a > 0.0 {
            s += a * x.ln();
        }
        if b > 0.0 {
            s += b * (1.0 - x).ln();
        }
        if tilt_scale != 0.0 {
            s -= tilt_scale * spec.n as f64 * spec.psi_value(x);
        }
        for &y in &xs[i + 1..] {
            s += 2.0 * (x - y).abs().ln();
        }
    }
    s
}

/// Tolerance used to recognise structural eigenvalues.
pub fn structural_tolerance(n: usize) -> f64 {
    1e-8f64.max(10.0 * n as f64 * f64::EPSILON)
}

/// Draws `P`, `Q`, diagonalizes `PQP` and strips the structural eigenvalues.
pub fn sample_uniform_pair_spectrum_rng(spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> Result<SpectrumSample> {
    if !spec.is_untilted() {
        return Err(Error::InvalidArgument("direct sampling needs the untilted ensemble".into()));
    }
    let p = sample_haar_projection_rng(spec.n, spec.k, rng)?;
    let q = sample_haar_projection_rng(spec.n, spec.l, rng)?;
    let mut eig = pqp_spectrum(p.matrix(), q.matrix())?;
    eig.sort_by(f64::total_cmp);
    let (n0, n1, n) = spec.multiplicities();
    let tol = structural_tolerance(spec.n);
    let zeros_ok = n0 == 0 || eig[n0 - 1] < tol;
    let ones_ok = n1 == 0 || eig[spec.n - n1] > 1.0 - tol;
    if !zeros_ok || !ones_ok {
        return Err(Error::Numerical(format!(
            "structural eigenvalues of PQP do not match (n0={n0}, n1={n1}) within {tol:e}"
        )));
    }
    Ok(SpectrumSample {
        xs: eig[n0..n0 + n].to_vec(),
        n0,
        n1,
    })
}

pub fn sample_uniform_pair_spectrum(spec: &EnsembleSpec, seed: u64) -> Result<SpectrumSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_pair_spectrum_rng(spec, &mut rng)
}

/// Independent draws in parallel; trial `t` uses stream `t` of the seed.
pub fn sample_uniform_spectra(spec: &EnsembleSpec, trials: usize, seed: u64) -> Result<Vec<SpectrumSample>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            sample_uniform_pair_spectrum_rng(spec, &mut rng)
        })
        .collect()
}

/// `log ∫_{[0,1]^n} ∏ x^a (1-x)^b ∏_{i<j}|x_i-x_j|²` by Selberg's formula.
pub fn log_selberg(n: usize, a: f64, b: f64) -> f64 {
    (0..n)
        .map(|j| {
            let j = j as f64;
            ln_gamma(a + 1.0 + j) + ln_gamma(b + 1.0 + j) + ln_gamma(j + 2.0)
                - ln_gamma(a + b + 2.0 + (n as f64 - 1.0) + j)
        })
        .sum()
}

/// Tensor Gauss–Legendre rule on `[0,1]^n` for `n ≤ 3`.
struct TensorRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TensorRule {
    fn new() -> Self {
        let (x, w) = gauss_legendre(24);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for panel in 0..2 {
            let a = 0.5 * panel as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.25 * (xi + 1.0));
                weights.push(0.25 * wi);
            }
        }
        Self { nodes, weights }
    }

    /// `log ∫ e^{L(x)}` and `∫ g e^{L} / ∫ e^{L}` for each observable.
    fn integrate(&self, dim: usize, log_f: impl Fn(&[f64]) -> f64 + Sync, obs: &[&(dyn Fn(&[f64]) -> f64 + Sync)]) -> (f64, Vec<f64>) {
        let m = self.nodes.len();
        let total = m.pow(dim as u32);
        let points: Vec<(f64, Vec<f64>)> = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut x = vec![0.0; dim];
                let mut lw = 0.0;
                for xi in x.iter_mut() {
                    let j = idx % m;
                    idx /= m;
                    *xi = self.nodes[j];
                    lw += self.weights[j].ln();
                }
                let lf = log_f(&x) + lw;
                (lf, obs.iter().map(|g| g(&x)).collect())
            })
            .collect();
        let max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut acc = vec![0.0; obs.len()];
        for (lf, vals) in &points {
            let w = (lf - max).exp();
            z += w;
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += w * v;
            }
        }
        (max + z.ln(), acc.iter().map(|a| a / z).collect())
    }
}

/// Largest `n` handled by tensor quadrature.
pub const QUADRATURE_MAX_DIM: usize = 3;

/// `log Z̃` of the tilted gas and `E[∑ψ]`, `E[∑ψ'² x(1-x)]` by quadrature (`n ≤ 3`).
pub fn quadrature_moments(spec: &EnsembleSpec) -> Result<(f64, f64, f64)> {
    let (_, _, n) = spec.multiplicities();
    if n > QUADRATURE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "quadrature normalization needs n <= {QUADRATURE_MAX_DIM}, got n = {n}"
        )));
    }
    let rule = TensorRule::new();
    let tilt = |x: &[f64]| x.iter().map(|&v| spec.psi_value(v)).sum::<f64>();
    let dirichlet = |x: &[f64]| {
        x.iter()
            .map(|&v| {
                let d = spec.psi_d1(v);
                d * d * v * (1.0 - v)
            })
            .sum::<f64>()
    };
    let (log_z, means) = rule.integrate(n, |x| log_density(x, spec), &[&tilt, &dirichlet]);
    Ok((log_z, means[0], means[1]))
}

#[derive(Debug, Clone, Serialize)]
pub struct LsiMatrixReport {
    #[serde(rename = "N")]
    pub n_total: usize,
    pub k: usize,
    pub l: usize,
    pub n0: usize,
    pub n1: usize,
    pub n: usize,
    pub psi: String,
    pub log_z0: f64,
    pub log_z_psi: f64,
    pub log_z_method: String,
    pub log_z_psi_se: f64,
    /// `S(λ^ψ, λ⁰) = log Z̃⁰ - log Z̃^ψ - N E[∑ψ]`.
    pub relative_entropy: f64,
    pub relative_entropy_se: f64,
    /// `4N² E[∑ ψ'(x_i)² x_i(1-x_i)]`.
    pub dirichlet: f64,
    pub dirichlet_se: f64,
    /// `Dirichlet / 2N`.
    pub bound: f64,
    #[serde(serialize_with = "ext_real")]
    pub margin: f64,
    pub margin_se: f64,
    /// `margin >= -3 SE`.
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_relative_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_dirichlet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainDiagnostics>,
}

/// Both sides of the matrix log-Sobolev inequality
/// `S(λ^ψ, λ⁰) ≤ (1/2N) ∫ ‖∇ log dλ^ψ/dλ⁰‖²`.
pub fn lsi_matrix_report(spec: &EnsembleSpec, opts: &ChainOptions) -> Result<LsiMatrixReport> {
    let (n0, n1, n) = spec.multiplicities();
    let big_n = spec.n as f64;
    let (a, b) = spec.exponents();
    let log_z0 = log_selberg(n, a, b);
    let mut report = LsiMatrixReport {
        n_total: spec.n,
        k: spec.k,
        l: spec.l,
        n0,
        n1,
        n,
        psi: spec.tilt_label().to_string(),
        log_z0,
        log_z_psi: log_z0,
        log_z_method: "selberg".into(),
        log_z_psi_se: 0.0,
        relative_entropy: 0.0,
        relative_entropy_se: 0.0,
        dirichlet: 0.0,
        dirichlet_se: 0.0,
        bound: 0.0,
        margin: 0.0,
        margin_se: 0.0,
        holds: true,
        exact_relative_entropy: None,
        exact_dirichlet: None,
        chain: None,
    };
    if spec.is_untilted() {
        return Ok(report);
    }
    let chain = mcmc_tilted_spectrum(spec, opts)?;
    let (log_z_psi, se_z, method) = if n <= QUADRATURE_MAX_DIM {
        let (lz, mean_tilt, mean_dir) = quadrature_moments(spec)?;
        report.exact_relative_entropy = Some(log_z0 - lz - big_n * mean_tilt);
        report.exact_dirichlet = Some(4.0 * big_n * big_n * mean_dir);
        (lz, 0.0, "quadrature")
    } else {
        let (delta, se) = thermodynamic_log_ratio(spec, opts)?;
        (log_z0 + delta, se, "thermodynamic")
    };
    let log_ratio = log_z0 - log_z_psi;
    let margins: Vec<f64> = chain
        .samples
        .iter()
        .map(|s| {
            let tilt: f64 = s.xs.iter().map(|&x| spec.psi_value(x)).sum();
            let dir: f64 = s
                .xs
                .iter()
                .map(|&x| {
                    let d = spec.psi_d1(x);
                    d * d * x * (1.0 - x)
                })
                .sum();
            2.0 * big_n * dir + big_n * tilt - log_ratio
        })
        .collect();
    let tilts: Vec<f64> = chain
        .samples
        .iter()
        .map(|s| big_n * s.xs.iter().map(|&x| spec.psi_value(x)).sum::<f64>())
        .collect();
    let dirs: Vec<f64> = chain
        .samples
        .iter()
        .map(|s| {
            4.0 * big_n * big_n
                * s.xs
                    .iter()
                    .map(|&x| {
                        let d = spec.psi_d1(x);
                        d * d * x * (1.0 - x)
                    })
                    .sum::<f64>()
        })
        .collect();
    let (mt, se_t) = mean_and_se(&tilts);
    let (md, se_d) = mean_and_se(&dirs);
    let (mm, se_m) = mean_and_se(&margins);
    report.log_z_psi = log_z_psi;
    report.log_z_method = method.into();
    report.log_z_psi_se = se_z;
    report.relative_entropy = log_ratio - mt;
    report.relative_entropy_se = (se_t * se_t + se_z * se_z).sqrt();
    report.dirichlet = md;
    report.dirichlet_se = se_d;
    report.bound = md / (2.0 * big_n);
    report.margin = mm;
    report.margin_se = (se_m * se_m + se_z * se_z).sqrt();
    report.holds = mm >= -3.0 * report.margin_se;
    report.chain = Some(chain.diagnostics);
    Ok(report)
}

/// `log Z̃^ψ - log Z̃⁰ = -∫₀¹ N E_{tψ}[∑ψ] dt` by a 16-point Gauss rule in `t`.
pub fn thermodynamic_log_ratio(spec: &EnsembleSpec, opts: &ChainOptions) -> Result<(f64, f64)> {
    let (tx, tw) = gauss_legendre(16);
    let big_n = spec.n as f64;
    let parts: Vec<Result<(f64, f64)>> = tx
        .par_iter()
        .zip(tw.par_iter())
        .enumerate()
        .map(|(j, (z, w))| {
            let t = 0.5 * (z + 1.0);
            let mut o = opts.clone();
            o.seed = opts.seed.wrapping_add(1 + j as u64);
            let chain = run_chain(spec, t, &o)?;
            let vals: Vec<f64> = chain
                .samples
                .iter()
                .map(|s| big_n * s.xs.iter().map(|&x| spec.psi_value(x)).sum::<f64>())
                .collect();
            let (m, se) = mean_and_se(&vals);
            Ok((-0.5 * w * m, 0.5 * w * se))
        })
        .collect();
    let mut total = 0.0;
    let mut var = 0.0;
    for p in parts {
        let (v, se) = p?;
        total += v;
        var += se * se;
    }
    Ok((total, var.sqrt()))
}

/// `(1/N²) log Z̃⁰_N`, which approaches the constant `C` as `k/N → α`, `l/N → β`.
pub fn scaled_log_partition(n: usize, k: usize, l: usize) -> f64 {
    let (_, _, m) = structural_multiplicities(n, k, l);
    let a = (k as f64 - l as f64).abs();
    let b = (k as f64 + l as f64 - n as f64).abs();
    log_selberg(m, a, b) / (n * n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Polynomial;

    #[test]
    fn multiplicities() {
        assert_eq!(structural_multiplicities(4, 2, 2), (2, 0, 2));
        assert_eq!(structural_multiplicities(3, 2, 2), (1, 1, 1));
        assert_eq!(structural_multiplicities(2, 1, 1), (1, 0, 1));
    }

    #[test]
    fn log_density_examples() {
        let s = EnsembleSpec::new(2, 1, 1).unwrap();
        assert_eq!(log_density(&[0.3], &s), 0.0);
        let s = EnsembleSpec::new(3, 2, 2).unwrap();
        assert!((log_density(&[0.3], &s) - 0.7f64.ln()).abs() < 1e-15);
        let s = EnsembleSpec::new(4, 2, 2).unwrap();
        assert_eq!(log_density(&[0.3, 0.3], &s), f64::NEG_INFINITY);
    }

    #[test]
    fn selberg_matches_quadrature() {
        for (n, k, l) in [(2, 1, 1), (3, 2, 2), (4, 2, 2), (5, 2, 3), (6, 3, 3)] {
            let spec = EnsembleSpec::new(n, k, l).unwrap();
            let (_, _, m) = spec.multiplicities();
            let (a, b) = spec.exponents();
            let (lz, _, _) = quadrature_moments(&spec).unwrap();
            assert!((lz - log_selberg(m, a, b)).abs() < 1e-12, "({n},{k},{l})");
        }
    }

    #[test]
    fn untilted_report_is_trivial() {
        let spec = EnsembleSpec::new(4, 2, 2).unwrap();
        let r = lsi_matrix_report(&spec, &ChainOptions::default()).unwrap();
        assert_eq!((r.relative_entropy, r.dirichlet, r.margin), (0.0, 0.0, 0.0));
    }

    #[test]
    fn exact_relative_entropy_for_linear_tilt() {
        let spec = EnsembleSpec::new(2, 1, 1)
            .unwrap()
            .with_tilt(Arc::new(Polynomial::new(vec![0.0, 1.0])), "x");
        let (lz, mt, _) = quadrature_moments(&spec).unwrap();
        let z = (1.0 - (-2.0f64).exp()) / 2.0;
        let mean = (0.25 - 0.75 * (-2.0f64).exp()) / z;
        assert!((lz - z.ln()).abs() < 1e-14);
        assert!((mt - mean).abs() < 1e-14);
        let s = -z.ln() - 2.0 * mean;
        assert!((s - 0.151_6).abs() < 1e-3, "{s}");
    }
}
