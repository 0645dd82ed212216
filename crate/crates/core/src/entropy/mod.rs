//! Free entropy of a projection pair, its normalizing constant, the
//! large-deviation rate function, and the entropy relative to a tilt.

pub mod equilibrium;
pub mod potential;

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::{DensitySpec, EdgeClass, Integrand, Point, ProjectionPairLaw, QuadratureGrid};
use crate::report::ext_real;

pub use equilibrium::{equilibrium_solve, EquilibriumOptions, EquilibriumResult};
pub use potential::{DiagonalValues, PotentialSpec, Smoothness};

/// `∫ W(t) log|x-t| dt` and `∫ W(t) (t-x) log|x-t| dt` over the support.
fn edge_transforms(class: EdgeClass, p: Point, lo: f64, hi: f64) -> (f64, f64) {
    let len = hi - lo;
    match class {
        EdgeClass::InverseSqrt => {
            let r = 0.5 * len;
            let s = (p.gap_lo - p.gap_hi) / len;
            (PI * (len / 4.0).ln(), -PI * r * s * ((r / 2.0).ln() + 1.0))
        }
        EdgeClass::Regular => {
            let xlogx = |y: f64| if y > 0.0 { y * y.ln() } else { 0.0 };
            let g = |y: f64| {
                let y2 = y * y;
                if y2 > 0.0 {
                    0.5 * y2 * y.abs().ln() - 0.25 * y2
                } else {
                    0.0
                }
            };
            (xlogx(p.gap_lo) + xlogx(p.gap_hi) - len, g(p.gap_hi) - g(-p.gap_lo))
        }
    }
}

/// Logarithmic potential `U(x_i) = ∫ log|x_i - t| dν(t)` at every grid node.
pub fn log_potential(density: &DensitySpec, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    if density.is_zero() {
        return Ok(vec![0.0; grid.len()]);
    }
    let tab = density.tabulate(grid)?;
    let (lo, hi) = density.support();
    let class = density.class();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (ui, dui) = (tab.u[i], tab.du[i]);
            let mut acc = 0.0;
            for k in 0..grid.len() {
                if k == i {
                    continue;
                }
                let d = grid.diff(i, k);
                acc += tab.measure[k] * d.abs().ln() * (tab.u[k] - ui + dui * d);
            }
            let (l0, l1) = edge_transforms(class, Point::on_grid(grid, i), lo, hi);
            acc + ui * l0 + dui * l1
        })
        .collect())
}

/// `Σ(ν) = ∬ log|x-y| dν(x) dν(y)`.
pub fn log_energy(density: &DensitySpec, grid: &QuadratureGrid) -> Result<f64> {
    if density.is_zero() {
        return Ok(0.0);
    }
    let pot = log_potential(density, grid)?;
    let tab = density.tabulate(grid)?;
    let sigma: f64 = (0..grid.len()).map(|i| tab.measure[i] * tab.u[i] * pot[i]).sum();
    if !sigma.is_finite() {
        return Err(Error::Numerical("log-energy quadrature produced a non-finite value".into()));
    }
    Ok(sigma)
}

/// `B(s,t)` with the convention `0 log 0 = 0`.
pub fn b_function(s: f64, t: f64) -> f64 {
    let q = |y: f64| if y > 0.0 { 0.5 * y * y * y.ln() } else { 0.0 };
    q(1.0 + s) - q(s) + q(1.0 + t) - q(t) - q(2.0 + s + t) + q(1.0 + s + t)
}

/// `(ρ, C)` for traces `α, β`; `C = 0` when `ρ = 0`.
pub fn constant_c_for(alpha: f64, beta: f64) -> (f64, f64) {
    let rho = crate::measure::rho(alpha, beta);
    if rho <= 0.0 {
        return (0.0, 0.0);
    }
    let s = (alpha - beta).abs() / rho;
    let t = (alpha + beta - 1.0).abs() / rho;
    (rho, rho * rho * b_function(s, t))
}

pub fn constant_c(law: &ProjectionPairLaw) -> (f64, f64) {
    constant_c_for(law.alpha(), law.beta())
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub sigma: f64,
    pub log_moment_0: f64,
    pub log_moment_1: f64,
    pub rho: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(serialize_with = "ext_real")]
    pub chi: f64,
    pub generic_position: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
}

/// Free entropy of the pair; `-∞` off the generic-position stratum.
pub fn chi_proj(law: &ProjectionPairLaw, grid: &QuadratureGrid) -> Result<EntropyReport> {
    let (rho, c) = constant_c(law);
    let density = law.density();
    let sigma = log_energy(density, grid)?;
    let mut cause = None;
    let mut moment = |g: Integrand<'_>, name: &str| match law.integrate_against(&g, grid) {
        Ok(v) => v,
        Err(Error::Divergent(msg)) => {
            cause = Some(format!("{name} diverges: {msg}"));
            f64::NEG_INFINITY
        }
        Err(_) => f64::NAN,
    };
    let lm0 = moment(Integrand::log_x(), "log-moment at 0");
    let lm1 = moment(Integrand::log_one_minus_x(), "log-moment at 1");
    if lm0.is_nan() || lm1.is_nan() {
        law.integrate_against(&Integrand::log_x(), grid)?;
        law.integrate_against(&Integrand::log_one_minus_x(), grid)?;
    }
    let atoms = law.atoms();
    let (a, b) = (atoms.coeff_zero(), atoms.coeff_one());
    let generic = law.is_generic();
    let chi = if !generic {
        cause = Some("atoms are not in generic position".into());
        f64::NEG_INFINITY
    } else {
        let term = |coef: f64, m: f64| if coef == 0.0 { 0.0 } else { 0.5 * coef * m };
        0.25 * sigma + term(a, lm0) + term(b, lm1) - c
    };
    Ok(EntropyReport {
        sigma,
        log_moment_0: lm0,
        log_moment_1: lm1,
        rho,
        c,
        chi,
        generic_position: generic,
        cause,
    })
}

/// `I(μ) = -ρ²Σ(μ) + ρ² ∫ F dμ + C′` for a probability density `μ`.
/// A divergent `∫ F dμ` yields `+∞`.
pub fn rate_function(
    mu: &DensitySpec,
    f: &Integrand<'_>,
    rho: f64,
    c_prime: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if rho == 0.0 {
        return Ok(c_prime);
    }
    if (mu.mass() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "rate function needs a probability measure, got mass {}",
            mu.mass()
        )));
    }
    let (lo, hi) = mu.support();
    let (ea, eb) = mu.edge_exponents();
    if (lo == 0.0 && ea + f.at_zero <= -1.0) || (hi == 1.0 && eb + f.at_one <= -1.0) {
        return Ok(f64::INFINITY);
    }
    let sigma = log_energy(mu, grid)?;
    let fint = mu.integrate(grid, |p| f.eval(p))?;
    Ok(-rho * rho * sigma + rho * rho * fint + c_prime)
}

/// The tilted potential `F = (h̃ - A log x - B log(1-x))/ρ` whose rate
/// function is minimised by the equilibrium measure of `h`.
pub fn tilted_potential<'a>(alpha: f64, beta: f64, h: &'a PotentialSpec) -> Integrand<'a> {
    let rho = crate::measure::rho(alpha, beta);
    let a = (alpha - beta).abs();
    let b = (alpha + beta - 1.0).abs();
    Integrand::new(
        move |p: Point| {
            let mut v = h.value(p.x);
            if a > 0.0 {
                v -= a * p.x.ln();
            }
            if b > 0.0 {
                v -= b * p.complement.ln();
            }
            v / rho
        },
        0.0,
        0.0,
    )
}

/// `J_h(ν) = ¼Σ(ν) + ½∫(A log x + B log(1-x) - h̃) dν`, the functional that
/// the equilibrium measure maximises.
pub fn tilted_entropy(law: &ProjectionPairLaw, h: &PotentialSpec, grid: &QuadratureGrid) -> Result<f64> {
    let report = chi_proj(law, grid)?;
    if !report.chi.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    let hint = law.integrate_against(&Integrand::bounded(|x| h.value(x)), grid)?;
    Ok(report.chi + report.c - 0.5 * hint)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelativeEntropyReport {
    #[serde(serialize_with = "ext_real")]
    pub chi: f64,
    pub tau_h: f64,
    pub b_h: f64,
    #[serde(serialize_with = "ext_real")]
    pub sigma_tilde: f64,
}

/// `Σ̃_h = -χ_proj + τ(h) + B_h`, with `B_h` from the equilibrium problem.
pub fn relative_sigma_h(
    law: &ProjectionPairLaw,
    h: &PotentialSpec,
    grid: &QuadratureGrid,
    opts: &EquilibriumOptions,
) -> Result<RelativeEntropyReport> {
    let eq = equilibrium_solve(law.alpha(), law.beta(), h, opts)?;
    relative_sigma_h_with(law, h, grid, eq.b_h)
}

/// As [`relative_sigma_h`] with a precomputed `B_h`.
pub fn relative_sigma_h_with(
    law: &ProjectionPairLaw,
    h: &PotentialSpec,
    grid: &QuadratureGrid,
    b_h: f64,
) -> Result<RelativeEntropyReport> {
    let chi = chi_proj(law, grid)?.chi;
    let tau_h = h.trace_against(law, grid)?;
    Ok(RelativeEntropyReport {
        chi,
        tau_h,
        b_h,
        sigma_tilde: -chi + tau_h + b_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atoms;
    use std::f64::consts::LN_2;

    fn uniform_law() -> ProjectionPairLaw {
        ProjectionPairLaw::new(0.5, 0.5, Atoms::default(), DensitySpec::uniform(1.0)).unwrap()
    }

    #[test]
    fn log_energy_closed_forms() {
        let arc = DensitySpec::arcsine(1.0);
        let s = log_energy(&arc, &arc.grid(2048)).unwrap();
        assert!((s + 2.0 * LN_2).abs() < 1e-10, "{s}");
        let uni = DensitySpec::uniform(1.0);
        let s = log_energy(&uni, &uni.grid(2048)).unwrap();
        assert!((s + 1.5).abs() < 1e-8, "{s}");
        assert_eq!(log_energy(&DensitySpec::zero(), &QuadratureGrid::unit(64)).unwrap(), 0.0);
    }

    #[test]
    fn b_function_values() {
        assert!((b_function(0.0, 0.0) + 2.0 * LN_2).abs() < 1e-15);
        assert!((b_function(0.3, 1.7) - b_function(1.7, 0.3)).abs() < 1e-14);
        let (rho, c) = constant_c_for(0.5, 0.5);
        assert_eq!(rho, 0.5);
        assert!((c + LN_2 / 2.0).abs() < 1e-15);
        let (_, c_small) = constant_c_for(1e-9, 0.4);
        assert!(c_small.abs() < 1e-6);
        assert_eq!(constant_c_for(0.0, 0.3), (0.0, 0.0));
    }

    #[test]
    fn chi_of_free_and_uniform_laws() {
        for (a, b) in [(0.5, 0.5), (0.6, 0.3), (0.1, 0.9), (0.3, 0.3)] {
            let law = ProjectionPairLaw::free_pair(a, b).unwrap();
            let r = chi_proj(&law, &law.grid(4096)).unwrap();
            assert!(r.chi.abs() < 1e-9, "({a},{b}) chi {}", r.chi);
        }
        let law = uniform_law();
        let r = chi_proj(&law, &law.grid(2048)).unwrap();
        let exact = -0.375 + LN_2 / 2.0;
        assert!((r.chi - exact).abs() < 1e-8, "{}", r.chi);
    }

    #[test]
    fn non_generic_chi_is_minus_infinity() {
        let atoms = Atoms {
            a11: 0.1,
            a00: 0.1,
            ..Atoms::default()
        };
        let law = ProjectionPairLaw::new(0.5, 0.5, atoms, DensitySpec::uniform(0.8)).unwrap();
        let r = chi_proj(&law, &law.grid(256)).unwrap();
        assert_eq!(r.chi, f64::NEG_INFINITY);
        assert!(r.cause.is_some());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"chi\":\"-inf\""));
    }

    #[test]
    fn rate_function_vanishes_at_free_law() {
        let (a, b) = (0.6, 0.3);
        let h = PotentialSpec::zero();
        let (rho, c) = constant_c_for(a, b);
        let mu = DensitySpec::free_pair(a, b).with_mass(1.0);
        let f = tilted_potential(a, b, &h);
        let i = rate_function(&mu, &f, rho, c, &mu.grid(4096)).unwrap();
        assert!(i.abs() < 1e-9, "{i}");
        let other = DensitySpec::uniform(1.0);
        let i2 = rate_function(&other, &f, rho, c, &other.grid(2048)).unwrap();
        assert!(i2 > 1e-3);
        assert_eq!(rate_function(&mu, &f, 0.0, 0.25, &mu.grid(64)).unwrap(), 0.25);
    }

    #[test]
    fn relative_entropy_of_untilted_problem_is_minus_chi() {
        let law = uniform_law();
        let grid = law.grid(2048);
        let r = relative_sigma_h(&law, &PotentialSpec::zero(), &grid, &EquilibriumOptions::default()).unwrap();
        assert!((r.sigma_tilde - (0.375 - LN_2 / 2.0)).abs() < 1e-8);
    }
}
