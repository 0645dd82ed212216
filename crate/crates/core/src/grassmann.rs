//! The Grassmannian `G(N,k)` of rank-`k` projections in `M_N(ℂ)`, with the
//! metric `⟨X,Y⟩ = Re Tr(XY*)` on the off-diagonal anti-Hermitian blocks.
//!
//! Traces written `Tr` are unnormalized; `tr = Tr/N` is exposed separately.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

const EIGEN_CLAMP: f64 = 1e-10;

/// Unnormalized trace.
pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Normalized trace `Tr/N`.
pub fn normalized_trace(m: &CMat) -> C64 {
    trace(m) / m.nrows() as f64
}

/// `‖A‖²_HS = Tr(AA*)`.
pub fn hs_norm_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Haar unitary from a complex Ginibre matrix by QR with positive `diag(R)`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A projection `P = U P_N(k) U*` together with the frame `U`.
#[derive(Debug, Clone)]
pub struct GrassmannPoint {
    p: CMat,
    frame: CMat,
    k: usize,
}

impl GrassmannPoint {
    pub fn from_frame(frame: CMat, k: usize) -> Result<Self> {
        let n = frame.nrows();
        if frame.ncols() != n || k > n {
            return Err(Error::InvalidArgument(format!("frame must be square and k <= N, got k = {k}")));
        }
        let cols = frame.columns(0, k);
        let p = cols * cols.adjoint();
        Ok(Self { p, frame, k })
    }

    /// The coordinate projection `P_N(k) = diag(1,…,1,0,…,0)`.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        Self::from_frame(CMat::identity(n, n), k)
    }

    pub fn matrix(&self) -> &CMat {
        &self.p
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// Checks `P² = P`, `P* = P` and `Tr P = k`.
    pub fn validate(&self) -> Result<()> {
        let idem = (&self.p * &self.p - &self.p).norm();
        let herm = (&self.p - self.p.adjoint()).norm();
        let tr = trace(&self.p).re;
        if idem > 1e-10 || herm > 1e-12 || (tr - self.k as f64).abs() > 1e-8 {
            return Err(Error::Invariant {
                equation: "P = P* = P^2, Tr P = k",
                detail: format!("|P²-P| = {idem:.2e}, |P-P*| = {herm:.2e}, Tr P = {tr}"),
            });
        }
        Ok(())
    }
}

pub fn sample_haar_projection_rng<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<GrassmannPoint> {
    if k > n {
        return Err(Error::InvalidArgument(format!("rank {k} exceeds dimension {n}")));
    }
    GrassmannPoint::from_frame(sample_haar_unitary(n, rng), k)
}

/// Haar-distributed projection of rank `k` from a seed.
pub fn sample_haar_projection(n: usize, k: usize, seed: u64) -> Result<GrassmannPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_haar_projection_rng(n, k, &mut rng)
}

/// Anti-Hermitian matrix whose diagonal blocks (w.r.t. `k ⊕ (N-k)`) vanish.
#[derive(Debug, Clone)]
pub struct TangentVector {
    x: CMat,
    k: usize,
}

impl TangentVector {
    pub fn new(x: CMat, k: usize) -> Result<Self> {
        let n = x.nrows();
        if x.ncols() != n || k > n {
            return Err(Error::InvalidArgument("tangent vector must be square with k <= N".into()));
        }
        let scale = x.norm().max(1.0);
        if (&x + x.adjoint()).norm() > 1e-12 * scale {
            return Err(Error::InvalidArgument("tangent vector is not anti-Hermitian".into()));
        }
        let block = |r0: usize, r1: usize| {
            (r0..r1)
                .flat_map(|i| (r0..r1).map(move |j| (i, j)))
                .map(|(i, j)| x[(i, j)].norm())
                .fold(0.0, f64::max)
        };
        if block(0, k).max(block(k, n)) > 1e-12 * scale {
            return Err(Error::InvalidArgument("tangent vector has nonzero diagonal blocks".into()));
        }
        Ok(Self { x, k })
    }

    pub fn matrix(&self) -> &CMat {
        &self.x
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    /// `⟨X, Y⟩ = Re Tr(XY*)`.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        (&self.x * other.x.adjoint()).trace().re
    }

    pub fn norm_sq(&self) -> f64 {
        hs_norm_sq(&self.x)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x: &self.x * C64::new(c, 0.0),
            k: self.k,
        }
    }
}

/// The orthonormal basis `E_ij = (e_ij - e_ji)/√2`, `F_ij = i(e_ij + e_ji)/√2`
/// for `i < k ≤ j`, in the order `E, F` per index pair.
pub fn tangent_basis(n: usize, k: usize) -> Vec<TangentVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * k * (n - k.min(n)));
    for i in 0..k {
        for j in k..n {
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = C64::new(s, 0.0);
            e[(j, i)] = C64::new(-s, 0.0);
            let mut f = CMat::zeros(n, n);
            f[(i, j)] = C64::new(0.0, s);
            f[(j, i)] = C64::new(0.0, s);
            out.push(TangentVector { x: e, k });
            out.push(TangentVector { x: f, k });
        }
    }
    out
}

/// `∑ x_b B_b` over the tangent basis.
pub fn tangent_combination(n: usize, k: usize, coords: &[f64]) -> TangentVector {
    let mut x = CMat::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = 0;
    for i in 0..k {
        for j in k..n {
            let (ce, cf) = (coords[b], coords[b + 1]);
            x[(i, j)] += C64::new(s * ce, s * cf);
            x[(j, i)] += C64::new(-s * ce, s * cf);
            b += 2;
        }
    }
    TangentVector { x, k }
}

/// Standard Gaussian tangent vector.
pub fn random_tangent<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> TangentVector {
    let coords: Vec<f64> = (0..2 * k * (n - k)).map(|_| rng.sample(StandardNormal)).collect();
    tangent_combination(n, k, &coords)
}

/// `∑_b ‖[X, B_b]‖²_HS` over the tangent basis; equals `N ‖X‖²_HS`.
pub fn ricci_quadratic_form(n: usize, k: usize, x: &TangentVector) -> Result<f64> {
    if x.x.nrows() != n || x.k != k {
        return Err(Error::InvalidArgument("tangent vector does not belong to G(N,k)".into()));
    }
    TangentVector::new(x.x.clone(), k)?;
    Ok(tangent_basis(n, k)
        .iter()
        .map(|b| hs_norm_sq(&commutator(&x.x, &b.x)))
        .sum())
}

/// `e^X` for anti-Hermitian `X`, through the spectrum of the Hermitian `-iX`.
pub fn unitary_exp(x: &CMat) -> CMat {
    let h = x * C64::new(0.0, -1.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| C64::new(0.0, l).exp()));
    v * d * v.adjoint()
}

/// Moves `P = U P_N(k) U*` to `U e^X P_N(k) e^{-X} U*`.
pub fn exp_normal_coordinate(p: &GrassmannPoint, x: &TangentVector) -> Result<GrassmannPoint> {
    if x.k != p.k || x.x.nrows() != p.dim() {
        return Err(Error::InvalidArgument("tangent vector and point have different (N, k)".into()));
    }
    GrassmannPoint::from_frame(&p.frame * unitary_exp(&x.x), p.k)
}

/// Eigenvalues of `PQP`, clamped into `[0,1]`.
pub fn pqp_spectrum(p: &CMat, q: &CMat) -> Result<Vec<f64>> {
    let m = p * q * p;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = m.symmetric_eigenvalues();
    eig.iter()
        .map(|&l| {
            if !(-EIGEN_CLAMP..=1.0 + EIGEN_CLAMP).contains(&l) {
                Err(Error::Numerical(format!("PQP eigenvalue {l} outside [0,1]")))
            } else {
                Ok(l.clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// `Tr ψ(PQP)`.
pub fn trace_fn(p: &CMat, q: &CMat, psi: &dyn ScalarFunction) -> Result<f64> {
    Ok(pqp_spectrum(p, q)?.iter().map(|&l| psi.value(l)).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientCheck {
    /// `4 Tr(ψ'(PQP)² PQP (I - PQP))`.
    pub closed_form: f64,
    /// `∑_b (∂_b Ψ)²` by central differences along the basis, Richardson-extrapolated.
    pub finite_difference: f64,
    /// The same sum without extrapolation at the coarser step.
    pub finite_difference_coarse: f64,
    pub relative_error: f64,
}

/// Finite-difference step used for first derivatives.
pub const FD_STEP: f64 = 1e-4;

/// Squared norm of the gradient of `(P, Q) ↦ Tr ψ(PQP)` on `G(N,k) × G(N,l)`,
/// in closed form and by differences along both tangent bases.
pub fn grad_norm_trace_fn(p: &GrassmannPoint, q: &GrassmannPoint, psi: &dyn ScalarFunction) -> Result<GradientCheck> {
    let spec = pqp_spectrum(p.matrix(), q.matrix())?;
    let closed_form: f64 = spec
        .iter()
        .map(|&l| {
            let d = psi.d1(l);
            4.0 * d * d * l * (1.0 - l)
        })
        .sum();
    let n = p.dim();
    let derivative = |b: &TangentVector, move_p: bool, h: f64| -> Result<f64> {
        let eval = |t: f64| -> Result<f64> {
            if move_p {
                let moved = exp_normal_coordinate(p, &b.scaled(t))?;
                trace_fn(moved.matrix(), q.matrix(), psi)
            } else {
                let moved = exp_normal_coordinate(q, &b.scaled(t))?;
                trace_fn(p.matrix(), moved.matrix(), psi)
            }
        };
        Ok((eval(h)? - eval(-h)?) / (2.0 * h))
    };
    let (mut coarse, mut fine) = (0.0, 0.0);
    let directions = tangent_basis(n, p.rank())
        .into_iter()
        .map(|b| (b, true))
        .chain(tangent_basis(n, q.rank()).into_iter().map(|b| (b, false)));
    for (b, move_p) in directions {
        let d1 = derivative(&b, move_p, FD_STEP)?;
        let d2 = derivative(&b, move_p, 0.5 * FD_STEP)?;
        let extrapolated = (4.0 * d2 - d1) / 3.0;
        coarse += d1 * d1;
        fine += extrapolated * extrapolated;
    }
    let denom = closed_form.abs().max(1e-300);
    let relative_error = if closed_form == 0.0 && fine.abs() < 1e-14 {
        0.0
    } else {
        (fine - closed_form).abs() / denom
    };
    Ok(GradientCheck {
        closed_form,
        finite_difference: fine,
        finite_difference_coarse: coarse,
        relative_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    pub dim: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub symmetry_error: f64,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
}

/// Finite-difference Hessian of `Ψ_N(P,Q) = N Tr ψ(PQP)` in the normal
/// coordinates of both `P` and `Q` (dimension `2k(N-k) + 2l(N-l)`).
pub fn hessian_fd(p: &GrassmannPoint, q: &GrassmannPoint, psi: &dyn ScalarFunction) -> Result<HessianReport> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::InvalidArgument("P and Q must have the same size".into()));
    }
    let (k, l) = (p.rank(), q.rank());
    let dp = 2 * k * (n - k);
    let dim = dp + 2 * l * (n - l);
    let h = FD_STEP;
    let f = |z: &[f64]| -> Result<f64> {
        let pz = exp_normal_coordinate(p, &tangent_combination(n, k, &z[..dp]))?;
        let qz = exp_normal_coordinate(q, &tangent_combination(n, l, &z[dp..]))?;
        Ok(n as f64 * trace_fn(pz.matrix(), qz.matrix(), psi)?)
    };
    let mut z = vec![0.0; dim];
    let f0 = f(&z)?;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    let mut upper = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        z[a] = h;
        let fp = f(&z)?;
        z[a] = -h;
        let fm = f(&z)?;
        z[a] = 0.0;
        hess[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in 0..dim {
            if b == a {
                continue;
            }
            let mut corner = |sa: f64, sb: f64| -> Result<f64> {
                z[a] = sa * h;
                z[b] = sb * h;
                let v = f(&z)?;
                z[a] = 0.0;
                z[b] = 0.0;
                Ok(v)
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?) / (4.0 * h * h);
            if b > a {
                hess[(a, b)] = v;
            } else {
                upper[(a, b)] = v;
            }
        }
    }
    let mut symmetry_error: f64 = 0.0;
    for a in 0..dim {
        for b in 0..a {
            symmetry_error = symmetry_error.max((hess[(b, a)] - upper[(a, b)]).abs());
            hess[(a, b)] = 0.5 * (hess[(b, a)] + upper[(a, b)]);
            hess[(b, a)] = hess[(a, b)];
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite finite-difference Hessian".into()));
    }
    let eig = hess.clone().symmetric_eigenvalues();
    Ok(HessianReport {
        dim,
        min_eigenvalue: eig.iter().copied().fold(f64::INFINITY, f64::min),
        max_eigenvalue: eig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        symmetry_error,
        matrix: hess,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureConstants {
    /// `max (-λ_min / N)` over sampled pairs for `ψ(x) = x`.
    pub c1: f64,
    /// Residual for `ψ(x) = x²/2` after removing `c₁ ‖ψ'‖`.
    pub c2: f64,
    pub samples: usize,
}

/// Empirical lower-Hessian constants from random pairs at each `N`, with
/// `k = l = N/2`.
pub fn estimate_curvature_constants(sizes: &[usize], trials: usize, seed: u64) -> Result<CurvatureConstants> {
    use crate::functions::Polynomial;
    let linear = Polynomial::new(vec![0.0, 1.0]);
    let quad = Polynomial::new(vec![0.0, 0.0, 0.5]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c1, mut worst_quad, mut samples) = (0.0f64, 0.0f64, 0);
    for &n in sizes {
        let k = (n / 2).max(1);
        for _ in 0..trials {
            let p = sample_haar_projection_rng(n, k, &mut rng)?;
            let q = sample_haar_projection_rng(n, k, &mut rng)?;
            let lin = hessian_fd(&p, &q, &linear)?;
            c1 = c1.max(-lin.min_eigenvalue / n as f64);
            let qd = hessian_fd(&p, &q, &quad)?;
            worst_quad = worst_quad.max(-qd.min_eigenvalue / n as f64);
            samples += 1;
        }
    }
    // ‖ψ'‖ = ‖ψ''‖ = 1 for ψ = x²/2
    let c2 = (worst_quad - c1).max(0.0);
    Ok(CurvatureConstants { c1, c2, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Polynomial;

    #[test]
    fn basis_is_orthonormal() {
        let basis = tangent_basis(4, 2);
        assert_eq!(basis.len(), 8);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - expect).abs() < 1e-14);
            }
            assert!((a.matrix() + a.matrix().adjoint()).norm() < 1e-15);
        }
    }

    #[test]
    fn ricci_small_case() {
        let basis = tangent_basis(2, 1);
        let v = ricci_quadratic_form(2, 1, &basis[0]).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let zero = TangentVector::new(CMat::zeros(3, 3), 1).unwrap();
        assert_eq!(ricci_quadratic_form(3, 1, &zero).unwrap(), 0.0);
    }

    #[test]
    fn haar_projection_invariants() {
        let p = sample_haar_projection(6, 2, 11).unwrap();
        p.validate().unwrap();
        let zero = sample_haar_projection(5, 0, 1).unwrap();
        assert!(zero.matrix().norm() < 1e-15);
        let full = sample_haar_projection(5, 5, 1).unwrap();
        assert!((full.matrix() - CMat::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn normal_coordinates_preserve_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sample_haar_projection_rng(5, 2, &mut rng).unwrap();
        for _ in 0..10 {
            let x = random_tangent(5, 2, &mut rng);
            let moved = exp_normal_coordinate(&p, &x).unwrap();
            moved.validate().unwrap();
        }
        let same = exp_normal_coordinate(&p, &TangentVector::new(CMat::zeros(5, 5), 2).unwrap()).unwrap();
        assert!((same.matrix() - p.matrix()).norm() < 1e-14);
    }

    #[test]
    fn gradient_of_linear_trace_in_two_dimensions() {
        let t: f64 = 0.3;
        let p = GrassmannPoint::standard(2, 1).unwrap();
        let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
        let mut frame = CMat::zeros(2, 2);
        frame[(0, 0)] = C64::new(c, 0.0);
        frame[(1, 0)] = C64::new(s, 0.0);
        frame[(0, 1)] = C64::new(-s, 0.0);
        frame[(1, 1)] = C64::new(c, 0.0);
        let q = GrassmannPoint::from_frame(frame, 1).unwrap();
        let g = grad_norm_trace_fn(&p, &q, &Polynomial::new(vec![0.0, 1.0])).unwrap();
        assert!((g.closed_form - 4.0 * t * (1.0 - t)).abs() < 1e-12);
        assert!(g.relative_error < 1e-8, "{g:?}");
        let flat = grad_norm_trace_fn(&p, &q, &Polynomial::new(vec![2.0])).unwrap();
        assert_eq!(flat.closed_form, 0.0);
    }

    #[test]
    fn constant_psi_has_zero_hessian() {
        let p = sample_haar_projection(3, 1, 1).unwrap();
        let q = sample_haar_projection(3, 2, 2).unwrap();
        let h = hessian_fd(&p, &q, &Polynomial::new(vec![1.5])).unwrap();
        assert!(h.matrix.iter().all(|v| v.abs() < 1e-8));
        assert_eq!(h.dim, 8);
    }
}
