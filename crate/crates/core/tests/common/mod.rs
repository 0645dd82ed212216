//! Random laws and potentials shared by the integration tests.
#![allow(dead_code)]

use liberlab::entropy::{DiagonalValues, PotentialSpec};
use liberlab::functions::Polynomial;
use liberlab::measure::{DensitySpec, ProjectionPairLaw};
use rand::Rng;

/// Chebyshev coefficients of `(1 - t²) q(t)` from those of `q`.
pub fn times_one_minus_t2(q: &[f64]) -> Vec<f64> {
    // 1 - t² = ½ T₀ - ½ T₂ and T_j T_k = ½ (T_{j+k} + T_{|j-k|})
    let mut out = vec![0.0; q.len() + 2];
    for (k, &c) in q.iter().enumerate() {
        out[k] += 0.5 * c;
        out[k + 2] -= 0.25 * c;
        out[k.abs_diff(2)] -= 0.25 * c;
    }
    out
}

/// Positive Chebyshev series `1 + ∑ c_k T_k` with `∑|c_k| ≤ 0.8`.
pub fn positive_series<R: Rng>(rng: &mut R, degree: usize) -> Vec<f64> {
    let mut c: Vec<f64> = (0..degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = c.iter().map(|v| v.abs()).sum();
    let budget = rng.random_range(0.0..0.8);
    if total > 0.0 {
        c.iter_mut().for_each(|v| *v *= budget / total);
    }
    let mut q = vec![1.0];
    q.extend(c);
    q
}

/// A law in generic position whose density is a smooth perturbation of a
/// square-root profile on a random subinterval (or, for `α = β = ½`,
/// sometimes an arcsine-type profile on all of `[0,1]`).
pub fn random_law<R: Rng>(rng: &mut R) -> ProjectionPairLaw {
    let degree = rng.random_range(0..5);
    if rng.random_bool(0.2) {
        let q = positive_series(rng, degree);
        let density = DensitySpec::chebyshev(0.0, 1.0, q).unwrap();
        return ProjectionPairLaw::generic_with_density(0.5, 0.5, &density).unwrap();
    }
    let alpha = rng.random_range(0.05..0.95);
    let beta = rng.random_range(0.05..0.95);
    let lo = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.3) };
    let hi = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.7..1.0) };
    let coeffs = times_one_minus_t2(&positive_series(rng, degree));
    let density = DensitySpec::chebyshev(lo, hi, coeffs).unwrap();
    ProjectionPairLaw::generic_with_density(alpha, beta, &density).unwrap()
}

/// A random cubic `h̃` scaled so that `c₁‖h̃'‖ + c₂‖h̃''‖ = smallness`.
pub fn random_potential<R: Rng>(rng: &mut R, c1: f64, c2: f64, smallness: f64) -> PotentialSpec {
    let diag = DiagonalValues {
        h11_0: rng.random_range(-0.2..0.2),
        h22_0: rng.random_range(-0.2..0.2),
        h11_1: rng.random_range(-0.2..0.2),
        h22_1: rng.random_range(-0.2..0.2),
    };
    let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw = PotentialSpec::polynomial(Polynomial::new(coeffs.clone()), diag);
    let n = raw.norms();
    let size = c1 * n.h1 + c2 * n.h2;
    let scale = if size > 0.0 { smallness / size } else { 0.0 };
    PotentialSpec::polynomial(Polynomial::new(coeffs.iter().map(|c| c * scale).collect()), diag)
}
