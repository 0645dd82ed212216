use std::f64::consts::PI;
use std::sync::Arc;

use liberlab::ensemble::{
    log_selberg, lsi_matrix_report, mcmc_tilted_spectrum, sample_uniform_pair_spectrum, sample_uniform_spectra,
    scaled_log_partition, ChainOptions, EnsembleSpec,
};
use liberlab::entropy::constant_c_for;
use liberlab::functions::Polynomial;
use liberlab::grassmann::{pqp_spectrum, sample_haar_projection_rng, GrassmannPoint};
use liberlab::stats::{ks_two_sample, tv_histogram, wasserstein1_quantile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::ln_beta;

#[test]
fn fixing_one_projection_does_not_change_the_spectrum_law() {
    let (n, k, l) = (4, 2, 2);
    let both: Vec<f64> = sample_uniform_spectra(&EnsembleSpec::new(n, k, l).unwrap(), 4000, 1)
        .unwrap()
        .into_iter()
        .flat_map(|s| s.xs)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = GrassmannPoint::standard(n, k).unwrap();
    let mut fixed = vec![];
    for _ in 0..4000 {
        let q = sample_haar_projection_rng(n, l, &mut rng).unwrap();
        let spec = pqp_spectrum(p.matrix(), q.matrix()).unwrap();
        // keep the nontrivial eigenvalues, as the sampler does
        fixed.extend(spec.into_iter().filter(|&x| x > 1e-9 && x < 1.0 - 1e-9));
    }
    let (d, pvalue) = ks_two_sample(&both, &fixed);
    assert!(pvalue > 1e-3, "D = {d}, p = {pvalue}");
}

#[test]
fn metropolis_chain_matches_the_tilted_marginal() {
    // (2,1,1) with ψ(x) = x has density ∝ e^{-2x} on [0,1]
    let spec = EnsembleSpec::new(2, 1, 1)
        .unwrap()
        .with_tilt(Arc::new(Polynomial::new(vec![0.0, 1.0])), "x");
    let opts = ChainOptions {
        samples: 20_000,
        seed: 3,
        ..ChainOptions::default()
    };
    let chain = mcmc_tilted_spectrum(&spec, &opts).unwrap();
    let xs: Vec<f64> = chain.samples.iter().flat_map(|s| s.xs.iter().copied()).collect();
    let z = 1.0 - (-2.0f64).exp();
    let tv = tv_histogram(&xs, 20, |a, b| ((-2.0 * a).exp() - (-2.0 * b).exp()) / z);
    assert!(tv < 0.03, "TV = {tv}");
    assert!(chain.diagnostics.acceptance_rate > 0.2);
}

#[test]
fn selberg_integral_reduces_to_beta_for_one_eigenvalue() {
    for &(a, b) in &[(0.0, 0.0), (1.0, 0.0), (2.0, 3.0), (0.5, 4.0)] {
        let exact = ln_beta(a + 1.0, b + 1.0);
        assert!((log_selberg(1, a, b) - exact).abs() < 1e-12, "({a},{b})");
    }
}

#[test]
fn matrix_relative_entropy_agrees_with_quadrature() {
    let spec = EnsembleSpec::new(3, 2, 2)
        .unwrap()
        .with_tilt(Arc::new(Polynomial::new(vec![0.0, 0.0, 0.5])), "x^2/2");
    let opts = ChainOptions {
        seed: 4,
        ..ChainOptions::default()
    };
    let r = lsi_matrix_report(&spec, &opts).unwrap();
    let exact = r.exact_relative_entropy.expect("one eigenvalue is quadrature-exact");
    assert!((r.relative_entropy - exact).abs() < 4.0 * r.relative_entropy_se + 1e-12);
    assert!(r.holds);
}

#[test]
fn spectra_approach_the_arcsine_law() {
    let w1 = |n: usize, seed: u64| {
        let spec = EnsembleSpec::new(n, n / 2, n / 2).unwrap();
        let xs: Vec<f64> = (0..4)
            .flat_map(|t| sample_uniform_pair_spectrum(&spec, seed + t).unwrap().xs)
            .collect();
        wasserstein1_quantile(&xs, |u| (0.5 * PI * u).sin().powi(2))
    };
    let coarse = w1(10, 10);
    let fine = w1(80, 20);
    assert!(fine < coarse, "{coarse} -> {fine}");
    assert!(fine < 0.02);
}

#[test]
fn scaled_partition_function_tends_to_the_constant() {
    let (_, c) = constant_c_for(0.5, 0.5);
    let gaps: Vec<f64> = [20, 80, 320]
        .iter()
        .map(|&n| (scaled_log_partition(n, n / 2, n / 2) - c).abs())
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 0.05, "{gaps:?}");
}
