//! Property tests over randomly generated laws, potentials and matrices.

mod common;

use liberlab::entropy::{b_function, chi_proj, constant_c_for};
use liberlab::fisher::phi_star;
use liberlab::grassmann::{exp_normal_coordinate, random_tangent, sample_haar_projection_rng};
use liberlab::liberation::{flow_evolve, init_flow, StepControl};
use liberlab::measure::{weighted_norm, DensitySpec, Integrand, ProjectionPairLaw};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn law_from_seed(seed: u64) -> ProjectionPairLaw {
    common::random_law(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_norm_is_homogeneous(seed in any::<u64>(), scale in 0.1f64..10.0, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let law = law_from_seed(seed);
        let d = law.density();
        let grid = d.grid(512);
        let base = weighted_norm(d, p, &grid).unwrap();
        let scaled = weighted_norm(&d.scaled(scale), p, &grid).unwrap();
        prop_assert!((scaled - scale * base).abs() <= 1e-12 * scale * base.max(1e-300));
    }

    #[test]
    fn integration_is_linear_and_monotone(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let law = law_from_seed(seed);
        let grid = law.grid(512);
        let f = |x: f64| x * x - 0.3;
        let g = |x: f64| (4.0 * x).cos();
        let i_f = law.integrate_against(&Integrand::bounded(f), &grid).unwrap();
        let i_g = law.integrate_against(&Integrand::bounded(g), &grid).unwrap();
        let combo = law.integrate_against(&Integrand::bounded(move |x| a * f(x) + b * g(x)), &grid).unwrap();
        prop_assert!((combo - (a * i_f + b * i_g)).abs() <= 1e-12 * (1.0 + combo.abs()));
        let low = law.integrate_against(&Integrand::bounded(|x| x * x), &grid).unwrap();
        let high = law.integrate_against(&Integrand::bounded(|x| x), &grid).unwrap();
        prop_assert!(low <= high + 1e-15);
    }

    #[test]
    fn b_and_c_are_symmetric(s in 0.0f64..2.0, t in 0.0f64..2.0, alpha in 0.0f64..1.0, beta in 0.0f64..1.0) {
        prop_assert!((b_function(s, t) - b_function(t, s)).abs() <= 1e-14 * (1.0 + b_function(s, t).abs()));
        let (r1, c1) = constant_c_for(alpha, beta);
        let (r2, c2) = constant_c_for(beta, alpha);
        let (r3, c3) = constant_c_for(1.0 - alpha, 1.0 - beta);
        prop_assert!((r1 - r2).abs() < 1e-15 && (r1 - r3).abs() < 1e-15);
        prop_assert!((c1 - c2).abs() < 1e-12 && (c1 - c3).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_nonpositive_and_fisher_nonnegative(seed in any::<u64>()) {
        let law = law_from_seed(seed);
        let grid = law.grid(1024);
        let chi = chi_proj(&law, &grid).unwrap().chi;
        let phi = phi_star(&law, &grid).unwrap().phi_star;
        prop_assert!(chi <= 1e-9, "chi = {}", chi);
        prop_assert!(phi >= 0.0);
        prop_assert!(phi + chi >= -1e-6);
    }

    #[test]
    fn entropy_is_concave_along_mixtures(seed in any::<u64>(), t in 0.05f64..0.95) {
        // two densities on the same support with the same traces
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |c: Vec<f64>| -> Vec<f64> { c.iter().map(|v| v / c[0]).collect() };
        let q1 = unit(common::times_one_minus_t2(&common::positive_series(&mut rng, 4)));
        let q2 = unit(common::times_one_minus_t2(&common::positive_series(&mut rng, 4)));
        let mixed: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let chi = |c: Vec<f64>| {
            let d = DensitySpec::chebyshev(0.1, 0.9, c).unwrap();
            let law = ProjectionPairLaw::generic_with_density(0.4, 0.3, &d).unwrap();
            chi_proj(&law, &law.grid(1024)).unwrap().chi
        };
        let (x, y, m) = (chi(q1), chi(q2), chi(mixed));
        prop_assert!(m >= t * x + (1.0 - t) * y - 1e-10, "{} < {}", m, t * x + (1.0 - t) * y);
    }

    #[test]
    fn normal_coordinates_stay_on_the_grassmannian(seed in any::<u64>(), n in 2usize..7, scale in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1 + (seed as usize) % (n - 1);
        let p = sample_haar_projection_rng(n, k, &mut rng).unwrap();
        let x = random_tangent(n, k, &mut rng).scaled(scale);
        let moved = exp_normal_coordinate(&p, &x).unwrap();
        prop_assert!(moved.validate().is_ok());
        prop_assert_eq!(moved.rank(), k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_keeps_order_and_raises_entropy(seed in any::<u64>()) {
        let law = law_from_seed(seed);
        let start = init_flow(&law, 24).unwrap();
        let atoms = *start.atoms();
        let mass = start.mass();
        let state = flow_evolve(start, 0.5, &StepControl::default()).unwrap();
        let xs = state.positions();
        prop_assert!(xs.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert_eq!(*state.atoms(), atoms);
        prop_assert_eq!(state.mass(), mass);
        let h = &state.history;
        let scale = h.iter().map(|r| r.chi.abs()).fold(0.0, f64::max);
        prop_assert!(h.windows(2).all(|p| p[1].chi >= p[0].chi - 1e-12 * scale));
        prop_assert!(h.iter().all(|r| r.phi_star >= 0.0));
    }
}
