mod common;

use emgmm::em::MONOTONICITY_SLACK;
use emgmm::{
    e_step, expected_complete_log_likelihood, fit, generate, init_random, log_likelihood, m_step,
    initialize, Dataset, FitConfig, GaussianComponent, GmmParams, InitKind, InitStrategy, Scenario,
};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use rand::Rng;

use common::*;

/// Randomly nudged copy of `p`; covariances stay SPD by construction.
fn perturb<R: Rng>(r: &mut R, p: &GmmParams, scale: f64) -> GmmParams {
    let comps = p
        .components()
        .iter()
        .map(|c| {
            let d = c.dim();
            let mean = &c.mean() + &Array1::from_shape_fn(d, |_| r.random_range(-scale..scale));
            let a = Array2::from_shape_fn((d, d), |_| r.random_range(-scale..scale));
            let mut factor = c.cholesky().to_owned() + a;
            for i in 0..d {
                for j in (i + 1)..d {
                    factor[[i, j]] = 0.0;
                }
                factor[[i, i]] = factor[[i, i]].abs().max(1e-3);
            }
            let mut cov = factor.dot(&factor.t());
            for i in 0..d {
                for j in 0..i {
                    cov[[i, j]] = cov[[j, i]];
                }
            }
            let w = (c.weight() * (1.0 + r.random_range(-scale..scale))).max(1e-6);
            GaussianComponent::new(mean, cov, w.min(1.0)).unwrap()
        })
        .collect();
    GmmParams::normalized(comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn responsibilities_rows_sum_to_one(seed in any::<u64>(), d in 1usize..=3, k in 1usize..=4) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, 25, d);
        let params = random_params(&mut r, k, d);
        let g = e_step(&data, &params).unwrap();
        for row in g.gamma().outer_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn m_step_maximizes_q(seed in any::<u64>(), d in 1usize..=3, k in 1usize..=3) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, 12, d);
        let gamma = random_gamma(&mut r, 12, k);
        let best = m_step(&data, &gamma, 0.0).unwrap();
        let q_best = expected_complete_log_likelihood(&data, &gamma, &best).unwrap();
        for _ in 0..100 {
            let other = perturb(&mut r, &best, 0.3);
            let q = expected_complete_log_likelihood(&data, &gamma, &other).unwrap();
            prop_assert!(q <= q_best + 1e-9);
        }
        let start = random_params(&mut r, k, d);
        prop_assert!(expected_complete_log_likelihood(&data, &gamma, &start).unwrap() <= q_best + 1e-9);
    }

    #[test]
    fn m_step_matches_direct_summation(seed in any::<u64>(), d in 1usize..=3, k in 1usize..=3) {
        let mut r = rng(seed);
        let n = r.random_range((d + 1)..=10);
        let data = random_dataset(&mut r, n, d);
        let gamma = random_gamma(&mut r, n, k);
        let p = m_step(&data, &gamma, 0.0).unwrap();
        let oracle = weighted_moments(&rows(&data), &to_mat(gamma.gamma()));
        for (c, (w, m, s)) in p.components().iter().zip(oracle) {
            prop_assert!((c.weight() - w).abs() < 1e-10);
            for a in 0..d {
                prop_assert!((c.mean()[a] - m[a]).abs() < 1e-10);
                for b in 0..d {
                    prop_assert!((c.covariance()[[a, b]] - s[a][b]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn log_likelihood_matches_per_point_oracle(seed in any::<u64>(), d in 1usize..=3, k in 1usize..=3) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, 3, d);
        let params = random_params(&mut r, k, d);
        let oracle = OracleMixture::from_params(&params).log_likelihood(&rows(&data));
        prop_assert!((log_likelihood(&data, &params).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn fit_trace_is_monotone(seed in any::<u64>(), d in 1usize..=3, k in 1usize..=4) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, 40, d);
        let init = init_random(&data, k, seed).unwrap();
        let result = fit(&data, &init, &FitConfig { max_iters: 200, ..FitConfig::default() }).unwrap();
        prop_assert_eq!(result.trace.monotonicity_violations(MONOTONICITY_SLACK), 0);
        prop_assert_eq!(result.trace.param_deltas.len(), result.trace.iterations);
        prop_assert_eq!(result.trace.log_likelihoods.len(), result.trace.iterations + 1);
        let w: f64 = result.params.weights().iter().sum();
        prop_assert!((w - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_point_likelihoods() {
    let data = Dataset::new(array![[0.0]]).unwrap();
    let p = GmmParams::new(vec![GaussianComponent::new(array![0.0], array![[1.0]], 1.0).unwrap()]).unwrap();
    assert!((log_likelihood(&data, &p).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-15);
    let data = Dataset::new(array![[1.0, 2.0]]).unwrap();
    let p = GmmParams::new(vec![GaussianComponent::new(array![1.0, 2.0], Array2::eye(2), 1.0).unwrap()]).unwrap();
    assert!((log_likelihood(&data, &p).unwrap() + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
}

#[test]
fn converged_fit_is_a_fixed_point() {
    let scenario = Scenario::builtin("3c2d").unwrap();
    let data = generate(&scenario, 5).unwrap();
    let tight = FitConfig {
        param_tol: 1e-12,
        max_iters: 5000,
        ..FitConfig::default()
    };
    let first = fit(&data, &init_random(&data, 3, 1).unwrap(), &tight).unwrap();
    assert!(first.trace.converged);
    let again = fit(&data, &first.params, &FitConfig::default()).unwrap();
    assert!(again.trace.converged);
    assert!(again.trace.iterations <= 2, "{} iterations", again.trace.iterations);
    assert!(again.trace.param_deltas[0] < 1e-6);
}

#[test]
fn separated_clusters_are_recovered() {
    let mut r = rng(3);
    let mut xs: Vec<f64> = (0..50).map(|_| -5.0 + r.random_range(-0.3..0.3)).collect();
    xs.extend((0..50).map(|_| 5.0 + r.random_range(-0.3..0.3)));
    let data = Dataset::new(Array2::from_shape_vec((100, 1), xs).unwrap()).unwrap();
    for (seed, kind) in (0..12).zip([InitKind::KMeans, InitKind::KMedoids].iter().cycle()) {
        let init = initialize(&data, 2, &InitStrategy::new(*kind, seed)).unwrap().params;
        let result = fit(&data, &init, &FitConfig::default()).unwrap();
        let mut means = result.params.means().column(0).to_vec();
        means.sort_by(f64::total_cmp);
        assert!((means[0] + 5.0).abs() < 0.5 && (means[1] - 5.0).abs() < 0.5, "{kind}: {means:?}");
    }
}
