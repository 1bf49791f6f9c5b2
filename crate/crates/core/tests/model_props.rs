mod common;

use emgmm::model::log_sum_exp;
use emgmm::{cholesky_factor, log_density, log_mixture_density, GaussianComponent, GmmParams};
use ndarray::{array, Array1};
use proptest::prelude::*;
use rand::Rng;

use common::*;

proptest! {
    #[test]
    fn cholesky_reconstructs_spd(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let a = random_spd(&mut r, d);
        let l = cholesky_factor(a.view()).unwrap();
        let back = l.dot(&l.t());
        let scale = 1.0 + a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..d {
                prop_assert!((back[[i, j]] - a[[i, j]]).abs() < 1e-9 * scale);
                if j > i {
                    prop_assert_eq!(l[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn log_density_matches_cofactor_formula(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let cov = random_spd(&mut r, d);
        let mean = Array1::from_shape_fn(d, |_| r.random_range(-2.0..2.0));
        let x = Array1::from_shape_fn(d, |_| r.random_range(-4.0..4.0));
        let c = GaussianComponent::new(mean.clone(), cov.clone(), 1.0).unwrap();
        let naive = gaussian_log_pdf(&x.to_vec(), &mean.to_vec(), &to_mat(cov.view()));
        prop_assert!((log_density(x.view(), &c).unwrap() - naive).abs() < 1e-8);
    }

    #[test]
    fn mixture_density_is_finite_for_tiny_densities(offset in 0.0f64..50.0, k in 1usize..=3) {
        // component log-densities near -1e6
        let comps: Vec<GaussianComponent> = (0..k)
            .map(|j| GaussianComponent::new(array![j as f64], array![[1.0]], 1.0 / k as f64).unwrap())
            .collect();
        let params = GmmParams::normalized(comps).unwrap();
        let x = array![1414.0 + offset];
        let v = log_mixture_density(x.view(), &params).unwrap();
        prop_assert!(v.is_finite());
        prop_assert!(v < -9.9e5);
        let terms: Vec<f64> = params
            .components()
            .iter()
            .map(|c| c.weight().ln() + log_density(x.view(), c).unwrap())
            .collect();
        prop_assert!((v - log_sum_exp(&terms)).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_mixture_integrates_to_one(seed in any::<u64>(), k in 1usize..=3) {
        let mut r = rng(seed);
        let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let comps = raw
            .iter()
            .map(|w| {
                let mu = r.random_range(-5.0..5.0);
                let var = r.random_range(0.3..4.0);
                GaussianComponent::new(array![mu], array![[var]], w / total).unwrap()
            })
            .collect();
        let params = GmmParams::normalized(comps).unwrap();
        let h = 1e-3;
        let steps = (40.0 / h) as usize;
        let mut area = 0.0;
        for s in 0..=steps {
            let x = -20.0 + s as f64 * h;
            let f = log_mixture_density(array![x].view(), &params).unwrap().exp();
            area += if s == 0 || s == steps { 0.5 * f } else { f };
        }
        prop_assert!((area * h - 1.0).abs() < 1e-2);
    }
}

#[test]
fn pdf_oracle_agrees_with_log_pdf_oracle() {
    let cov = vec![vec![2.0, 0.3], vec![0.3, 1.0]];
    let x = [0.5, -0.2];
    let m = [0.0, 0.1];
    assert!((gaussian_pdf(&x, &m, &cov).ln() - gaussian_log_pdf(&x, &m, &cov)).abs() < 1e-14);
}
