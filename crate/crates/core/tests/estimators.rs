use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use durbin_ar::estimate::{dw_statistic, ols_theta, residuals, yule_walker_fit};
use durbin_ar::montecarlo::{default_suite, map_indexed, rate_diagnostic, Schedule};
use durbin_ar::simulate::run_recursion;
use durbin_ar::{fit, limit_summary, simulate, ModelParams, NoiseFamily};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn consistency_sweep() {
    let seeds = 8u64;
    for (pid, params) in default_suite().iter().enumerate() {
        let limits = limit_summary(params).unwrap();
        let errors: Vec<[f64; 3]> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let per_seed = map_indexed(seeds as usize, Schedule::Parallel, |s| {
                    let tr = simulate(params, n, NoiseFamily::Gaussian, 100 * pid as u64 + s as u64, 0).unwrap();
                    let f = fit(&tr.x, params.p()).unwrap();
                    [
                        dist(&f.theta_hat, &limits.theta_star),
                        (f.rho_hat - limits.rho_star).abs(),
                        (f.dw - limits.d_star).abs(),
                    ]
                });
                let mut mean = [0.0; 3];
                for e in &per_seed {
                    for k in 0..3 {
                        mean[k] += e[k] / seeds as f64;
                    }
                }
                mean
            })
            .collect();
        for k in 0..3 {
            assert!(errors[1][k] < errors[0][k] && errors[2][k] < errors[1][k], "set {pid}: {errors:?}");
            assert!(errors[2][k] < 0.02, "set {pid}: {errors:?}");
        }
    }
}

#[test]
fn standard_p2_set_limits_at_1e5() {
    let params = ModelParams::new(vec![0.4, -0.3], 0.2, 1.0).unwrap();
    let limits = limit_summary(&params).unwrap();
    let tr = simulate(&params, 100_000, NoiseFamily::Gaussian, 12, 0).unwrap();
    let f = fit(&tr.x, 2).unwrap();
    assert!(dist(&f.theta_hat, &limits.theta_star) < 0.01);
    assert!((f.rho_hat - limits.rho_star).abs() < 0.01);
    assert!((f.dw - limits.d_star).abs() < 0.02);
}

#[test]
fn noise_variance_estimate() {
    let params = ModelParams::new(vec![0.5], 0.3, 2.0).unwrap();
    let tr = simulate(&params, 100_000, NoiseFamily::Gaussian, 13, 0).unwrap();
    let f = fit(&tr.x, 1).unwrap();
    assert!((f.sigma2_hat - 2.0).abs() / 2.0 < 0.02, "{}", f.sigma2_hat);
}

#[test]
fn white_noise_gives_small_theta() {
    let n = 2000;
    let inside = (0..200u64)
        .filter(|&s| {
            let x = simulate(&ModelParams::new(vec![1e-9], 0.0, 1.0).unwrap(), n, NoiseFamily::Gaussian, s, 0)
                .unwrap()
                .x;
            ols_theta(&x, 1).unwrap().theta_hat[0].abs() < 3.0 / (n as f64).sqrt()
        })
        .count();
    assert!(inside >= 190, "{inside}");
}

#[test]
fn impulse_series_matches_normal_equations() {
    // V forced to zero except V_1 = 1: X = (0, 1, 0.5, 0.25, ...).
    let params = ModelParams::new(vec![0.5], 0.0, 1.0).unwrap();
    let mut v = vec![0.0; 40];
    v[1] = 1.0;
    let (x, _) = run_recursion(&params, &v, false).unwrap();
    assert_eq!(&x[..4], &[0.0, 1.0, 0.5, 0.25]);
    let num: f64 = (1..x.len()).map(|k| x[k] * x[k - 1]).sum();
    let den: f64 = (0..x.len() - 1).map(|k| x[k] * x[k]).sum();
    let theta = ols_theta(&x, 1).unwrap().theta_hat[0];
    assert_relative_eq!(theta, num / den, max_relative = 1e-14);
    assert_relative_eq!(theta, 0.5, epsilon = 1e-12);
}

#[test]
fn yule_walker_and_least_squares_merge() {
    let params = ModelParams::new(vec![0.4, -0.3], 0.2, 1.0).unwrap();
    let gaps: Vec<f64> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| {
            (0..5u64)
                .map(|s| {
                    let tr = simulate(&params, n, NoiseFamily::Gaussian, 40 + s, 0).unwrap();
                    dist(&yule_walker_fit(&tr.x, 2).unwrap().theta, &ols_theta(&tr.x, 2).unwrap().theta_hat)
                })
                .sum::<f64>()
                / 5.0
        })
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn dw_and_rho_are_affinely_linked() {
    // D̂ - 2(1 - ρ̂) is made of O(1/n) edge terms.
    for (theta, rho) in [(vec![0.5], 0.0), (vec![0.4, -0.3], 0.2), (vec![0.5], 0.5)] {
        let params = ModelParams::new(theta, rho, 1.0).unwrap();
        for &n in &[500usize, 5_000, 50_000] {
            for s in 0..10u64 {
                let tr = simulate(&params, n, NoiseFamily::Gaussian, s, 0).unwrap();
                let f = fit(&tr.x, params.p()).unwrap();
                let gap = (f.dw - 2.0 * (1.0 - f.rho_hat)).abs();
                assert!(gap <= 30.0 / n as f64, "n={n} gap={gap}");
            }
        }
    }
}

#[test]
fn iterated_logarithm_rate_bound() {
    let params = ModelParams::new(vec![0.4, -0.3], 0.2, 1.0).unwrap();
    let checkpoints = [1_000, 10_000, 100_000, 1_000_000];
    let worst = map_indexed(50, Schedule::Parallel, |s| {
        let r = rate_diagnostic(&params, &checkpoints, NoiseFamily::Gaussian, 500 + s as u64).unwrap();
        r.checkpoints.iter().fold(0.0f64, |a, c| a.max(c.lil_theta_ratio))
    });
    let max = worst.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 3.0, "max LIL ratio {max}");
}

#[test]
fn toy_series_against_brute_force() {
    let x = [0.3, -1.2, 0.8, 2.0, -0.5, 1.1];
    let f = fit(&x, 1).unwrap();
    let n = 5.0;
    let theta = (0..5).map(|k| x[k] * x[k + 1]).sum::<f64>() / (0..5).map(|k| x[k] * x[k]).sum::<f64>();
    let e: Vec<f64> = std::iter::once(x[0]).chain((1..6).map(|k| x[k] - theta * x[k - 1])).collect();
    let rho = (1..6).map(|k| e[k] * e[k - 1]).sum::<f64>() / (0..5).map(|k| e[k] * e[k]).sum::<f64>();
    let ss: f64 = e.iter().map(|v| v * v).sum();
    let dw = (1..6).map(|k| (e[k] - e[k - 1]).powi(2)).sum::<f64>() / ss;
    assert_relative_eq!(f.theta_hat[0], theta, max_relative = 1e-13);
    for (a, b) in f.residuals.iter().zip(&e) {
        assert_relative_eq!(a, b, epsilon = 1e-13);
    }
    assert_relative_eq!(f.rho_hat, rho, max_relative = 1e-12);
    assert_relative_eq!(f.dw, dw, max_relative = 1e-12);
    assert_relative_eq!(f.sigma2_hat, (1.0 - rho * rho / (theta * theta)) * ss / n, max_relative = 1e-12);
}

fn arbitrary_series() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=3, 8usize..120, -6i32..6).prop_flat_map(|(p, len, scale)| {
        (
            Just(p),
            prop::collection::vec(-1.0f64..1.0, len)
                .prop_map(move |v| v.into_iter().map(|x| x * 10f64.powi(scale)).collect()),
        )
    })
}

proptest! {
    #[test]
    fn yule_walker_identity_is_exact((p, x) in arbitrary_series()) {
        let yw = yule_walker_fit(&x, p).unwrap();
        prop_assert!((yw.h_radicand(x.len() - 1) - yw.theta[p - 1].powi(2)).abs() < 1e-10);
    }

    #[test]
    fn residuals_reconstruct_series((p, x) in arbitrary_series()) {
        let Ok(f) = fit(&x, p) else { return Ok(()); };
        let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for k in 0..x.len() {
            let fitted: f64 = (0..p).filter(|&i| k > i).map(|i| f.theta_hat[i] * x[k - 1 - i]).sum();
            prop_assert!((x[k] - fitted - f.residuals[k]).abs() <= 1e-9 * scale.max(1e-300) * 10.0);
        }
        prop_assert_eq!(f.residuals[0], x[0]);
        prop_assert!((0.0..=4.0).contains(&f.dw));
    }

    #[test]
    fn normal_equations_hold((p, x) in arbitrary_series()) {
        let Ok(ols) = ols_theta(&x, p) else { return Ok(()); };
        let n = x.len() - 1;
        let phi = |k: usize, i: usize| if k >= i { x[k - i] } else { 0.0 };
        let s = DMatrix::from_fn(p, p, |i, j| (0..n).map(|k| phi(k, i) * phi(k, j)).sum::<f64>());
        let b = DVector::from_fn(p, |i, _| (1..=n).map(|k| phi(k - 1, i) * x[k]).sum::<f64>());
        let resid = &s * DVector::from_column_slice(&ols.theta_hat) - &b;
        prop_assert!(resid.amax() <= 1e-10 * b.amax().max(s.amax()) * 10.0);
    }

    #[test]
    fn dw_bounds(e in prop::collection::vec(-1e3f64..1e3, 2..50)) {
        if let Ok(d) = dw_statistic(&e) {
            prop_assert!((0.0..=4.0).contains(&d));
        }
        let zero_theta = residuals(&e, &[0.0]);
        prop_assert_eq!(zero_theta, e);
    }
}
