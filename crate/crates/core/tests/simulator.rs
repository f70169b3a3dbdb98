use durbin_ar::simulate::sample_autocovariance;
use durbin_ar::{limit_summary, simulate, ModelParams, NoiseFamily};

const FAMILIES: [NoiseFamily; 4] = [
    NoiseFamily::Gaussian,
    NoiseFamily::Uniform,
    NoiseFamily::StudentT { df: 6.0 },
    NoiseFamily::Rademacher,
];

#[test]
fn sample_variance_matches_lambda0() {
    let params = ModelParams::new(vec![0.5], 0.3, 1.0).unwrap();
    let lambda0 = limit_summary(&params).unwrap().lambda[0];
    let tr = simulate(&params, 1_000_000, NoiseFamily::Gaussian, 1, 0).unwrap();
    let var = sample_autocovariance(&tr.x, 0) / params.sigma2;
    assert!((var - lambda0).abs() / lambda0 < 0.01, "{var} vs {lambda0}");
}

#[test]
fn autocovariances_converge_for_every_family() {
    let params = ModelParams::new(vec![0.4, -0.3], 0.2, 2.5).unwrap();
    let lambda = limit_summary(&params).unwrap().lambda;
    for (i, family) in FAMILIES.into_iter().enumerate() {
        let tr = simulate(&params, 1_000_000, family, 10 + i as u64, 0).unwrap();
        for (d, l) in lambda.iter().enumerate() {
            let g = sample_autocovariance(&tr.x, d) / params.sigma2;
            assert!((g - l).abs() <= 0.02 * lambda[0], "{family:?} lag {d}: {g} vs {l}");
        }
    }
}

#[test]
fn innovations_have_requested_moments() {
    let params = ModelParams::new(vec![0.1], 0.0, 3.0).unwrap();
    for (i, family) in FAMILIES.into_iter().enumerate() {
        let tr = simulate(&params, 1_000_000, family, 20 + i as u64, 0).unwrap();
        let m = tr.v.len() as f64;
        let mean = tr.v.iter().sum::<f64>() / m;
        let var = tr.v.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        assert!(mean.abs() < 5.0 * (3.0 / m).sqrt(), "{family:?} mean {mean}");
        assert!((var - 3.0).abs() / 3.0 < 0.01, "{family:?} var {var}");
    }
}

#[test]
fn noise_recursion_holds_on_the_output() {
    let params = ModelParams::new(vec![0.2, -0.2, 0.4], -0.5, 1.0).unwrap();
    let tr = simulate(&params, 500, NoiseFamily::Uniform, 3, 25).unwrap();
    for k in 1..tr.eps.len() {
        let e = params.rho * tr.eps[k - 1] + tr.v[k];
        assert!((tr.eps[k] - e).abs() < 1e-12);
    }
}
