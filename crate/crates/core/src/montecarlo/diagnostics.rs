use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{map_indexed, Schedule};
use crate::error::{Error, Result};
use crate::estimate::fit;
use crate::limits::{limit_summary, matrix_rows};
use crate::linalg::NeumaierSum;
use crate::params::ModelParams;
use crate::rng::replication_seed;
use crate::simulate::{simulate, NoiseFamily};

/// Empirical check of the joint asymptotic normality of `(θ̂, ρ̂)` and of `D̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub params: ModelParams,
    pub n: usize,
    pub reps: usize,
    /// Replications whose fit failed; they are excluded.
    pub failed_reps: usize,
    pub gamma_singular: bool,
    /// Sample mean of `√n(θ̂ - θ*, ρ̂ - ρ*)`.
    pub mean_scaled_error: Vec<f64>,
    /// Sample covariance of `√n(θ̂ - θ*, ρ̂ - ρ*)`.
    pub empirical_cov: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    /// `‖Ĉ - Γ‖_F / ‖Γ‖_F`; absent when `Γ` is singular.
    pub frobenius_rel_error: Option<f64>,
    pub var_rho_empirical: f64,
    pub sigma2_rho: f64,
    pub var_dw_empirical: f64,
    pub sigma2_d: f64,
    pub var_dw_rel_error: f64,
    pub warnings: Vec<String>,
}

fn sample_mean_cov(rows: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let m = rows.len() as f64;
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (acc, v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let mut cov = DMatrix::zeros(d, d);
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    cov /= m - 1.0;
    (mean, cov)
}

/// Runs `reps` replications of length `n` and compares the empirical
/// covariance of the scaled errors with `Γ` and `σ²_D`. Replication `r` uses
/// `replication_seed(seed, 0, n, r)`.
pub fn clt_diagnostic(
    params: &ModelParams,
    n: usize,
    reps: usize,
    noise: NoiseFamily,
    seed: u64,
    burn_in: usize,
) -> Result<CltReport> {
    if reps < 2 {
        return Err(Error::InvalidInput("need at least 2 replications".into()));
    }
    let limits = limit_summary(params)?;
    let p = params.p();
    let sqrt_n = (n as f64).sqrt();

    let draws: Vec<Option<(Vec<f64>, f64)>> = map_indexed(reps, Schedule::Parallel, |rep| {
        let tr = simulate(params, n, noise, replication_seed(seed, 0, n, rep), burn_in).ok()?;
        let f = fit(&tr.x, p).ok()?;
        let mut z: Vec<f64> = f
            .theta_hat
            .iter()
            .zip(&limits.theta_star)
            .map(|(a, b)| sqrt_n * (a - b))
            .collect();
        z.push(sqrt_n * (f.rho_hat - limits.rho_star));
        Some((z, sqrt_n * (f.dw - limits.d_star)))
    });
    let ok: Vec<(Vec<f64>, f64)> = draws.into_iter().flatten().collect();
    let failed_reps = reps - ok.len();
    if ok.len() < 2 {
        return Err(Error::DegenerateResiduals);
    }
    let joint: Vec<Vec<f64>> = ok.iter().map(|(z, _)| z.clone()).collect();
    let dws: Vec<Vec<f64>> = ok.iter().map(|(_, d)| vec![*d]).collect();
    let (mean, cov) = sample_mean_cov(&joint);
    let (_, var_dw) = sample_mean_cov(&dws);
    let var_dw = var_dw[(0, 0)];

    let mut warnings = Vec::new();
    let frobenius_rel_error = if limits.gamma_singular {
        warnings.push("gamma_singular: joint covariance check skipped".to_string());
        None
    } else {
        Some((&cov - &limits.gamma).norm() / limits.gamma.norm())
    };
    if failed_reps > 0 {
        warnings.push(format!("{failed_reps} replications failed to fit"));
    }
    Ok(CltReport {
        params: params.clone(),
        n,
        reps,
        failed_reps,
        gamma_singular: limits.gamma_singular,
        mean_scaled_error: mean,
        empirical_cov: matrix_rows(&cov),
        gamma: matrix_rows(&limits.gamma),
        frobenius_rel_error,
        var_rho_empirical: cov[(p, p)],
        sigma2_rho: limits.sigma2_rho,
        var_dw_empirical: var_dw,
        sigma2_d: limits.sigma2_d,
        var_dw_rel_error: (var_dw - limits.sigma2_d).abs() / limits.sigma2_d,
        warnings,
    })
}

/// A `p = 2` model whose `θ*_2` vanishes, so `Γ` is singular:
/// `θ_2 = θ_1ρ / (1 - θ_1ρ - ρ²)`.
pub fn degenerate_theta_p(theta1: f64, rho: f64) -> Result<ModelParams> {
    let den = 1.0 - theta1 * rho - rho * rho;
    if den == 0.0 {
        return Err(Error::DomainError("no degenerate θ_2 for these values".into()));
    }
    ModelParams::new(vec![theta1, theta1 * rho / den], rho, 1.0)
}

/// Strong-rate quantities at one checkpoint `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckpoint {
    pub n: usize,
    pub theta_hat: Vec<f64>,
    pub rho_hat: f64,
    pub dw: f64,
    /// `(1/log n) Σ_k (θ̂_k - θ*)(θ̂_k - θ*)'`.
    pub qsl_theta: Vec<Vec<f64>>,
    /// `‖qsl_theta - Σ_θ‖_F / ‖Σ_θ‖_F`.
    pub qsl_theta_rel_error: f64,
    /// `(1/log n) Σ_k (ρ̂_k - ρ*)²`, to compare with `σ²_ρ`.
    pub qsl_rho: f64,
    /// `(1/log n) Σ_k (D̂_k - D*)²`, to compare with `σ²_D`.
    pub qsl_dw: f64,
    /// `n/(2 log log n) ‖θ̂_n - θ*‖²`.
    pub lil_theta: f64,
    /// `lil_theta / tr Σ_θ`; bounded by 1 in the limit superior.
    pub lil_theta_ratio: f64,
    /// `n/(2 log log n) (ρ̂_n - ρ*)²`.
    pub lil_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub params: ModelParams,
    pub seed: u64,
    pub n_max: usize,
    pub sigma_theta: Vec<Vec<f64>>,
    pub trace_sigma_theta: f64,
    pub sigma2_rho: f64,
    pub sigma2_d: f64,
    pub checkpoints: Vec<RateCheckpoint>,
}

/// Follows the recursive estimators `θ̂_k, ρ̂_k, D̂_k` along one trajectory
/// of length `max(checkpoints)`.
///
/// Everything is driven by the running Gram matrix `G_k = Σ_{j=1}^k Z_j Z_j'`
/// of `Z_j = (X_j, ..., X_{j-p-1})`: with `c = (1, -θ̂, 0)` and
/// `d = (0, 1, -θ̂)` one has `ε̂_j = c'Z_j` and `ε̂_{j-1} = d'Z_j`, so each
/// step costs `O(p²)` instead of a pass over the residuals.
pub fn rate_diagnostic(
    params: &ModelParams,
    checkpoints: &[usize],
    noise: NoiseFamily,
    seed: u64,
) -> Result<RateReport> {
    let limits = limit_summary(params)?;
    let p = params.p();
    let mut checkpoints = checkpoints.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let n_max = *checkpoints
        .last()
        .ok_or_else(|| Error::InvalidInput("no checkpoints".into()))?;
    if checkpoints[0] < 16.max(p + 2) {
        return Err(Error::InvalidInput(
            "checkpoints must be at least 16 so that log log n > 0".into(),
        ));
    }
    let tr = simulate(params, n_max, noise, seed, 0)?;
    let x = &tr.x;
    let q = p + 2;
    let theta_star = DVector::from_column_slice(&limits.theta_star);
    let trace = limits.sigma_theta.trace();

    let mut gram = vec![NeumaierSum::new(); q * q];
    let mut z = vec![0.0; q];
    let mut acc_theta = DMatrix::<f64>::zeros(p, p);
    let mut acc_rho = 0.0;
    let mut acc_dw = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let x0_sq = x[0] * x[0];

    let mut g = DMatrix::<f64>::zeros(q, q);
    for k in 1..=n_max {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = if k >= i { x[k - i] } else { 0.0 };
        }
        for i in 0..q {
            for j in i..q {
                gram[i * q + j].add(z[i] * z[j]);
            }
        }
        if k < p + 1 {
            continue;
        }
        for i in 0..q {
            for j in i..q {
                let v = gram[i * q + j].value();
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let s = g.view((1, 1), (p, p)).into_owned();
        let b = g.view((1, 0), (p, 1)).column(0).into_owned();
        let Some(chol) = s.cholesky() else {
            continue;
        };
        let theta_hat = chol.solve(&b);

        let mut c = DVector::<f64>::zeros(q);
        let mut d = DVector::<f64>::zeros(q);
        c[0] = 1.0;
        d[1] = 1.0;
        for i in 0..p {
            c[i + 1] = -theta_hat[i];
            d[i + 2] = -theta_hat[i];
        }
        let gd = &g * &d;
        let gc = &g * &c;
        let den_rho = d.dot(&gd);
        let ss = x0_sq + c.dot(&gc);
        let diff = &c - &d;
        let rho_hat = c.dot(&gd) / den_rho;
        let dw = diff.dot(&(&g * &diff)) / ss;

        let err = &theta_hat - &theta_star;
        acc_theta += &err * err.transpose();
        acc_rho += (rho_hat - limits.rho_star).powi(2);
        acc_dw += (dw - limits.d_star).powi(2);

        if next < checkpoints.len() && k == checkpoints[next] {
            next += 1;
            let nf = k as f64;
            let log_n = nf.ln();
            let lil_scale = nf / (2.0 * log_n.ln());
            let qsl = &acc_theta / log_n;
            let lil_theta = lil_scale * err.norm_squared();
            out.push(RateCheckpoint {
                n: k,
                theta_hat: theta_hat.iter().copied().collect(),
                rho_hat,
                dw,
                qsl_theta_rel_error: (&qsl - &limits.sigma_theta).norm()
                    / limits.sigma_theta.norm(),
                qsl_theta: matrix_rows(&qsl),
                qsl_rho: acc_rho / log_n,
                qsl_dw: acc_dw / log_n,
                lil_theta,
                lil_theta_ratio: lil_theta / trace,
                lil_rho: lil_scale * (rho_hat - limits.rho_star).powi(2),
            });
        }
    }
    Ok(RateReport {
        params: params.clone(),
        seed,
        n_max,
        sigma_theta: matrix_rows(&limits.sigma_theta),
        trace_sigma_theta: trace,
        sigma2_rho: limits.sigma2_rho,
        sigma2_d: limits.sigma2_d,
        checkpoints: out,
    })
}
