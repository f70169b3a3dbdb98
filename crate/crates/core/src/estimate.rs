//! Least-squares estimation from an observed series `X_0, ..., X_n`.
//!
//! Values before `X_0` are taken as zero, both for simulated and for real
//! data, which slightly biases small-sample fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, lu_solve, NeumaierSum};

/// `|θ̂_p|` at or below this is treated as zero.
pub const THETA_P_ZERO_TOL: f64 = 1e-12;
/// Design matrices with a larger condition estimate are rejected.
pub const DESIGN_CONDITION_LIMIT: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Ridge term `c` in `S_{n-1} + cI_p`. Zero means plain least squares.
    pub regularizer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub p: usize,
    pub n: usize,
    pub theta_hat: Vec<f64>,
    /// `ε̂_0, ..., ε̂_n` with `ε̂_0 = X_0`.
    pub residuals: Vec<f64>,
    pub rho_hat: f64,
    /// Bias-corrected variance estimate `(1 - ρ̂²/θ̂_p²)(1/n)Σε̂²`. Can be
    /// negative in small samples.
    pub sigma2_hat: f64,
    /// `(1/n)Σ_{k=0}^n ε̂_k²`, the residual variance used under `ρ = 0`.
    pub sigma2_null: f64,
    pub dw: f64,
    /// `S_{n-1} = Σ_{k=0}^{n-1} Φ_k Φ_k'` (plus ridge), the matrix inverted
    /// by the estimator.
    pub s_matrix: Vec<Vec<f64>>,
    /// `σ̂²_null · diag(S_{n-1}^{-1})`: least-squares variances of `θ̂`.
    pub var_theta_hat: Vec<f64>,
    /// `V̂_n(θ̂_1)`, first entry of `var_theta_hat`.
    pub var_theta1_hat: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn theta_p_hat(&self) -> f64 {
        self.theta_hat[self.p - 1]
    }
}

#[derive(Debug, Clone)]
pub struct OlsTheta {
    pub theta_hat: Vec<f64>,
    pub s_matrix: DMatrix<f64>,
    pub s_inverse: DMatrix<f64>,
}

fn lagged(x: &[f64], k: usize, lag: usize) -> f64 {
    if k >= lag {
        x[k - lag]
    } else {
        0.0
    }
}

fn check_length(x: &[f64], p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidInput("model order p must be at least 1".into()));
    }
    if x.len() < p + 2 {
        return Err(Error::SingularDesign(format!(
            "series of length {} is too short for p = {p} (need at least {})",
            x.len(),
            p + 2
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    Ok(())
}

/// `θ̂_n = S_{n-1}^{-1} Σ_{k=1}^n Φ_{k-1} X_k`.
pub fn ols_theta(x: &[f64], p: usize) -> Result<OlsTheta> {
    ols_theta_with(x, p, &FitOptions::default())
}

pub fn ols_theta_with(x: &[f64], p: usize, options: &FitOptions) -> Result<OlsTheta> {
    check_length(x, p)?;
    let n = x.len() - 1;
    let mut s = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            // Σ_{k=0}^{n-1} X_{k-i} X_{k-j}; terms with k < j vanish.
            let v = compensated_sum((j..n).map(|k| lagged(x, k, i) * x[k - j]));
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
        s[(i, i)] += options.regularizer;
    }
    let rhs = DVector::from_fn(p, |i, _| {
        compensated_sum((1..=n).map(|k| lagged(x, k - 1, i) * x[k]))
    });
    let solved = lu_solve(&s, &rhs)
        .ok_or_else(|| Error::SingularDesign("S_{n-1} is singular".into()))?;
    if !(solved.condition <= DESIGN_CONDITION_LIMIT) {
        return Err(Error::SingularDesign(format!(
            "S_{{n-1}} condition estimate {:e} exceeds {:e}",
            solved.condition, DESIGN_CONDITION_LIMIT
        )));
    }
    Ok(OlsTheta {
        theta_hat: solved.solution.iter().copied().collect(),
        s_matrix: s,
        s_inverse: solved.inverse,
    })
}

/// `ε̂_0 = X_0`, `ε̂_k = X_k - θ̂'Φ_{k-1}` for `k ≥ 1`.
pub fn residuals(x: &[f64], theta_hat: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    if x.is_empty() {
        return out;
    }
    out.push(x[0]);
    for k in 1..x.len() {
        let mut fitted = 0.0;
        for (i, th) in theta_hat.iter().enumerate() {
            fitted += th * lagged(x, k - 1, i);
        }
        out.push(x[k] - fitted);
    }
    out
}

/// `ρ̂_n = Σ_{k=1}^n ε̂_k ε̂_{k-1} / Σ_{k=1}^n ε̂_{k-1}²`.
pub fn ols_rho(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::DegenerateResiduals);
    }
    let den = compensated_sum(residuals[..residuals.len() - 1].iter().map(|e| e * e));
    if !(den > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let num = compensated_sum(residuals.windows(2).map(|w| w[1] * w[0]));
    Ok(num / den)
}

/// `σ̂²_n = (1 - ρ̂²/θ̂_p²) (1/n) Σ_{k=0}^n ε̂_k²`.
pub fn sigma2_hat(rho_hat: f64, theta_p_hat: f64, residuals: &[f64]) -> Result<f64> {
    if !(theta_p_hat.abs() > THETA_P_ZERO_TOL) {
        return Err(Error::NearZeroThetaP(theta_p_hat));
    }
    let n = residuals.len().saturating_sub(1).max(1) as f64;
    let ss = compensated_sum(residuals.iter().map(|e| e * e));
    let ratio = rho_hat / theta_p_hat;
    Ok((1.0 - ratio * ratio) * ss / n)
}

/// `D̂_n = Σ_{k=1}^n (ε̂_k - ε̂_{k-1})² / Σ_{k=0}^n ε̂_k²`, always in `[0, 4]`.
pub fn dw_statistic(residuals: &[f64]) -> Result<f64> {
    let den = compensated_sum(residuals.iter().map(|e| e * e));
    if !(den > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let num = compensated_sum(residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)));
    Ok(num / den)
}

/// Yule-Walker estimate from the Toeplitz sample autocovariances
/// `s^h = Σ_{k=h}^n X_k X_{k-h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YuleWalkerFit {
    pub theta: Vec<f64>,
    /// `(s^0 - Π'ϑ̂)/n`.
    pub sigma2: f64,
    /// `σ̂² [(S^p)^{-1}]_{11}`.
    pub var_theta1: f64,
}

impl YuleWalkerFit {
    /// `1 - n V̂(ϑ̂_1)`. Equals `ϑ̂_p²` exactly, up to rounding.
    pub fn h_radicand(&self, n: usize) -> f64 {
        1.0 - n as f64 * self.var_theta1
    }
}

pub fn yule_walker_fit(x: &[f64], p: usize) -> Result<YuleWalkerFit> {
    check_length(x, p)?;
    let n = x.len() - 1;
    let s: Vec<f64> = (0..=p)
        .map(|h| compensated_sum((h..=n).map(|k| x[k] * x[k - h])))
        .collect();
    let toeplitz = crate::linalg::toeplitz(&s, p);
    let pi = DVector::from_column_slice(&s[1..=p]);
    let solved = lu_solve(&toeplitz, &pi).ok_or(Error::SingularToeplitz)?;
    if !(solved.condition <= DESIGN_CONDITION_LIMIT) {
        return Err(Error::SingularToeplitz);
    }
    let theta = solved.solution;
    let sigma2 = (s[0] - pi.dot(&theta)) / n as f64;
    Ok(YuleWalkerFit {
        theta: theta.iter().copied().collect(),
        sigma2,
        var_theta1: sigma2 * solved.inverse[(0, 0)],
    })
}

pub fn fit(x: &[f64], p: usize) -> Result<FitResult> {
    fit_with(x, p, &FitOptions::default())
}

/// Full pipeline: `θ̂ → ε̂ → ρ̂ → σ̂² → D̂`.
pub fn fit_with(x: &[f64], p: usize, options: &FitOptions) -> Result<FitResult> {
    let ols = ols_theta_with(x, p, options)?;
    let n = x.len() - 1;
    let res = residuals(x, &ols.theta_hat);
    let rho_hat = ols_rho(&res)?;
    let theta_p_hat = ols.theta_hat[p - 1];
    let sigma2 = sigma2_hat(rho_hat, theta_p_hat, &res)?;
    let dw = dw_statistic(&res)?;

    let mut ss = NeumaierSum::new();
    for e in &res {
        ss.add(e * e);
    }
    let sigma2_null = ss.value() / n as f64;
    let var_theta_hat: Vec<f64> = (0..p).map(|i| sigma2_null * ols.s_inverse[(i, i)]).collect();

    let mut warnings = Vec::new();
    if sigma2 < 0.0 {
        warnings.push(format!("negative_sigma2_hat: {sigma2:e}"));
    }
    Ok(FitResult {
        p,
        n,
        theta_hat: ols.theta_hat,
        residuals: res,
        rho_hat,
        sigma2_hat: sigma2,
        sigma2_null,
        dw,
        s_matrix: crate::limits::matrix_rows(&ols.s_matrix),
        var_theta1_hat: var_theta_hat[0],
        var_theta_hat,
        warnings,
    })
}
