//! Closed-form limiting objects of the least-squares machinery.
//!
//! Everything here is a pure function of `(θ, ρ)`: the normalized
//! autocovariances `λ_d = γ_X(d)/σ²` do not depend on `σ²`, and neither do
//! the asymptotic covariances of the self-normalized estimators.
//!
//! The autocovariances are obtained by solving the `(p+2)`-dimensional
//! Yule-Walker system `BΛ = e` of the combined AR(p+1) recursion
//!
//! ```text
//! X_n = β'Φ_{n-1} - θ_p ρ X_{n-p-1} + V_n,
//! β = (θ_1 + ρ, θ_2 - θ_1 ρ, ..., θ_p - θ_{p-1} ρ)'.
//! ```
//!
//! [`lyapunov_lambda_oracle`] computes the same quantities independently
//! from the stationary covariance of the companion-form state vector.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, exchange, lu_solve, min_symmetric_eigenvalue, spectral_radius};
use crate::params::ModelParams;

/// `|θ*_p|` below this marks the joint covariance `Γ` as singular.
pub const GAMMA_SINGULAR_TOL: f64 = 1e-8;
/// Condition estimate above which `B` is reported as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

const LYAPUNOV_TOL: f64 = 1e-14;
const LYAPUNOV_MAX_ITER: usize = 1_000_000;

/// `β = (θ_1 + ρ, θ_2 - θ_1ρ, ..., θ_p - θ_{p-1}ρ)`.
pub fn beta_vector(params: &ModelParams) -> Vec<f64> {
    let theta = &params.theta;
    let rho = params.rho;
    (0..theta.len())
        .map(|k| {
            if k == 0 {
                theta[0] + rho
            } else {
                theta[k] - theta[k - 1] * rho
            }
        })
        .collect()
}

/// `α = 1 / ((1 - θ_pρ)(1 + θ_pρ))`.
pub fn alpha_scalar(params: &ModelParams) -> f64 {
    let c = params.theta_p() * params.rho;
    1.0 / ((1.0 - c) * (1.0 + c))
}

/// Coefficients `(β_1, ..., β_p, -θ_pρ)` of the AR(p+1) form of the model.
pub fn combined_ar_coefficients(params: &ModelParams) -> Vec<f64> {
    let mut a = beta_vector(params);
    a.push(-params.theta_p() * params.rho);
    a
}

/// The matrix `B` of order `p+2`.
///
/// Row `d` (for `d = 0..=p+1`) is the Yule-Walker relation
/// `λ_d - Σ_k a_k λ_{|d-k|} = δ_d` with `a` the combined AR(p+1)
/// coefficients, written as coefficients of `(λ_0, ..., λ_{p+1})`.
/// Invertibility is checked by [`solve_lambda`].
pub fn build_b(params: &ModelParams) -> DMatrix<f64> {
    let a = combined_ar_coefficients(params);
    let m = params.p() + 2;
    let mut b = DMatrix::<f64>::identity(m, m);
    for d in 0..m {
        for (k, &ak) in a.iter().enumerate() {
            b[(d, d.abs_diff(k + 1))] -= ak;
        }
    }
    b
}

#[derive(Debug, Clone)]
pub struct LambdaSolution {
    /// `(λ_0, ..., λ_{p+1})`.
    pub lambda: Vec<f64>,
    /// 1-norm condition estimate of `B`.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Solves `BΛ = e` by LU with partial pivoting.
pub fn solve_lambda(b: &DMatrix<f64>) -> Result<LambdaSolution> {
    let m = b.nrows();
    let mut e = DVector::zeros(m);
    e[0] = 1.0;
    let solved = lu_solve(b, &e).ok_or(Error::SingularB {
        condition: f64::INFINITY,
    })?;
    let lambda = solved.solution;
    let residual = linalg::norm_inf(&(b * &lambda - &e));
    if !(residual <= 1e-10 * linalg::norm_inf(&lambda).max(1.0)) {
        return Err(Error::SingularB {
            condition: solved.condition,
        });
    }
    Ok(LambdaSolution {
        lambda: lambda.iter().copied().collect(),
        condition: solved.condition,
        ill_conditioned: solved.condition > ILL_CONDITIONED,
    })
}

/// Toeplitz matrix `(λ_{|i-j|})` of order `m`, verified positive definite.
pub fn toeplitz_delta(lambda: &[f64], m: usize) -> Result<DMatrix<f64>> {
    if m == 0 || lambda.len() < m {
        return Err(Error::InvalidInput(format!(
            "toeplitz order {m} needs at least {m} autocovariances, got {}",
            lambda.len()
        )));
    }
    let delta = linalg::toeplitz(lambda, m);
    let min_eigenvalue = min_symmetric_eigenvalue(&delta);
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(delta)
}

/// Companion matrix `C_A` of order `p+1` of the combined AR(p+1) recursion.
pub fn companion_matrix(params: &ModelParams) -> DMatrix<f64> {
    companion_from(&combined_ar_coefficients(params), params.p() + 1)
}

fn companion_from(coefficients: &[f64], order: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(order, order);
    for (j, &a) in coefficients.iter().enumerate().take(order) {
        c[(0, j)] = a;
    }
    for i in 1..order {
        c[(i, i - 1)] = 1.0;
    }
    c
}

/// Independent oracle for `(λ_0, ..., λ_{max_lag})`.
///
/// Iterates `Σ ← CΣC' + σ²ee'` on the companion form of the combined
/// recursion, with the state padded to `p+2` lags so that `λ_0..λ_{p+1}`
/// come straight out of the stationary covariance. Further lags use the
/// recursion `λ_d = Σ_k a_k λ_{d-k}`. The result is normalized by `σ²`.
pub fn lyapunov_lambda_oracle(params: &ModelParams, max_lag: usize) -> Result<Vec<f64>> {
    params.check_stability()?;
    let p = params.p();
    if max_lag < p + 1 {
        return Err(Error::InvalidInput(format!(
            "max_lag must be at least p+1 = {}",
            p + 1
        )));
    }
    let a = combined_ar_coefficients(params);
    let order = p + 2;
    let c = companion_from(&a, order);
    let ct = c.transpose();
    let mut sigma = DMatrix::<f64>::zeros(order, order);
    let mut converged = false;
    for _ in 0..LYAPUNOV_MAX_ITER {
        let mut next = &c * &sigma * &ct;
        next[(0, 0)] += params.sigma2;
        let change = linalg::matrix_norm_inf_entries(&(&next - &sigma));
        let scale = linalg::matrix_norm_inf_entries(&next).max(params.sigma2);
        sigma = next;
        if change < LYAPUNOV_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: LYAPUNOV_MAX_ITER,
        });
    }
    let mut lambda: Vec<f64> = (0..order).map(|d| sigma[(0, d)] / params.sigma2).collect();
    for d in order..=max_lag {
        let next = a
            .iter()
            .enumerate()
            .map(|(k, ak)| ak * lambda[d - k - 1])
            .sum();
        lambda.push(next);
    }
    lambda.truncate(max_lag + 1);
    Ok(lambda)
}

/// Every closed-form limit object for a given parameter set.
#[derive(Debug, Clone)]
pub struct LimitSummary {
    pub params: ModelParams,
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub b: DMatrix<f64>,
    pub b_condition: f64,
    /// `(λ_0, ..., λ_{p+1})`.
    pub lambda: Vec<f64>,
    pub delta_p: DMatrix<f64>,
    pub delta_p1: DMatrix<f64>,
    pub theta_star: Vec<f64>,
    pub rho_star: f64,
    pub d_star: f64,
    pub sigma_theta: DMatrix<f64>,
    pub p_matrix: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    /// `Γ_{p+1,p+1}`.
    pub sigma2_rho: f64,
    /// The same variance from the explicit quadratic-form expression.
    pub sigma2_rho_explicit: f64,
    pub sigma2_d: f64,
    pub companion: DMatrix<f64>,
    pub companion_spectral_radius: f64,
    pub gamma_singular: bool,
    pub warnings: Vec<String>,
}

/// Builds the full [`LimitSummary`].
pub fn limit_summary(params: &ModelParams) -> Result<LimitSummary> {
    params.check_stability()?;
    let p = params.p();
    let c = params.theta_p() * params.rho;
    let alpha = alpha_scalar(params);
    let beta = beta_vector(params);
    let beta_v = DVector::from_column_slice(&beta);

    let b = build_b(params);
    let solved = solve_lambda(&b)?;
    let lambda = solved.lambda;
    let mut warnings = Vec::new();
    if solved.ill_conditioned {
        warnings.push(format!(
            "ill_conditioned_b: condition estimate {:e}",
            solved.condition
        ));
    }

    let delta_p = toeplitz_delta(&lambda, p)?;
    let delta_p1 = toeplitz_delta(&lambda, p + 1)?;
    let delta_inv = delta_p
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: min_symmetric_eigenvalue(&delta_p),
        })?
        .inverse();

    let j = exchange(p);
    let k_p = DMatrix::<f64>::identity(p, p) - c * &j;
    let theta_star_v = alpha * &k_p * &beta_v;
    let theta_star_p = theta_star_v[p - 1];
    let rho_star = c * theta_star_p;
    let d_star = 2.0 * (1.0 - rho_star);

    let sigma_theta = alpha * alpha * &k_p * &delta_inv * &k_p;
    let sigma_theta = symmetrize(&sigma_theta);

    let mut e_p = DVector::zeros(p);
    e_p[0] = 1.0;
    let p_b = alpha * &k_p * &delta_inv;
    let p_l = &j * &k_p * (alpha * c * (&delta_inv * &e_p) + theta_star_p * &beta_v);
    let phi = -theta_star_p / alpha;
    let mut p_matrix = DMatrix::zeros(p + 1, p + 1);
    p_matrix.view_mut((0, 0), (p, p)).copy_from(&p_b);
    for i in 0..p {
        p_matrix[(p, i)] = p_l[i];
    }
    p_matrix[(p, p)] = phi;

    let gamma = symmetrize(&(&p_matrix * &delta_p1 * p_matrix.transpose()));
    let sigma2_rho = gamma[(p, p)];

    let lambda1 = DVector::from_iterator(p, lambda[1..=p].iter().copied());
    let scaled = theta_star_p / alpha;
    let sigma2_rho_explicit = (p_l.transpose() * &delta_p * &p_l)[(0, 0)]
        - 2.0 * scaled * (lambda1.transpose() * &j * &p_l)[(0, 0)]
        + scaled * scaled * lambda[0];

    let companion = companion_matrix(params);
    let companion_spectral_radius = spectral_radius(&companion);

    let gamma_singular = theta_star_p.abs() < GAMMA_SINGULAR_TOL;
    if gamma_singular {
        warnings.push("gamma_singular: θ*_p ≈ 0, joint covariance Γ is degenerate".into());
    }

    Ok(LimitSummary {
        params: params.clone(),
        alpha,
        beta,
        b,
        b_condition: solved.condition,
        lambda,
        delta_p,
        delta_p1,
        theta_star: theta_star_v.iter().copied().collect(),
        rho_star,
        d_star,
        sigma_theta,
        p_matrix,
        gamma,
        sigma2_rho,
        sigma2_rho_explicit,
        sigma2_d: 4.0 * sigma2_rho,
        companion,
        companion_spectral_radius,
        gamma_singular,
        warnings,
    })
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl LimitSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.params.p(),
            "theta": self.params.theta,
            "rho": self.params.rho,
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lambda,
            "theta_star": self.theta_star,
            "rho_star": self.rho_star,
            "d_star": self.d_star,
            "sigma_theta": matrix_rows(&self.sigma_theta),
            "gamma": matrix_rows(&self.gamma),
            "sigma2_rho": self.sigma2_rho,
            "sigma2_d": self.sigma2_d,
            "b_condition": self.b_condition,
            "companion_spectral_radius": self.companion_spectral_radius,
            "gamma_singular": self.gamma_singular,
            "warnings": self.warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(theta: &[f64], rho: f64) -> ModelParams {
        ModelParams::new(theta.to_vec(), rho, 1.0).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_vector(&params(&[0.7], -0.2)), vec![0.7 + -0.2]);
        assert_eq!(beta_vector(&params(&[0.3, -0.2, 0.1], 0.0)), vec![0.3, -0.2, 0.1]);
        let b = beta_vector(&params(&[0.4, -0.3], 0.2));
        assert_relative_eq!(b[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(b[1], -0.38, epsilon = 1e-15);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_scalar(&params(&[0.5], 0.0)), 1.0);
        assert_relative_eq!(alpha_scalar(&params(&[0.5], 0.3)), 1.0 / 0.9775, epsilon = 1e-15);
        assert_relative_eq!(alpha_scalar(&params(&[0.5], 0.3)), 1.0230179028132993, epsilon = 1e-14);
        assert_relative_eq!(alpha_scalar(&params(&[0.4, -0.3], 0.2)), 1.0036130068245686, epsilon = 1e-14);
    }

    #[test]
    fn b_for_p1_matches_hand_instantiation() {
        let (t, r) = (0.5, 0.3);
        let b = build_b(&params(&[t], r));
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            1.0,        -(t + r),   t * r,
            -(t + r),   1.0 + t * r, 0.0,
            t * r,      -(t + r),   1.0,
        ]);
        assert_relative_eq!(b, expected, epsilon = 1e-15);
    }

    #[test]
    fn ar1_lambda_closed_form() {
        let s = solve_lambda(&build_b(&params(&[0.5], 0.0))).unwrap();
        assert_relative_eq!(s.lambda[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.lambda[1], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.lambda[2], 1.0 / 3.0, epsilon = 1e-14);
        assert!(!s.ill_conditioned);
    }

    #[test]
    fn residual_of_b_lambda() {
        let b = build_b(&params(&[0.4, -0.3], 0.2));
        let s = solve_lambda(&b).unwrap();
        let l = DVector::from_vec(s.lambda.clone());
        let r = &b * &l;
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-13);
        for i in 1..4 {
            assert!(r[i].abs() < 1e-13);
        }
    }

    #[test]
    fn singular_b_is_reported() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(solve_lambda(&b), Err(Error::SingularB { .. })));
    }

    #[test]
    fn toeplitz_examples() {
        let d = toeplitz_delta(&[2.5, 1.0], 1).unwrap();
        assert_eq!(d[(0, 0)], 2.5);
        let d = toeplitz_delta(&[4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0], 2).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]));
        assert!(matches!(
            toeplitz_delta(&[1.0, 2.0], 2),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(toeplitz_delta(&[1.0], 2).is_err());
    }

    #[test]
    fn companion_ar1_no_noise_correlation() {
        let c = companion_matrix(&params(&[0.5], 0.0));
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 1.0, 0.0]));
        assert_relative_eq!(spectral_radius(&c), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn companion_p1_eigenvalues_are_rho_and_theta() {
        for &(t, r) in &[(0.5, 0.3), (-0.7, 0.2), (0.3, -0.8)] {
            let c = companion_matrix(&params(&[t], r));
            let mut eig: Vec<f64> = c.complex_eigenvalues().iter().map(|z| z.re).collect();
            eig.sort_by(f64::total_cmp);
            let mut expected = [t, r];
            expected.sort_by(f64::total_cmp);
            assert_relative_eq!(eig[0], expected[0], epsilon = 1e-12);
            assert_relative_eq!(eig[1], expected[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn companion_p2_spectral_radius_below_one() {
        let c = companion_matrix(&params(&[0.4, -0.3], 0.2));
        assert_eq!(c.shape(), (3, 3));
        let r = spectral_radius(&c);
        assert!(r < 1.0);
        let reference = c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_relative_eq!(r, reference, epsilon = 1e-10);
    }

    #[test]
    fn oracle_ar1_and_scaling() {
        let l = lyapunov_lambda_oracle(&params(&[0.5], 0.0), 4).unwrap();
        for (d, v) in l.iter().enumerate() {
            assert_relative_eq!(*v, (4.0 / 3.0) * 0.5f64.powi(d as i32), epsilon = 1e-13);
        }
        let scaled = ModelParams::new(vec![0.5], 0.0, 7.5).unwrap();
        let l2 = lyapunov_lambda_oracle(&scaled, 4).unwrap();
        for (a, b) in l.iter().zip(&l2) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        assert!(lyapunov_lambda_oracle(&params(&[0.5], 0.0), 1).is_err());
    }

    #[test]
    fn oracle_matches_solve_p2() {
        let pr = params(&[0.4, -0.3], 0.2);
        let oracle = lyapunov_lambda_oracle(&pr, 3).unwrap();
        let solved = solve_lambda(&build_b(&pr)).unwrap().lambda;
        for (a, b) in oracle.iter().zip(&solved) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn p1_closed_forms() {
        let (t, r) = (0.5, 0.3);
        let s = limit_summary(&params(&[t], r)).unwrap();
        let tr = t * r;
        assert_relative_eq!(s.theta_star[0], (t + r) / (1.0 + tr), epsilon = 1e-12);
        assert_relative_eq!(s.theta_star[0], 0.6956521739130435, epsilon = 1e-12);
        assert_relative_eq!(
            s.sigma_theta[(0, 0)],
            (1.0 - t * t) * (1.0 - tr) * (1.0 - r * r) / (1.0 + tr).powi(3),
            epsilon = 1e-12
        );
        let s2 = (1.0 - tr) / (1.0 + tr).powi(3)
            * ((t + r).powi(2) * (1.0 + tr).powi(2) + tr * tr * (1.0 - t * t) * (1.0 - r * r));
        assert_relative_eq!(s.sigma2_rho, s2, epsilon = 1e-12);
        assert_relative_eq!(s.rho_star, tr * s.theta_star[0], epsilon = 1e-15);
    }

    #[test]
    fn rho_zero_reductions() {
        let pr = params(&[0.3, -0.2, 0.25], 0.0);
        let s = limit_summary(&pr).unwrap();
        assert_eq!(s.theta_star, pr.theta);
        assert_eq!(s.rho_star, 0.0);
        assert_eq!(s.d_star, 2.0);
        let inv = s.delta_p.clone().try_inverse().unwrap();
        assert_relative_eq!(s.sigma_theta, inv, epsilon = 1e-12);
        assert_relative_eq!(s.sigma2_rho, 0.25 * 0.25, epsilon = 1e-12);
    }

    #[test]
    fn summary_internal_consistency() {
        let s = limit_summary(&params(&[0.4, -0.3], 0.2)).unwrap();
        assert_relative_eq!(s.sigma2_d, 4.0 * s.sigma2_rho);
        assert_relative_eq!(s.d_star, 2.0 * (1.0 - s.rho_star));
        assert_relative_eq!(s.sigma2_rho, s.sigma2_rho_explicit, max_relative = 1e-9);
        assert!(s.companion_spectral_radius < 1.0);
        assert!(!s.gamma_singular);
        assert_eq!(s.delta_p1.view((0, 0), (2, 2)), s.delta_p);
    }

    #[test]
    fn gamma_singular_flag() {
        // θ*_p = 0 for p = 1 iff θ = -ρ.
        let s = limit_summary(&params(&[0.4], -0.4)).unwrap();
        assert!(s.gamma_singular);
        assert!(s.gamma.determinant().abs() < 1e-12);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn json_has_expected_keys() {
        let v = limit_summary(&params(&[0.5], 0.3)).unwrap().to_json();
        for key in ["theta_star", "rho_star", "d_star", "sigma_theta", "sigma2_rho", "sigma2_d", "lambda"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
