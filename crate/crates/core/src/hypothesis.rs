//! Tests of `H0: ρ = 0` against `H1: ρ ≠ 0` on the residuals of a fitted
//! AR(p) model. Everything is first-order: one lag, χ²₁ or N(0,1)
//! reference distributions, two-sided.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{chi2_sf, normal_quantile, normal_two_sided};
use crate::error::{Error, Result};
use crate::estimate::{yule_walker_fit, FitResult, THETA_P_ZERO_TOL};
use crate::linalg::{compensated_sum, lu_solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestName {
    /// `n(D̂ - 2)²/(4θ̂_p²)` against χ²₁.
    DwChi2,
    /// Durbin's h with the least-squares variance `σ̂² [S_{n-1}^{-1}]_{11}`.
    DurbinH,
    /// Durbin's h with the Yule-Walker variance.
    DurbinHYw,
    BoxPierce,
    LjungBox,
    BreuschGodfrey,
}

impl TestName {
    pub const ALL: [TestName; 6] = [
        TestName::DwChi2,
        TestName::DurbinH,
        TestName::DurbinHYw,
        TestName::BoxPierce,
        TestName::LjungBox,
        TestName::BreuschGodfrey,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TestName::DwChi2 => "dw_chi2",
            TestName::DurbinH => "durbin_h",
            TestName::DurbinHYw => "durbin_h_yw",
            TestName::BoxPierce => "box_pierce",
            TestName::LjungBox => "ljung_box",
            TestName::BreuschGodfrey => "breusch_godfrey",
        }
    }

    /// Parses `all` or a comma-separated list of names.
    pub fn parse_list(s: &str) -> Result<Vec<TestName>> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(TestName::ALL.to_vec());
        }
        s.split(',').map(|t| t.parse()).collect()
    }
}

impl fmt::Display for TestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        TestName::ALL
            .into_iter()
            .find(|n| n.as_str() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown test '{t}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: TestName,
    pub statistic: f64,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
    pub warnings: Vec<String>,
}

impl TestOutcome {
    fn new(name: TestName, statistic: f64, p_value: f64, level: f64, warnings: Vec<String>) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            name,
            statistic,
            p_value,
            level,
            reject: p_value < level,
            warnings,
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Chi-square procedure built on the Durbin-Watson statistic.
pub fn dw_chi2_test(fit: &FitResult, level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let theta_p = fit.theta_p_hat();
    if !(theta_p.abs() > THETA_P_ZERO_TOL) {
        return Err(Error::NearZeroThetaP(theta_p));
    }
    let n = fit.n as f64;
    let statistic = n * (fit.dw - 2.0).powi(2) / (4.0 * theta_p * theta_p);
    let mut warnings = Vec::new();
    // With θ*_p ≈ 0 the statistic has no power; flag an insignificant θ̂_p.
    let se = fit.var_theta_hat[fit.p - 1].sqrt();
    let z = normal_quantile(1.0 - 0.5 * level)?;
    if se.is_finite() && theta_p.abs() < z * se {
        warnings.push("near_zero_theta_p: θ̂_p is not significantly different from zero".into());
    }
    Ok(TestOutcome::new(
        TestName::DwChi2,
        statistic,
        chi2_sf(statistic)?,
        level,
        warnings,
    ))
}

fn h_outcome(name: TestName, rho_hat: f64, n: usize, var_theta1: f64, level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let radicand = 1.0 - n as f64 * var_theta1;
    if !(radicand > 0.0) {
        return Err(Error::InapplicableH { radicand });
    }
    let h = rho_hat * (n as f64 / radicand).sqrt();
    Ok(TestOutcome::new(name, h, normal_two_sided(h), level, Vec::new()))
}

/// Durbin's h: `ρ̂ √(n / (1 - n V̂(θ̂_1)))` as a standard normal deviate.
pub fn durbin_h_test(fit: &FitResult, level: f64) -> Result<TestOutcome> {
    h_outcome(TestName::DurbinH, fit.rho_hat, fit.n, fit.var_theta1_hat, level)
}

/// Durbin's h with `V̂(ϑ̂_1)` from the Yule-Walker fit of `x`.
pub fn durbin_h_yw_test(x: &[f64], fit: &FitResult, level: f64) -> Result<TestOutcome> {
    let yw = yule_walker_fit(x, fit.p)?;
    h_outcome(TestName::DurbinHYw, fit.rho_hat, fit.n, yw.var_theta1, level)
}

/// Lag-one sample autocorrelation of a mean-centred series, normalized by
/// the lag-zero sum (the divide-by-n convention).
pub fn lag1_autocorrelation(series: &[f64]) -> Result<f64> {
    let m = series.len();
    if m < 2 {
        return Err(Error::DegenerateResiduals);
    }
    let mean = compensated_sum(series.iter().copied()) / m as f64;
    let den = compensated_sum(series.iter().map(|e| (e - mean).powi(2)));
    if !(den > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let num = compensated_sum(series.windows(2).map(|w| (w[1] - mean) * (w[0] - mean)));
    Ok(num / den)
}

/// `Q = m r̂₁²` with `m` the number of residuals.
pub fn box_pierce_test(residuals: &[f64], level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let r1 = lag1_autocorrelation(residuals)?;
    let q = residuals.len() as f64 * r1 * r1;
    Ok(TestOutcome::new(TestName::BoxPierce, q, chi2_sf(q)?, level, Vec::new()))
}

/// `Q = m(m+2) r̂₁² / (m-1)`.
pub fn ljung_box_test(residuals: &[f64], level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let r1 = lag1_autocorrelation(residuals)?;
    let m = residuals.len() as f64;
    let q = m * (m + 2.0) * r1 * r1 / (m - 1.0);
    Ok(TestOutcome::new(TestName::LjungBox, q, chi2_sf(q)?, level, Vec::new()))
}

/// `n R²` of the regression of `y` on the columns of `design`, with the
/// uncentred `R² = 1 - SSR/Σy²` (the regressions here carry no intercept).
pub fn n_r_squared(y: &[f64], design: &DMatrix<f64>) -> Result<f64> {
    let n = y.len();
    assert_eq!(design.nrows(), n, "design rows must match observations");
    let yv = DVector::from_column_slice(y);
    let tss = compensated_sum(y.iter().map(|v| v * v));
    if !(tss > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let xtx = design.transpose() * design;
    let xty = design.transpose() * &yv;
    let solved = lu_solve(&xtx, &xty).ok_or(Error::SingularAuxiliaryRegression)?;
    if !(solved.condition <= 1e13) {
        return Err(Error::SingularAuxiliaryRegression);
    }
    let fitted = design * &solved.solution;
    let ssr = compensated_sum(yv.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)));
    let r2 = (1.0 - ssr / tss).max(0.0);
    Ok(n as f64 * r2)
}

/// Breusch-Godfrey LM test of order one: regress `ε̂_k` on
/// `(X_{k-1}, ..., X_{k-p}, ε̂_{k-1})` for `k = 1..n` (zero pre-sample)
/// and refer `n R²` to χ²₁.
pub fn breusch_godfrey_test(x: &[f64], fit: &FitResult, level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let n = fit.n;
    let p = fit.p;
    if x.len() != n + 1 || fit.residuals.len() != n + 1 {
        return Err(Error::InvalidInput("series and fit lengths disagree".into()));
    }
    let e = &fit.residuals;
    let design = DMatrix::from_fn(n, p + 1, |row, col| {
        let k = row + 1;
        if col < p {
            (k - 1).checked_sub(col).map_or(0.0, |i| x[i])
        } else {
            e[k - 1]
        }
    });
    let stat = n_r_squared(&e[1..], &design)?;
    Ok(TestOutcome::new(TestName::BreuschGodfrey, stat, chi2_sf(stat)?, level, Vec::new()))
}

/// Runs the requested tests on a fitted series, one result per test.
pub fn run_tests(
    x: &[f64],
    fit: &FitResult,
    level: f64,
    tests: &[TestName],
) -> Vec<(TestName, Result<TestOutcome>)> {
    tests
        .iter()
        .map(|&t| {
            let out = match t {
                TestName::DwChi2 => dw_chi2_test(fit, level),
                TestName::DurbinH => durbin_h_test(fit, level),
                TestName::DurbinHYw => durbin_h_yw_test(x, fit, level),
                TestName::BoxPierce => box_pierce_test(&fit.residuals, level),
                TestName::LjungBox => ljung_box_test(&fit.residuals, level),
                TestName::BreuschGodfrey => breusch_godfrey_test(x, fit, level),
            };
            (t, out)
        })
        .collect()
}
