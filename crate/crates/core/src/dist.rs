//! Reference distributions for p-values and critical values: the standard
//! normal and the chi-square with one degree of freedom.

use crate::error::{Error, Result};

/// `P(Z > x)` for a standard normal `Z`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    normal_sf(-x)
}

/// Two-sided p-value `2 P(Z > |x|)`, clamped into `[0, 1]`.
pub fn normal_two_sided(x: f64) -> f64 {
    (2.0 * normal_sf(x.abs())).clamp(0.0, 1.0)
}

/// Survival function of χ²₁: `P(χ² > x) = erfc(√(x/2))`.
pub fn chi2_sf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::DomainError(format!("chi2_sf needs x >= 0, got {x}")));
    }
    Ok(libm::erfc((0.5 * x).sqrt()))
}

/// `q`-quantile of the standard normal, `0 < q < 1`.
///
/// Newton iterations on the CDF, safeguarded by bisection, to an absolute
/// tolerance of 1e-12 on `x`.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(format!("normal_quantile needs 0 < q < 1, got {q}")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    // Upper tail is inverted on the survival function to keep precision.
    let target_sf = 1.0 - q;
    let mut x = 0.0;
    for _ in 0..200 {
        let f = if q > 0.5 {
            target_sf - normal_sf(x)
        } else {
            normal_cdf(x) - q
        };
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut next = x - f / density;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-12 {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `q`-quantile of χ²₁, i.e. `z` with `P(χ² ≤ z) = q`.
pub fn chi2_quantile(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::DomainError(format!("chi2_quantile needs 0 <= q < 1, got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let z = normal_quantile(0.5 + 0.5 * q)?;
    Ok(z * z)
}
