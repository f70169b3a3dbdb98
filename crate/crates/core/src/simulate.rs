//! Trajectories of the AR(p) model driven by AR(1) noise.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{rng_from_seed, Rng};

/// Innovation distribution. Every family is centred and rescaled to the
/// requested variance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// Uniform on `[-a, a]` with `a = √(3σ²)`.
    Uniform,
    /// Student t with `df > 4` degrees of freedom (finite fourth moment).
    StudentT { df: f64 },
    /// `±√σ²` with probability 1/2 each.
    Rademacher,
}


impl std::str::FromStr for NoiseFamily {
    type Err = Error;

    /// Accepts `gaussian`, `uniform`, `rademacher` and `student-t:<df>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "gaussian" | "normal" => Ok(NoiseFamily::Gaussian),
            "uniform" => Ok(NoiseFamily::Uniform),
            "rademacher" => Ok(NoiseFamily::Rademacher),
            other => {
                let df = other
                    .strip_prefix("student-t:")
                    .or_else(|| other.strip_prefix("student_t:"))
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown noise family '{s}'")))?;
                Ok(NoiseFamily::StudentT { df })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseSpec {
    family: NoiseFamily,
    sigma2: f64,
    scale: f64,
    student: Option<StudentT<f64>>,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::BadVariance(sigma2));
        }
        let sd = sigma2.sqrt();
        let (scale, student) = match family {
            NoiseFamily::Gaussian | NoiseFamily::Rademacher => (sd, None),
            NoiseFamily::Uniform => ((3.0 * sigma2).sqrt(), None),
            NoiseFamily::StudentT { df } => {
                if !(df > 4.0 && df.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "student-t noise needs df > 4 for a finite fourth moment, got {df}"
                    )));
                }
                let dist = StudentT::new(df)
                    .map_err(|e| Error::InvalidInput(format!("student-t: {e}")))?;
                (sd * ((df - 2.0) / df).sqrt(), Some(dist))
            }
        };
        Ok(Self {
            family,
            sigma2,
            scale,
            student,
        })
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale * z
            }
            NoiseFamily::Uniform => self.scale * (2.0 * rng.random::<f64>() - 1.0),
            NoiseFamily::StudentT { .. } => {
                self.scale * self.student.as_ref().expect("t distribution").sample(rng)
            }
            NoiseFamily::Rademacher => {
                if rng.random::<bool>() {
                    self.scale
                } else {
                    -self.scale
                }
            }
        }
    }
}

/// A simulated path `(X_0..X_n)`, its driving noise `(ε_0..ε_n)` and the
/// innovations `(V_0..V_n)`, where `V_0` generated `ε_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub v: Vec<f64>,
    pub params: ModelParams,
    pub seed: u64,
    pub burn_in: usize,
    pub noise: NoiseFamily,
    /// `ε_0 = V_0/√(1-ρ²)` at the start of the recursion (stationary start
    /// of the noise chain); otherwise `ε_0 = V_0`.
    pub eps0_stationary: bool,
}

impl Trajectory {
    /// Index `n` of the last observation.
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }
}

/// Runs the recursion on the given innovations `v = (V_0, ..., V_m)`:
/// `X_0 = ε_0`, pre-sample `X` are zero, then
/// `ε_t = ρε_{t-1} + V_t`, `X_t = Σ θ_i X_{t-i} + ε_t`.
///
/// Returns `(x, eps)`, both of length `v.len()`.
pub fn run_recursion(
    params: &ModelParams,
    v: &[f64],
    eps0_stationary: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_stability()?;
    if v.is_empty() {
        return Err(Error::InvalidInput("no innovations".into()));
    }
    let theta = &params.theta;
    let rho = params.rho;
    let len = v.len();
    let mut x = Vec::with_capacity(len);
    let mut eps = Vec::with_capacity(len);
    let e0 = if eps0_stationary {
        v[0] / (1.0 - rho * rho).sqrt()
    } else {
        v[0]
    };
    eps.push(e0);
    x.push(e0);
    for t in 1..len {
        let e = rho * eps[t - 1] + v[t];
        let mut xt = e;
        for (i, th) in theta.iter().enumerate() {
            if let Some(back) = t.checked_sub(i + 1) {
                xt += th * x[back];
            }
        }
        eps.push(e);
        x.push(xt);
    }
    Ok((x, eps))
}

/// Simulates `X_0..X_n` with `burn_in` discarded leading steps.
///
/// The output depends only on `(params, n, family, seed, burn_in)`.
pub fn simulate(
    params: &ModelParams,
    n: usize,
    family: NoiseFamily,
    seed: u64,
    burn_in: usize,
) -> Result<Trajectory> {
    params.check_stability()?;
    if n < params.p() + 2 {
        return Err(Error::InvalidInput(format!(
            "n = {n} must be at least p + 2 = {}",
            params.p() + 2
        )));
    }
    let noise = NoiseSpec::new(family, params.sigma2)?;
    let mut rng = rng_from_seed(seed);
    let total = burn_in + n + 1;
    let v: Vec<f64> = (0..total).map(|_| noise.sample(&mut rng)).collect();
    let eps0_stationary = burn_in == 0;
    let (x, eps) = run_recursion(params, &v, eps0_stationary)?;
    Ok(Trajectory {
        x: x[burn_in..].to_vec(),
        eps: eps[burn_in..].to_vec(),
        v: v[burn_in..].to_vec(),
        params: params.clone(),
        seed,
        burn_in,
        noise: family,
        eps0_stationary,
    })
}

/// Sample autocovariance `(1/n) Σ_{k=d}^{n} X_k X_{k-d}` without centering.
pub fn sample_autocovariance(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    if lag >= n {
        return 0.0;
    }
    crate::linalg::compensated_sum((lag..n).map(|k| x[k] * x[k - lag])) / n as f64
}
