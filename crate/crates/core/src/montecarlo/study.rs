use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{map_indexed, Schedule};
use crate::error::{Error, Result};
use crate::estimate::fit;
use crate::hypothesis::{run_tests, TestName};
use crate::io::fmt_f64;
use crate::params::ModelParams;
use crate::rng::replication_seed;
use crate::simulate::{simulate, NoiseFamily};

/// Size/power study description. This is also the on-disk JSON schema of
/// `power --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub params_list: Vec<ModelParams>,
    pub n_list: Vec<usize>,
    pub reps: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub noise: NoiseFamily,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "all_tests")]
    pub tests: Vec<TestName>,
    #[serde(default)]
    pub burn_in: usize,
}

fn default_level() -> f64 {
    0.05
}

fn all_tests() -> Vec<TestName> {
    TestName::ALL.to_vec()
}

pub const MIN_REPS: usize = 100;

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.params_list.is_empty() || self.n_list.is_empty() || self.tests.is_empty() {
            return Err(Error::InvalidInput(
                "params_list, n_list and tests must be non-empty".into(),
            ));
        }
        if self.reps < MIN_REPS {
            return Err(Error::InvalidInput(format!(
                "reps = {} is below the minimum of {MIN_REPS}",
                self.reps
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::DomainError(format!("level {} not in (0, 1)", self.level)));
        }
        for params in &self.params_list {
            params.check_stability()?;
            if let Some(&n) = self.n_list.iter().find(|&&n| n < params.p() + 2) {
                return Err(Error::InvalidInput(format!(
                    "n = {n} is too small for p = {}",
                    params.p()
                )));
            }
        }
        // Validates df for student-t.
        crate::simulate::NoiseSpec::new(self.noise, 1.0)?;
        Ok(())
    }
}

/// Default parameter suite. The sets are artifact choices covering
/// `p ∈ {1, 2, 3}`, null (`ρ = 0`) and alternative (`ρ ∈ {±0.2, ±0.5}`)
/// rows, all with `θ_p` and `θ*_p` well away from zero.
pub fn default_suite() -> Vec<ModelParams> {
    let mk = |theta: &[f64], rho: f64| ModelParams::new(theta.to_vec(), rho, 1.0).expect("stable");
    vec![
        mk(&[0.5], 0.0),
        mk(&[0.2, 0.5], 0.0),
        mk(&[0.5], 0.5),
        mk(&[0.2, 0.5], -0.2),
        mk(&[0.2, -0.2, 0.4], 0.2),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub params_id: usize,
    pub n: usize,
    pub test: TestName,
    pub rejection_rate: f64,
    pub inapplicable_rate: f64,
    pub mc_stderr: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn row(&self, params_id: usize, n: usize, test: TestName) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.params_id == params_id && r.n == n && r.test == test)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "params_id,n,test,rejection_rate,inapplicable_rate,mc_stderr,reps"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.params_id,
                r.n,
                r.test,
                fmt_f64(r.rejection_rate),
                fmt_f64(r.inapplicable_rate),
                fmt_f64(r.mc_stderr),
                r.reps
            )?;
        }
        Ok(())
    }

    /// Whitespace-separated blocks, one per `(params_id, test)`, with columns
    /// `n rejection_rate mc_stderr`, separated by two blank lines (gnuplot
    /// `index` convention).
    pub fn write_gnuplot<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut keys: Vec<(usize, TestName)> =
            self.rows.iter().map(|r| (r.params_id, r.test)).collect();
        keys.sort();
        keys.dedup();
        for (block, (pid, test)) in keys.iter().enumerate() {
            if block > 0 {
                writeln!(out, "\n")?;
            }
            writeln!(out, "# params_id={pid} test={test}")?;
            let mut rows: Vec<&PowerRow> = self
                .rows
                .iter()
                .filter(|r| r.params_id == *pid && r.test == *test)
                .collect();
            rows.sort_by_key(|r| r.n);
            for r in rows {
                writeln!(out, "{} {} {}", r.n, fmt_f64(r.rejection_rate), fmt_f64(r.mc_stderr))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Verdict {
    Accept,
    Reject,
    Inapplicable,
}

pub fn size_power_study(config: &StudyConfig) -> Result<PowerTable> {
    size_power_study_with(config, Schedule::Parallel)
}

/// Simulates, fits and tests `reps` trajectories for each `(params, n)`.
/// Replications whose fit or test fails count as inapplicable.
pub fn size_power_study_with(config: &StudyConfig, schedule: Schedule) -> Result<PowerTable> {
    config.validate()?;
    let n_params = config.params_list.len();
    let n_sizes = config.n_list.len();
    let reps = config.reps;
    let tests = &config.tests;
    let total = n_params * n_sizes * reps;

    let verdicts: Vec<Vec<Verdict>> = map_indexed(total, schedule, |idx| {
        let rep = idx % reps;
        let n_idx = (idx / reps) % n_sizes;
        let pid = idx / (reps * n_sizes);
        let params = &config.params_list[pid];
        let n = config.n_list[n_idx];
        let seed = replication_seed(config.master_seed, pid, n, rep);
        replicate(params, n, seed, config, tests)
    });

    let mut rows = Vec::with_capacity(n_params * n_sizes * tests.len());
    for pid in 0..n_params {
        for (n_idx, &n) in config.n_list.iter().enumerate() {
            let base = (pid * n_sizes + n_idx) * reps;
            let block = &verdicts[base..base + reps];
            for (t_idx, &test) in tests.iter().enumerate() {
                let (mut rejected, mut inapplicable) = (0usize, 0usize);
                for v in block {
                    match v[t_idx] {
                        Verdict::Reject => rejected += 1,
                        Verdict::Inapplicable => inapplicable += 1,
                        Verdict::Accept => {}
                    }
                }
                let r = rejected as f64 / reps as f64;
                rows.push(PowerRow {
                    params_id: pid,
                    n,
                    test,
                    rejection_rate: r,
                    inapplicable_rate: inapplicable as f64 / reps as f64,
                    mc_stderr: (r * (1.0 - r) / reps as f64).sqrt(),
                    reps,
                });
            }
        }
    }
    Ok(PowerTable { rows })
}

fn replicate(
    params: &ModelParams,
    n: usize,
    seed: u64,
    config: &StudyConfig,
    tests: &[TestName],
) -> Vec<Verdict> {
    let all_inapplicable = || vec![Verdict::Inapplicable; tests.len()];
    let Ok(tr) = simulate(params, n, config.noise, seed, config.burn_in) else {
        return all_inapplicable();
    };
    let Ok(f) = fit(&tr.x, params.p()) else {
        return all_inapplicable();
    };
    run_tests(&tr.x, &f, config.level, tests)
        .into_iter()
        .map(|(_, outcome)| match outcome {
            Ok(o) if o.reject => Verdict::Reject,
            Ok(_) => Verdict::Accept,
            Err(_) => Verdict::Inapplicable,
        })
        .collect()
}
