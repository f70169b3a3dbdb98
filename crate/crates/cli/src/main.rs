use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use durbin_ar::hypothesis::run_tests;
use durbin_ar::io::{
    outcome_csv_row, outcome_error_csv_row, read_series, trajectory_sidecar, write_trajectory_csv,
    OUTCOME_CSV_HEADER,
};
use durbin_ar::montecarlo::{clt_diagnostic, rate_diagnostic, size_power_study, with_workers, StudyConfig};
use durbin_ar::estimate::{fit_with, FitOptions, FitResult};
use durbin_ar::{limit_summary, simulate, ModelParams, NoiseFamily, TestName};

#[derive(Parser, Debug)]
#[command(name = "durbin-ar", version, about = "Durbin-Watson theory for AR(p) models with AR(1) noise")]
struct Cli {
    /// Worker threads for `power` and `diagnose` (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the limit objects of a parameter set as JSON.
    Limits(ModelArgs),
    /// Simulate a trajectory to CSV, with a `.meta.json` sidecar.
    Simulate(SimulateArgs),
    /// Fit an AR(p) model to a series and print the estimates as JSON.
    Fit(FitArgs),
    /// Run serial-correlation tests on a series.
    Test(TestArgs),
    /// Run a size/power study described by a JSON config.
    Power(PowerArgs),
    /// Monte-Carlo check of the limit theorems.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model order; defaults to the length of `--theta`.
    #[arg(long)]
    p: Option<usize>,
    /// Comma-separated autoregressive coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    theta: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "DWAR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    /// gaussian, uniform, rademacher or student-t:DF.
    #[arg(long, default_value = "gaussian")]
    noise: NoiseFamily,
    /// CSV path; the sidecar goes next to it. Stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    p: usize,
    /// Column name or zero-based index (default: `x`, else the first column).
    #[arg(long)]
    column: Option<String>,
    /// Ridge term `c` added as `cI_p` to the design matrix.
    #[arg(long, default_value_t = 0.0)]
    regularizer: f64,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// `all` or a comma-separated list of test names.
    #[arg(long, default_value = "all")]
    tests: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[arg(long)]
    config: PathBuf,
    /// Table path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write gnuplot power-curve blocks to this path.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Clt,
    Rate,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    model: ModelArgs,
    /// Sample size for `clt`.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Replications for `clt`.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Checkpoints for `rate`; the largest is the path length.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
    checkpoints: Vec<usize>,
    #[arg(long, env = "DWAR_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value = "gaussian")]
    noise: NoiseFamily,
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<durbin_ar::Error> for Failure {
    fn from(e: durbin_ar::Error) -> Self {
        Failure { code: 3, kind: e.kind().to_string(), message: e.to_string() }
    }
}

fn usage(kind: &str, message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: kind.to_string(), message: message.into() }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    usage("Io", format!("{}: {e}", path.display()))
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        if let Some(p) = self.p {
            if p != self.theta.len() {
                return Err(usage(
                    "InvalidInput",
                    format!("--p {p} does not match {} theta values", self.theta.len()),
                ));
            }
        }
        Ok(ModelParams::new(self.theta.clone(), self.rho, self.sigma2)?)
    }
}

impl SeriesArgs {
    fn load(&self) -> Result<Vec<f64>, Failure> {
        let text = fs::read_to_string(&self.input).map_err(|e| io_failure(&self.input, e))?;
        Ok(read_series(&text, self.column.as_deref())?)
    }

    fn fit(&self, x: &[f64]) -> Result<FitResult, Failure> {
        Ok(fit_with(x, self.p, &FitOptions { regularizer: self.regularizer })?)
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| io_failure(path, e)),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| usage("Io", e.to_string())),
    }
}

fn pretty(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

fn run(cli: Cli) -> Result<(), Failure> {
    let workers = cli.workers;
    match cli.command {
        Command::Limits(args) => {
            let summary = limit_summary(&args.params()?)?;
            emit(None, &pretty(&summary.to_json()))
        }
        Command::Simulate(args) => {
            let params = args.model.params()?;
            let tr = simulate(&params, args.n, args.noise, args.seed, args.burn_in)?;
            let mut csv = Vec::new();
            write_trajectory_csv(&tr, &mut csv).expect("write to memory");
            emit(args.output.as_deref(), &csv)?;
            if let Some(path) = &args.output {
                let meta = sidecar_path(path);
                fs::write(&meta, pretty(&trajectory_sidecar(&tr))).map_err(|e| io_failure(&meta, e))?;
            }
            Ok(())
        }
        Command::Fit(args) => {
            let x = args.series.load()?;
            emit(None, &pretty(&args.series.fit(&x)?))
        }
        Command::Test(args) => {
            let tests = TestName::parse_list(&args.tests).map_err(|e| usage("InvalidInput", e.to_string()))?;
            let x = args.series.load()?;
            let result = args.series.fit(&x)?;
            let outcomes = run_tests(&x, &result, args.level, &tests);
            let bytes = match args.format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = outcomes
                        .iter()
                        .map(|(name, o)| match o {
                            Ok(o) => serde_json::to_value(o).expect("serializable"),
                            Err(e) => json!({"name": name, "error": e.kind(), "message": e.to_string()}),
                        })
                        .collect();
                    pretty(&rows)
                }
                Format::Csv => {
                    let mut s = format!("{OUTCOME_CSV_HEADER}\n");
                    for (name, o) in &outcomes {
                        s.push_str(&match o {
                            Ok(o) => outcome_csv_row(o),
                            Err(e) => outcome_error_csv_row(*name, e),
                        });
                        s.push('\n');
                    }
                    s.into_bytes()
                }
            };
            emit(None, &bytes)
        }
        Command::Power(args) => {
            let text = fs::read_to_string(&args.config).map_err(|e| io_failure(&args.config, e))?;
            let config: StudyConfig =
                serde_json::from_str(&text).map_err(|e| usage("InvalidConfig", e.to_string()))?;
            let table = with_workers(workers, || size_power_study(&config))?;
            let bytes = match args.format {
                Format::Json => pretty(&table),
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf).expect("write to memory");
                    buf
                }
            };
            emit(args.output.as_deref(), &bytes)?;
            if let Some(path) = &args.gnuplot {
                let mut buf = Vec::new();
                table.write_gnuplot(&mut buf).expect("write to memory");
                fs::write(path, buf).map_err(|e| io_failure(path, e))?;
            }
            Ok(())
        }
        Command::Diagnose(args) => {
            let params = args.model.params()?;
            let bytes = match args.kind {
                Kind::Clt => {
                    let report = with_workers(workers, || {
                        clt_diagnostic(&params, args.n, args.reps, args.noise, args.seed, args.burn_in)
                    })?;
                    pretty(&report)
                }
                Kind::Rate => pretty(&rate_diagnostic(&params, &args.checkpoints, args.noise, args.seed)?),
            };
            emit(None, &bytes)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind, "message": f.message}));
            ExitCode::from(f.code)
        }
    }
}
