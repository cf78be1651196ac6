//! Command-line runner: config resolution, experiment drivers and exit codes.
//!
//! Exit codes: 0 all checks passed, 1 configuration error, 2 numerical
//! diagnostic, 3 a verification or experiment check failed.

pub mod config;
pub mod verify;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use crate::born::{born_approx, BornResult};
use crate::error::{Error, Result};
use crate::fields::{fit_decay_points, DecayFit};
use crate::potentials::{bessel_spectrum, gaussian_spectrum};
use crate::regularity::{
    bound_table, counterexample_experiment, q2count_check, smoothing_check, CounterexampleSettings, ExperimentReport,
};

pub use config::{ExperimentConfig, PotentialChoice};
pub use verify::{run_verify, VerifyOptions, VerifyReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "backscatter", version, about = "Backscattering Born-series laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay of s_1(q_beta) against the counterexample prediction.
    Counterexample(CommonArgs),
    /// Truncated Born approximation and the smoothing report.
    Born(CommonArgs),
    /// Property suites; exit 3 when any fails.
    Verify(CommonArgs),
    /// Power-law fit of a CSV column.
    DecayFit(CommonArgs),
}

/// Flags shared by all subcommands. Each maps onto a config key; `--set`
/// reaches any other key.
#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// key = value file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Born truncation order J.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub eta_min: Option<String>,
    #[arg(long)]
    pub eta_max: Option<String>,
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub fit_min: Option<String>,
    #[arg(long)]
    pub fit_max: Option<String>,
    #[arg(long)]
    pub c0: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Input CSV for decay-fit.
    #[arg(long)]
    pub input: Option<String>,
    /// Column to fit (re_/im_ pairs are combined into a modulus).
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Single-threaded run; the reproducibility reference.
    #[arg(long)]
    pub serial: bool,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated suites for verify.
    #[arg(long)]
    pub suite: Option<String>,
    /// Any config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    /// Config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("n", &self.n),
            ("beta", &self.beta),
            ("order", &self.order),
            ("potential", &self.potential),
            ("eta_min", &self.eta_min),
            ("eta_max", &self.eta_max),
            ("points", &self.points),
            ("fit_min", &self.fit_min),
            ("fit_max", &self.fit_max),
            ("c0", &self.c0),
            ("out", &self.out),
            ("input", &self.input),
            ("column", &self.column),
            ("threads", &self.threads),
            ("seed", &self.seed),
            ("suite", &self.suite),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        if self.serial {
            cfg.serial = true;
        }
        Ok(cfg)
    }
}

/// What a finished run reports back to `main`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn exit_code_for(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.pass => EXIT_PASS,
        Ok(_) => EXIT_VERIFY,
        Err(e) if e.is_numerical() => EXIT_NUMERICAL,
        Err(_) => EXIT_CONFIG,
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

/// Runs `f` on a pool sized by the config (one thread in serial mode).
fn with_pool<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = if cfg.serial { Some(1) } else { cfg.threads };
    match threads {
        Some(0) => Err(Error::InvalidInput("threads must be >= 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn tag(n: usize, beta: f64) -> String {
    format!("n{n}_beta{beta}")
}

/// CSV of (eta, s_1, Q^_2) and a JSON report with the counterexample fit and
/// the Q_2 ceiling check.
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.require_n()?;
    let beta = cfg.require_beta()?;
    let bounds = bound_table(n, beta, 3)?;
    let mut settings = CounterexampleSettings::new(cfg.eta_grid()?);
    settings.window = [cfg.fit_min.unwrap_or(settings.window[0]), cfg.fit_max.unwrap_or(settings.window[1])];
    settings.pv = cfg.pv;
    settings.radial = cfg.radial();
    settings.parallel = !cfg.serial;
    let result = with_pool(cfg, || counterexample_experiment(n, beta, &settings))??;
    let mut entries = vec![result.entry.clone()];
    if beta > 0.0 {
        entries.push(q2count_check(&result, settings.tol_upper)?);
    }
    let report = ExperimentReport {
        config: cfg.to_json_value(),
        bounds,
        entries,
        failures: result.failures.clone(),
    };
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    let t = tag(n, beta);
    let files = vec![
        write_file(&cfg.out, &format!("counterexample_{t}.csv"), &csv)?,
        write_file(&cfg.out, &format!("counterexample_{t}.json"), report.to_json()?.as_bytes())?,
    ];
    Ok(RunOutcome {
        pass: report.all_pass(),
        files,
        summary: format!(
            "n = {n}, beta = {beta}: fitted e = {:.4}, predicted p = {:.4}, margin {:.4}",
            result.fit.exponent,
            result.predicted,
            result.predicted - result.fit.exponent
        ),
    })
}

/// Born CSV plus the smoothing report.
pub fn run_born(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.require_n()?;
    if !(2..=3).contains(&cfg.order) {
        return Err(Error::Unsupported(format!("Born order J = {}; only 2 and 3", cfg.order)));
    }
    let (qhat, beta) = match cfg.potential {
        PotentialChoice::Bessel => {
            let beta = cfg.require_beta()?;
            (bessel_spectrum(beta, n)?, beta)
        }
        PotentialChoice::Gaussian => {
            if !(cfg.gaussian_a > 0.0) {
                return Err(Error::InvalidInput(format!("gaussian_a = {} must be > 0", cfg.gaussian_a)));
            }
            // a Schwartz potential lies in every W^{beta,2}; beta only labels the report
            (gaussian_spectrum(cfg.gaussian_a), cfg.beta.unwrap_or(0.0))
        }
    };
    let grid = cfg.eta_grid()?;
    let cutoff = cfg.cutoff()?;
    let schemes = cfg.born_schemes();
    let born: BornResult = with_pool(cfg, || born_approx(&qhat, n, &grid, cfg.order, &cutoff, &schemes))??;
    let entry = smoothing_check(&born, n, beta, cfg.window())?;
    let report = ExperimentReport {
        config: cfg.to_json_value(),
        bounds: bound_table(n, beta, 3)?,
        entries: vec![entry.clone()],
        failures: born
            .failures
            .iter()
            .map(|(i, m)| format!("node {i} (|eta| = {}): {m}", grid.nodes()[*i]))
            .collect(),
    };
    let mut csv = Vec::new();
    born.write_csv(&mut csv)?;
    let t = format!("{}_{}_J{}", tag(n, beta), potential_name(cfg.potential), cfg.order);
    let files = vec![
        write_file(&cfg.out, &format!("born_{t}.csv"), &csv)?,
        write_file(&cfg.out, &format!("born_{t}.json"), report.to_json()?.as_bytes())?,
    ];
    let gain = entry.fitted.map_or("super-polynomial".into(), |g| format!("{g:.4}"));
    Ok(RunOutcome {
        pass: report.all_pass(),
        files,
        summary: format!("n = {n}, J = {}: residual gain {gain} ({})", cfg.order, entry.criterion),
    })
}

fn potential_name(p: PotentialChoice) -> &'static str {
    match p {
        PotentialChoice::Bessel => "bessel",
        PotentialChoice::Gaussian => "gaussian",
    }
}

pub fn run_verify_cmd(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let opts = VerifyOptions {
        seed: cfg.seed,
        corrupt_weights: cfg.corrupt_weights,
    };
    let report = with_pool(cfg, || run_verify(cfg.suite.as_deref(), &opts))??;
    let json = to_json(&report)?;
    let files = vec![write_file(&cfg.out, "verify.json", json.as_bytes())?];
    let summary = report
        .suites
        .iter()
        .map(|s| {
            format!(
                "{} {}: {} cases, {} failures, max error {:.3e} (tol {:.0e})",
                if s.pass { "PASS" } else { "FAIL" },
                s.name,
                s.cases,
                s.failures,
                s.max_error,
                s.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(RunOutcome {
        pass: report.all_pass(),
        files,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DecayFitReport {
    config: serde_json::Value,
    input: String,
    column: String,
    fit: DecayFit,
}

/// Reads (first column = |eta| or rho) and fits the modulus of `column`,
/// combining `re_<column>` and `im_<column>` when present.
pub fn run_decay_fit(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("missing required key input (--input)".into()))?;
    let text = fs::read_to_string(input).map_err(|e| Error::InvalidInput(format!("{}: {e}", input.display())))?;
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let column = cfg.column.clone().unwrap_or_else(|| {
        if find("re").is_some() {
            String::new()
        } else {
            headers.get(1).cloned().unwrap_or_default()
        }
    });
    let (re_name, im_name) = if column.is_empty() {
        ("re".to_string(), "im".to_string())
    } else {
        (format!("re_{column}"), format!("im_{column}"))
    };
    let picks: Vec<usize> = match (find(&re_name), find(&im_name), find(&column)) {
        (Some(a), Some(b), _) => vec![a, b],
        (_, _, Some(c)) => vec![c],
        _ => {
            return Err(Error::InvalidInput(format!(
                "column {column:?} not found among {headers:?}"
            )))
        }
    };
    let rho: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mags: Vec<f64> = rows
        .iter()
        .map(|r| picks.iter().map(|&k| r[k] * r[k]).sum::<f64>().sqrt())
        .collect();
    let window = [
        cfg.fit_min.unwrap_or_else(|| rho.iter().copied().fold(f64::INFINITY, f64::min)),
        cfg.fit_max.unwrap_or_else(|| rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    ];
    let fit = fit_decay_points(&rho, &mags, window)?;
    let label = if column.is_empty() { "re,im".to_string() } else { column };
    let report = DecayFitReport {
        config: cfg.to_json_value(),
        input: input.display().to_string(),
        column: label.clone(),
        fit,
    };
    let files = vec![write_file(&cfg.out, "decay_fit.json", to_json(&report)?.as_bytes())?];
    Ok(RunOutcome {
        pass: true,
        files,
        summary: format!(
            "{label}: exponent {:.4} on [{}, {}] ({} nodes, residual {:.2e})",
            fit.exponent, window[0], window[1], fit.nodes, fit.residual_rms
        ),
    })
}

/// Parses `args` (including the program name), runs the subcommand, prints
/// a summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (name, common) = match &cli.command {
        Command::Counterexample(a) => ("counterexample", a),
        Command::Born(a) => ("born", a),
        Command::Verify(a) => ("verify", a),
        Command::DecayFit(a) => ("decay-fit", a),
    };
    let result = common.resolve().and_then(|cfg| match &cli.command {
        Command::Counterexample(_) => run_counterexample(&cfg),
        Command::Born(_) => run_born(&cfg),
        Command::Verify(_) => run_verify_cmd(&cfg),
        Command::DecayFit(_) => run_decay_fit(&cfg),
    });
    let code = exit_code_for(&result);
    match &result {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if !o.pass {
                eprintln!("{name}: checks failed");
            }
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            if code == EXIT_CONFIG {
                eprintln!("usage: backscatter {name} --help");
            }
        }
    }
    code
}
