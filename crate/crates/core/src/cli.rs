//! The `klw` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/file/parse errors, 2 insufficient data,
//! 3 invalid model input (not positive definite, invalid shape, degenerate
//! scatter), 4 a verification check failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::gaussian::kl;
use crate::inference::SufficientStats;
use crate::inference::{
    noninformative_posterior, posterior_known_mean_from_stats, posterior_unknown, MeanMode, Posterior,
};
use crate::io::{
    self, FitReport, FormatError, GaussianJson, MapJson, MatrixLaw, PosteriorJson, StatsJson, WishartJson,
};
use crate::klpriors::{KlNormalWishartPrior, KlWishartPrior};
use crate::pdcore::PdMatrix;
use crate::verify;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INSUFFICIENT_DATA: i32 = 2;
pub const EXIT_INVALID_INPUT: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const SEED_ENV: &str = "KLW_SEED";

pub const ML_NOTE: &str = "alpha = 0: non-informative limit; the MAP estimate equals the maximum-likelihood estimate";

#[derive(Debug, Parser)]
#[command(name = "klw", version, about = "KL-parameterized Wishart priors: fit, kl, sample, check")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a posterior to CSV data and print a JSON report.
    Fit(FitConfig),
    /// Print KL(p || q) between two Gaussians given as JSON files.
    Kl { p: PathBuf, q: PathBuf },
    /// Draw N matrices from a Wishart or inverse-Wishart JSON file; one flattened row each.
    Sample {
        dist: PathBuf,
        n: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
    /// Run verification suites and print one JSON line per suite.
    Check {
        /// `all` or one suite name.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeanModeArg {
    Known,
    Unknown,
}

#[derive(Debug, Clone, Args)]
pub struct FitConfig {
    /// CSV file, one observation per row.
    #[arg(long = "data")]
    pub data_path: PathBuf,
    #[arg(long = "mean", value_enum)]
    pub mean_mode: MeanModeArg,
    /// Known mean, comma separated. Required with `--mean known`.
    // The qualified path keeps clap from treating the vector as a repeated flag.
    #[arg(long = "mu", value_parser = parse_vector, allow_hyphen_values = true)]
    pub known_mu: Option<std::vec::Vec<f64>>,
    /// Prior mean for `--mean unknown`; the origin when omitted.
    #[arg(long = "prior-mean", value_parser = parse_vector, allow_hyphen_values = true)]
    pub prior_mean: Option<std::vec::Vec<f64>>,
    /// Pseudocount; 0 selects the non-informative limit.
    #[arg(long)]
    pub alpha: f64,
    /// `identity` or a matrix file (JSON nested array or CSV). Required when alpha > 0.
    #[arg(long = "mode-cov")]
    pub mode_cov_source: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Accepted for a uniform interface; fitting draws no random numbers.
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InsufficientData(_) => EXIT_INSUFFICIENT_DATA,
        Error::NotPositiveDefinite { .. }
        | Error::InvalidShape { .. }
        | Error::DegenerateScatter(_)
        | Error::ShapeTooSmall { .. }
        | Error::NoInteriorMode { .. } => EXIT_INVALID_INPUT,
        _ => EXIT_USAGE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(e) => e.into(),
            other => Self::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn mode_cov(source: &str, d: usize) -> Result<PdMatrix, CliError> {
    if source == "identity" {
        return Ok(PdMatrix::identity(d));
    }
    let rows = io::parse_matrix(&io::read_text(source.as_ref())?)?;
    let m = PdMatrix::from_rows(&rows)?;
    if m.dim() != d {
        return Err(CliError::usage(format!("--mode-cov is {}x{} but the data have {d} columns", m.dim(), m.dim())));
    }
    Ok(m)
}

fn vector_arg(flag: &str, v: &[f64], d: usize) -> Result<DVector<f64>, CliError> {
    if v.len() != d {
        return Err(CliError::usage(format!("{flag} has {} components but the data have {d} columns", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

/// Builds the fit report. Warnings go to `warn`.
pub fn cmd_fit(cfg: &FitConfig, warn: &mut dyn Write) -> Result<FitReport, CliError> {
    if !(cfg.alpha >= 0.0 && cfg.alpha.is_finite()) {
        return Err(CliError::usage(format!("--alpha must be a finite real >= 0, got {}", cfg.alpha)));
    }
    let rows = io::read_csv(&cfg.data_path)?;
    let stats = SufficientStats::from_rows(&rows)?;
    let d = stats.dim();
    let known_mu = match (cfg.mean_mode, &cfg.known_mu) {
        (MeanModeArg::Known, Some(mu)) => Some(vector_arg("--mu", mu, d)?),
        (MeanModeArg::Known, None) => return Err(CliError::usage("--mean known requires --mu")),
        (MeanModeArg::Unknown, Some(_)) => return Err(CliError::usage("--mu only applies to --mean known")),
        (MeanModeArg::Unknown, None) => None,
    };
    if cfg.mean_mode == MeanModeArg::Known && cfg.prior_mean.is_some() {
        return Err(CliError::usage("--prior-mean only applies to --mean unknown"));
    }
    let which = match &known_mu {
        Some(mu) => MeanMode::Known(mu),
        None => MeanMode::Unknown,
    };

    let posterior = if cfg.alpha == 0.0 {
        if cfg.mode_cov_source.is_some() {
            writeln!(warn, "warning: --mode-cov is ignored when --alpha 0")?;
        }
        if cfg.prior_mean.is_some() {
            writeln!(warn, "warning: --prior-mean is ignored when --alpha 0")?;
        }
        noninformative_posterior(&stats, which, &PdMatrix::identity(d))?
    } else {
        let source = cfg
            .mode_cov_source
            .as_deref()
            .ok_or_else(|| CliError::usage("--mode-cov is required when --alpha > 0 (use `identity` explicitly)"))?;
        let sigma = mode_cov(source, d)?;
        match which {
            MeanMode::Known(mu) => {
                let prior = KlWishartPrior::new(mu.clone(), sigma, cfg.alpha)?;
                Posterior::KnownMean(posterior_known_mean_from_stats(&prior, &stats)?)
            }
            MeanMode::Unknown => {
                let m = match &cfg.prior_mean {
                    Some(m) => vector_arg("--prior-mean", m, d)?,
                    None => {
                        writeln!(warn, "warning: no --prior-mean given; using the origin")?;
                        DVector::zeros(d)
                    }
                };
                let prior = KlNormalWishartPrior::new(m, sigma, cfg.alpha)?;
                Posterior::UnknownMean(posterior_unknown(&prior, &stats)?)
            }
        }
    };

    let (map_mean, map_cov) = posterior.map()?;
    Ok(FitReport {
        mean_mode: match cfg.mean_mode {
            MeanModeArg::Known => "known".into(),
            MeanModeArg::Unknown => "unknown".into(),
        },
        alpha: cfg.alpha,
        stats: StatsJson::from_stats(&stats),
        posterior: PosteriorJson::from_posterior(&posterior)?,
        map: MapJson::new(&map_mean, &map_cov),
        note: (cfg.alpha == 0.0).then(|| ML_NOTE.to_string()),
    })
}

pub fn cmd_kl(p: &std::path::Path, q: &std::path::Path) -> Result<f64, CliError> {
    let p = io::read_json::<GaussianJson>(p)?.to_gaussian()?;
    let q = io::read_json::<GaussianJson>(q)?.to_gaussian()?;
    Ok(kl(&p, &q)?)
}

/// Writes `n` draws as CSV rows of `d²` row-major entries.
pub fn cmd_sample(dist: &std::path::Path, n: usize, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let law = io::read_json::<WishartJson>(dist)?.to_law()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = std::io::BufWriter::new(out);
    for _ in 0..n {
        let draw = match &law {
            MatrixLaw::Wishart(w) => w.sample(&mut rng),
            MatrixLaw::InverseWishart(w) => w.sample(&mut rng)?,
        };
        let row: Vec<String> = draw.to_rows().into_iter().flatten().map(|x| x.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Prints one JSON line per suite; exit code 4 if any failed.
pub fn cmd_check(suite: &str, seed: u64, out: &mut dyn Write) -> Result<i32, CliError> {
    let reports = verify::run_named(suite, seed).ok_or_else(|| {
        let mut cmd = Cli::command();
        cmd.build();
        let usage = cmd.find_subcommand_mut("check").expect("check subcommand").render_usage();
        CliError::usage(format!(
            "unknown suite {suite:?}; expected all or one of: {}\n\n{usage}",
            verify::SUITES.join(", ")
        ))
    })?;
    for r in &reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Fit(cfg) => {
            let report = cmd_fit(&cfg, err)?;
            let text = io::to_json_pretty(&report);
            match &cfg.output {
                Some(path) => std::fs::write(path, text)
                    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Kl { p, q } => {
            writeln!(out, "{:.12}", cmd_kl(&p, &q)?)?;
            Ok(0)
        }
        Command::Sample { dist, n, seed } => cmd_sample(&dist, n, seed, out).map(|_| 0),
        Command::Check { suite, seed } => cmd_check(&suite, seed, out),
    }
}

/// Parses `args` (including the program name) and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
