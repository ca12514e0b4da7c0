//! `ncg` — batch analysis of dense complex operators: spectra, numerical
//! ranges, strongly spectral decompositions, claims audits, GNS
//! representations, and convolution algebras on finite relations.
//!
//! Reports are deterministic: identical input and configuration produce
//! byte-identical files.

mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ncg_core::{Error, Tolerances};

#[derive(Debug, Parser)]
#[command(name = "ncg", version, about = "operator analysis workbench")]
struct Cli {
    /// Relative eigenvalue-cluster radius.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_eig: f64,

    /// Relative residual bound for rank and membership decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_resid: f64,

    /// Number of boundary angles for numerical-range sweeps.
    #[arg(long = "angles", global = true, default_value_t = 64)]
    angle_count: usize,

    /// Number of random samples where an operation draws them.
    #[arg(long = "samples", global = true, default_value_t = 8)]
    sample_count: usize,

    /// Seed for every seeded draw. The NCG_SEED environment variable
    /// overrides this flag when set.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for reports.
    #[arg(long = "out", global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full analysis of a matrix: spectrum, numerical range, strongly
    /// spectral blocks, claims audit, invariant subspace.
    Analyze { input: PathBuf },
    /// Numerical-range boundary as CSV plot data.
    Nrange { input: PathBuf },
    /// GNS representations of states on a presented algebra, plus the
    /// equivalence partition when several states are given.
    Gns { algebra: PathBuf, states: PathBuf },
    /// Convolution-algebra diagnostics over a finite relation.
    Convalg { space: PathBuf, measures: PathBuf },
    /// Claims audit only.
    Audit { input: PathBuf },
}

/// Analysis configuration threaded into every command and echoed in reports.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub tolerances: Tolerances,
    pub angle_count: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::InvalidTolerance(_) => 2,
            Error::NonConvergence { .. } => 3,
            Error::InvalidState(_) => 4,
            Error::SpaceMismatch(_) => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("ncg: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<PathBuf, Failure> {
    let seed = match std::env::var("NCG_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| Failure::parse(format!("NCG_SEED must be an integer, got {text:?}")))?,
        Err(_) => cli.seed,
    };
    if cli.angle_count < 3 {
        return Err(Failure::parse("--angles must be at least 3"));
    }
    if cli.sample_count < 1 {
        return Err(Failure::parse("--samples must be at least 1"));
    }
    let tolerances = Tolerances::new(cli.tol_eig, cli.tol_resid, 1e-8).map_err(Failure::from)?;
    let config = AnalysisConfig {
        tolerances,
        angle_count: cli.angle_count,
        sample_count: cli.sample_count,
        seed,
        output_dir: cli.out_dir.clone(),
    };
    match &cli.command {
        Command::Analyze { input } => {
            let matrix = input::read_matrix(input)?;
            let json = report::analyze(&matrix, stem(input), &config)?;
            write_report(
                &config.output_dir,
                &file_name(input, "analyze", "json"),
                json.as_bytes(),
            )
        }
        Command::Audit { input } => {
            let matrix = input::read_matrix(input)?;
            let json = report::audit(&matrix, stem(input), &config)?;
            write_report(
                &config.output_dir,
                &file_name(input, "audit", "json"),
                json.as_bytes(),
            )
        }
        Command::Nrange { input } => {
            let matrix = input::read_matrix(input)?;
            let csv = report::nrange_csv(&matrix, &config)?;
            write_report(
                &config.output_dir,
                &file_name(input, "nrange", "csv"),
                csv.as_bytes(),
            )
        }
        Command::Gns { algebra, states } => {
            let presentation = input::read_algebra(algebra, &config.tolerances)?;
            let states = input::read_states(states, &presentation)?;
            let json = report::gns(&presentation, &states, stem(algebra), &config)?;
            write_report(
                &config.output_dir,
                &file_name(algebra, "gns", "json"),
                json.as_bytes(),
            )
        }
        Command::Convalg { space, measures } => {
            let quantum_space = input::read_space(space)?;
            let measures = input::read_measures(measures, &quantum_space)?;
            let json = report::convalg(&quantum_space, measures, stem(space), &config)?;
            write_report(
                &config.output_dir,
                &file_name(space, "convalg", "json"),
                json.as_bytes(),
            )
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string())
}

fn file_name(input: &Path, command: &str, extension: &str) -> String {
    format!("{}.{command}.{extension}", stem(input))
}

/// Atomic write: temp file in the target directory, then rename.
fn write_report(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::parse(format!("cannot create output directory: {e}")))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let target = dir.join(name);
    std::fs::write(&tmp, bytes).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", tmp.display()),
    })?;
    std::fs::rename(&tmp, &target).map_err(|e| Failure {
        code: 1,
        message: format!("cannot move report into place: {e}"),
    })?;
    Ok(target)
}
