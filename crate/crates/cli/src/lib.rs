//! Command-line front end: reads system files, runs one analysis and writes
//! a canonical JSON report.
//!
//! Exit codes: 0 on success, 1 when the input is rejected, 2 when a
//! computation on valid input fails its numerical tolerance.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use structfdi::numeric::{compute_friend, is_solvable};
use structfdi::sampling::monte_carlo_solvability;
use structfdi::sim::{
    decompose_residual, isolate_relative, simulate_error_system, DEFAULT_RELATIVE_THRESHOLD,
};
use structfdi::structured::analyze_structured;
use structfdi::{io, report, FdiError, SamplerConfig, ToleranceConfig};
use thiserror::Error;

const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "structfdi",
    version,
    about = "Fault detection and isolation solvability analysis",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(flatten)]
    pub options: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all commands. Each one can also be set through an
/// environment variable; the flag wins when both are given.
#[derive(Debug, Clone, Args)]
pub struct GlobalOptions {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(
        long,
        global = true,
        env = "STRUCTFDI_TOL_RANK",
        default_value_t = 1e-10
    )]
    pub tol_rank: f64,
    /// Absolute zero threshold.
    #[arg(
        long,
        global = true,
        env = "STRUCTFDI_TOL_ZERO",
        default_value_t = 1e-8
    )]
    pub tol_zero: f64,
    /// Sampler seed.
    #[arg(long, global = true, env = "STRUCTFDI_SEED", default_value_t = SamplerConfig::default().seed)]
    pub seed: u64,
    /// Monte-Carlo sample count. analyze-structured samples only when set.
    #[arg(long, global = true, env = "STRUCTFDI_SAMPLES")]
    pub samples: Option<usize>,
    /// Isolation threshold, relative to the peak residual norm.
    #[arg(long, global = true, env = "STRUCTFDI_THRESHOLD", default_value_t = DEFAULT_RELATIVE_THRESHOLD)]
    pub threshold: f64,
    /// Report destination; standard output when absent.
    #[arg(long, global = true, env = "STRUCTFDI_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural indices, the pattern R and a verdict for a pattern triple.
    AnalyzeStructured { input: PathBuf },
    /// Indices, R and solvability for a numeric system.
    AnalyzeNumeric { input: PathBuf },
    /// Simulates the observer error system and attributes the residual.
    Simulate {
        input: PathBuf,
        /// Fault scenario JSON.
        #[arg(long)]
        scenario: PathBuf,
        /// Observer gain JSON `{"G": ..}`; a common friend is computed when absent.
        #[arg(long)]
        gain: Option<PathBuf>,
        /// Destination of the residual trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte-Carlo solvability of sampled members of a pattern triple.
    SampleVerify { input: PathBuf },
    /// Common friend of the fault subspaces of a numeric system.
    Friend { input: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: FdiError },
    #[error("{0}")]
    Analysis(FdiError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InFile { source, .. } | CliError::Analysis(source)
                if !source.is_input_error() =>
            {
                2
            }
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn in_file<T>(path: &Path, r: structfdi::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::InFile {
        path: path.to_owned(),
        source,
    })
}

impl GlobalOptions {
    fn tolerances(&self) -> Result<ToleranceConfig, CliError> {
        ToleranceConfig::new(self.tol_rank, self.tol_zero).map_err(CliError::Analysis)
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig::with_seed(self.seed)
    }
}

/// Runs one command and returns the report text that belongs on `--out`
/// or standard output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let opts = &cli.options;
    let tol = opts.tolerances()?;
    let value = match &cli.command {
        Command::AnalyzeStructured { input } => {
            let sys = in_file(input, io::parse_structured(&read(input)?))?;
            let mut rep = analyze_structured(&sys);
            if let Some(n) = opts.samples {
                rep.attach_monte_carlo(
                    monte_carlo_solvability(&sys, n, &opts.sampler(), tol)
                        .map_err(CliError::Analysis)?,
                );
            }
            report::structured_report_json(&rep)
        }
        Command::AnalyzeNumeric { input } => {
            let sys = in_file(input, io::parse_numeric(&read(input)?))?;
            report::numeric_report_json(&is_solvable(&sys, tol).map_err(CliError::Analysis)?)
        }
        Command::SampleVerify { input } => {
            let sys = in_file(input, io::parse_structured(&read(input)?))?;
            let n = opts.samples.unwrap_or(DEFAULT_SAMPLES);
            report::monte_carlo_json(
                &monte_carlo_solvability(&sys, n, &opts.sampler(), tol)
                    .map_err(CliError::Analysis)?,
            )
        }
        Command::Friend { input } => {
            let sys = in_file(input, io::parse_numeric(&read(input)?))?;
            let rep = is_solvable(&sys, tol).map_err(CliError::Analysis)?;
            report::friend_json(
                &compute_friend(&sys, &rep.fault_subspaces, tol).map_err(CliError::Analysis)?,
            )
        }
        Command::Simulate {
            input,
            scenario,
            gain,
            trace,
        } => {
            let sys = in_file(input, io::parse_numeric(&read(input)?))?;
            let sc = in_file(scenario, io::parse_scenario(&read(scenario)?))?;
            let rep = is_solvable(&sys, tol).map_err(CliError::Analysis)?;
            if !rep.solvable {
                return Err(CliError::Rejected(format!(
                    "{}: the FDI problem is not solvable for this system; residuals cannot be attributed",
                    input.display()
                )));
            }
            let g = match gain {
                Some(path) => in_file(
                    path,
                    io::parse_gain(&read(path)?, sys.state_dim(), sys.output_dim()),
                )?,
                None => {
                    compute_friend(&sys, &rep.fault_subspaces, tol)
                        .map_err(CliError::Analysis)?
                        .gain
                }
            };
            let sim = simulate_error_system(&sys, &g, &sc).map_err(CliError::Analysis)?;
            let decomposed = decompose_residual(&sim.trace, &rep.output_subspaces)
                .map_err(CliError::Analysis)?;
            let iso = isolate_relative(&decomposed, opts.threshold).map_err(CliError::Analysis)?;
            if let Some(path) = trace {
                write(path, &decomposed.to_csv())?;
            }
            report::isolation_json(&iso, &decomposed, &sim.diagnostics)
        }
    };
    Ok(report::to_canonical_json(&value))
}

/// Runs the command and writes its report; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = execute(cli).and_then(|text| match &cli.options.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("structfdi: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let numerical = CliError::Analysis(FdiError::Numerical("x".into()));
        assert_eq!(numerical.exit_code(), 2);
        let parse = CliError::InFile {
            path: "f".into(),
            source: FdiError::Parse {
                line: 1,
                column: 1,
                message: "x".into(),
            },
        };
        assert_eq!(parse.exit_code(), 1);
        assert_eq!(CliError::Rejected("x".into()).exit_code(), 1);
    }

    #[test]
    fn global_flags_parse_after_subcommand() {
        let cli = Cli::try_parse_from([
            "structfdi",
            "analyze-numeric",
            "sys.json",
            "--tol-zero",
            "1e-9",
            "--seed",
            "3",
        ])
        .unwrap();
        assert_eq!(cli.options.tol_zero, 1e-9);
        assert_eq!(cli.options.seed, 3);
        assert_eq!(cli.options.samples, None);
        assert!(matches!(cli.command, Command::AnalyzeNumeric { .. }));
        assert!(Cli::try_parse_from(["structfdi", "simulate", "sys.json"]).is_err());
    }
}
