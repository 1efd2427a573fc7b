//! `eigsense` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigsense::experiment::{trial_buffer, with_threads};
use eigsense::io::{run_command, verify_table, write_iq, Command, RunConfig};
use eigsense::Error;

#[derive(Debug, Parser)]
#[command(
    name = "eigsense",
    version,
    about = "Eigenvalue-based spectrum sensing experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output path. Tables go to standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Named preset applied before the config file.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, global = true, value_name = "COUNT")]
    threads: Option<usize>,
    /// Extra `key=value` override; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Calibrate thresholds on noise-only trials.
    Calibrate,
    /// Run every configured detector on one observation.
    Detect {
        /// Raw I/Q file to test instead of a synthetic observation.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Histogram of a statistic over the trials.
    Pdf,
    /// Detection probability against SNR.
    SweepSnr,
    /// SMED detection probability against auxiliary carrier offset.
    SweepOffset,
    /// SMED detection probability against auxiliary margin.
    SweepAmp,
    /// Closed-form detection-SNR tables.
    Theory {
        /// Table to produce: fig2 or fig4.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Re-run the configuration recorded in a table and compare bodies.
    Verify {
        #[arg(value_name = "CSV")]
        table: PathBuf,
    },
    /// Write the first synthetic observation as a raw I/Q file (needs --out).
    Synth,
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

fn overrides(
    common: &Common,
    extra: &[(String, String)],
) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for s in &common.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--set expects KEY=VALUE, got `{s}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = common.seed {
        out.push(("seed".into(), seed.to_string()));
    }
    out.extend_from_slice(extra);
    Ok(out)
}

fn load_config(common: &Common, extra: &[(String, String)]) -> Result<RunConfig, Failure> {
    let text = match &common.config {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    Ok(RunConfig::from_sources(
        common.preset.as_deref(),
        text.as_deref(),
        &overrides(common, extra)?,
    )?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let threads = common.threads;
    match cli.command {
        Cmd::Verify { table } => {
            let text = fs::read_to_string(&table)
                .map_err(|e| Failure::Input(format!("{}: {e}", table.display())))?;
            let v = with_threads(threads, || verify_table(&text))??;
            let report = format!(
                "command={}\nconfig_hash={}\nbody={}\n",
                v.command,
                if v.config_hash_ok { "ok" } else { "mismatch" },
                if v.identical {
                    "identical"
                } else {
                    "different"
                }
            );
            emit(None, &report)?;
            if v.identical && v.config_hash_ok {
                Ok(())
            } else {
                Err(Failure::Numeric("table does not reproduce".into()))
            }
        }
        Cmd::Synth => {
            let out = common
                .out
                .as_deref()
                .ok_or_else(|| Failure::Input("synth needs --out PATH".into()))?;
            let cfg = load_config(common, &[])?;
            let plan = cfg.trial_plan();
            plan.validate()?;
            write_iq(out, &trial_buffer(&plan, 0)?)?;
            Ok(())
        }
        cmd => {
            let (command, extra, input) = match cmd {
                Cmd::Calibrate => (Command::Calibrate, vec![], None),
                Cmd::Detect { input } => (Command::Detect, vec![], input),
                Cmd::Pdf => (Command::Pdf, vec![], None),
                Cmd::SweepSnr => (Command::SweepSnr, vec![], None),
                Cmd::SweepOffset => (Command::SweepOffset, vec![], None),
                Cmd::SweepAmp => (Command::SweepAmp, vec![], None),
                Cmd::Theory { kind } => (
                    Command::Theory,
                    kind.map(|k| vec![("theory_kind".to_string(), k)])
                        .unwrap_or_default(),
                    None,
                ),
                Cmd::Verify { .. } | Cmd::Synth => unreachable!("handled above"),
            };
            let cfg = load_config(common, &extra)?;
            let table = with_threads(threads, || run_command(command, &cfg, input.as_deref()))??;
            emit(common.out.as_deref(), &table.to_csv_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
