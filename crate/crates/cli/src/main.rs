//! `optwave`: target curves, model evaluation, fits and propagation runs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Format, RunConfig};
use output::Outputs;

#[derive(Parser)]
#[command(name = "optwave", version, about = "Wave models of option prices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random paths; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Format of curve and field files; overrides the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Black-Scholes put and call curves, Greeks table and a price path.
    BsCurve,
    /// Samples a closed-form NLS solution.
    NlsEval,
    /// Samples a plane-wave packet.
    PacketEval,
    /// Fits a wave model to a Black-Scholes curve.
    Fit,
    /// Split-step propagation with conserved-quantity tracking.
    Evolve,
    /// Greeks on a price/time lattice.
    Greeks,
    /// Re-runs the published fits.
    Reproduce,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::BsCurve => "bs-curve",
            Command::NlsEval => "nls-eval",
            Command::PacketEval => "packet-eval",
            Command::Fit => "fit",
            Command::Evolve => "evolve",
            Command::Greeks => "greeks",
            Command::Reproduce => "reproduce",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.format = Some(format);
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate().context("invalid config")?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<PathBuf> {
    let cfg = load_config(cli)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Outputs::new(&dir, cfg.format.unwrap_or_default())?;
    let summary = match cli.command {
        Command::BsCurve => commands::bs_curve(&cfg, &mut out),
        Command::NlsEval => commands::nls_eval(&cfg, &mut out),
        Command::PacketEval => commands::packet_eval(&cfg, &mut out),
        Command::Fit => commands::fit(&cfg, &mut out),
        Command::Evolve => commands::evolve(&cfg, &mut out),
        Command::Greeks => commands::greeks(&cfg, &mut out),
        Command::Reproduce => commands::reproduce(&cfg, &mut out),
    }
    .with_context(|| format!("{} failed", cli.command.name()))?;
    out.finish(cli.command.name(), &cfg, summary)?;
    Ok(dir.join("manifest.json"))
}

/// Maps the innermost recognised cause to an exit code.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<optwave::Error>() {
            return match e {
                optwave::Error::Io(_) | optwave::Error::Csv(_) => 4,
                e if e.is_numerical() => 3,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return if e.is_io() { 4 } else { 2 };
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        assert_eq!(serde_json::from_str::<RunConfig>("{}").unwrap(), cfg);
    }

    #[test]
    fn exit_codes_follow_the_innermost_cause() {
        let numerical = anyhow::Error::new(optwave::Error::ZeroNorm).context("evolve failed");
        assert_eq!(exit_code(&numerical), 3);
        let io = anyhow::Error::new(std::io::Error::other("disk")).context("writing");
        assert_eq!(exit_code(&io), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("bad value")), 2);
    }
}
