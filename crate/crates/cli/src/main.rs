mod cache;
mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{write_file, ErrorObject};
use config::RunConfig;

/// Ground states, dimensional constants and multipeak energy checks for
/// the subcritical Yamabe problem on products.
#[derive(Parser)]
#[command(name = "yamabe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the radial ground state; print the record and identity errors
    GroundState(RunConfig),
    /// Correction profiles ψ, v2base and ω with their checks
    Psi(RunConfig),
    /// Dimensional constants for one (n, m) and γ along a seeded direction
    Constants(RunConfig),
    /// One constants row per (n, m), n, m ≥ 3, n + m ≤ max-N
    BetaTable(RunConfig),
    /// Scan Φ along a model meridian and classify its critical points
    PhiScan(RunConfig),
    /// Measured energies and residuals against the predicted expansion
    EnergyCheck(RunConfig),
}

fn emit_error(obj: &ErrorObject) {
    println!("{}", serde_json::to_string(obj).expect("error object serializes"));
}

fn main() -> ExitCode {
    let (name, cfg) = match Cli::parse().command {
        Command::GroundState(c) => ("ground-state", c),
        Command::Psi(c) => ("psi", c),
        Command::Constants(c) => ("constants", c),
        Command::BetaTable(c) => ("beta-table", c),
        Command::PhiScan(c) => ("phi-scan", c),
        Command::EnergyCheck(c) => ("energy-check", c),
    };
    let result = cfg.resolve().and_then(|cfg| {
        let out = cfg.out.clone();
        let output = commands::run(name, cfg)?;
        match &out {
            Some(path) => write_file(path, &output.text)?,
            None => print!("{}", output.text),
        }
        Ok(output)
    });
    match result {
        Ok(output) => {
            if let Some(w) = output.warning {
                eprintln!("warning: {}", serde_json::to_string(&w).expect("warning serializes"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit_error(&ErrorObject::from(&e));
            ExitCode::FAILURE
        }
    }
}
