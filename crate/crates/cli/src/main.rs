use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multierg_core::runner::{execute, predict_scenario, prediction_json, write_artifacts};
use multierg_core::scenario::{parse_scenario, Scenario};
use multierg_core::suite::{format_table, run_all, SuiteConfig};

/// Multiple ergodic averages of commuting circle rotations.
#[derive(Parser)]
#[command(name = "multierg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario, compare with the predicted limit, write trace and report.
    Run {
        file: PathBuf,
        /// Directory for <name>.trace.csv and <name>.report.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the scenario's worker count.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1024))]
        workers: Option<u64>,
    },
    /// Run the built-in verification suite.
    Verify {
        /// Orbit length 1e5 with tolerances relaxed threefold.
        #[arg(long)]
        quick: bool,
        /// Orbit length for the simulated criteria.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        nmax: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
        workers: u64,
    },
    /// Print the predicted limit of a scenario without simulating.
    Predict { file: PathBuf },
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load(path: &Path) -> Result<Scenario, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_scenario(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(file: &Path, out: &Path, workers: Option<u64>) -> Result<u8, String> {
    let scenario = load(file)?;
    let outcome = execute(&scenario, workers.map(|w| w as usize)).map_err(|e| e.to_string())?;
    let paths = write_artifacts(&scenario, &outcome, out)
        .map_err(|e| format!("cannot write artifacts to {}: {e}", out.display()))?;
    let measured = outcome.trace.final_value();
    match &outcome.comparison {
        Some(c) => println!(
            "{}: {} measured {measured} predicted {} error {:.3e} (tol {:e}, tail {:.1e})",
            scenario.name,
            outcome.status.as_str(),
            c.predicted,
            c.final_error,
            c.tolerance,
            c.tail
        ),
        None => {
            println!(
                "{}: measured {measured}; no applicable prediction",
                scenario.name
            );
            for caveat in &outcome.prediction.caveats {
                println!("  caveat: {caveat}");
            }
        }
    }
    println!(
        "  wrote {} and {}",
        paths.trace.display(),
        paths.report.display()
    );
    Ok(outcome.status.exit_code() as u8)
}

fn verify(quick: bool, nmax: Option<u64>, workers: u64) -> Result<u8, String> {
    let mut cfg = if quick {
        SuiteConfig::quick()
    } else {
        SuiteConfig::default()
    };
    if let Some(n) = nmax {
        cfg.n_max = n;
    }
    cfg.workers = workers as usize;
    let rows = run_all(&cfg).map_err(|e| e.to_string())?;
    print!("{}", format_table(&rows));
    Ok(if rows.iter().all(|r| r.pass) {
        0
    } else {
        EXIT_FAIL
    })
}

fn predict(file: &Path) -> Result<u8, String> {
    let scenario = load(file)?;
    let pred = predict_scenario(&scenario).map_err(|e| e.to_string())?;
    let body = serde_json::to_string_pretty(&prediction_json(&pred)).map_err(|e| e.to_string())?;
    println!("{body}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, out, workers } => run(&file, &out, workers),
        Command::Verify {
            quick,
            nmax,
            workers,
        } => verify(quick, nmax, workers),
        Command::Predict { file } => predict(&file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
