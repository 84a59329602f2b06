//! `cliffverify`: runs the identity checks over scenario configs.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 the input was unusable.
//! `CLIFFVERIFY_THREADS` sets the worker count; results do not depend on it.

mod checks;
mod config;
mod report;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

const THREADS_VAR: &str = "CLIFFVERIFY_THREADS";

#[derive(Parser)]
#[command(name = "cliffverify", version, about = "Clifford-module Dirac operator identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario config and write `<stem>.report.{json,csv}`.
    Run {
        config: PathBuf,
        /// Directory for the reports.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List check ids with default tolerances and sample counts.
    ListChecks,
    /// Exact coefficients of both trace identities for even n up to N.
    Coefficients {
        #[arg(long)]
        n_max: i64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Neutrino cosmological constant for the mass blocks in a JSON file.
    Lambda {
        file: PathBuf,
        /// Ambient dimension; overrides `n` in the file (default 4).
        #[arg(long)]
        n: Option<usize>,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    return usage(format!("{THREADS_VAR}: {e}"));
                }
            }
            _ => return usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")),
        }
    }
    match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::ListChecks => {
            for c in checks::CHECKS {
                let note = c.known_deviation.map(|d| format!("  [known deviation: {d}]")).unwrap_or_default();
                println!("{:<22} tol={:<7.0e} samples={:<4} {}{note}", c.id, c.tolerance, c.samples, c.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Coefficients { n_max, format } => coefficients(n_max, format),
        Command::Lambda { file, n } => lambda(file, n),
    }
}

fn run(config: PathBuf, out: PathBuf) -> ExitCode {
    let scenarios = match config::load(&config) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let report = report::run(&config, &scenarios);
    for s in &report.scenarios {
        for c in &s.checks {
            let status = match c.status {
                report::Status::Pass => "PASS",
                report::Status::Fail => "FAIL",
                report::Status::NotApplicable => "N/A ",
            };
            let resid = c.residual.map(|r| format!("{r:.2e}")).unwrap_or_else(|| "-".into());
            println!("{} {:<22} {status} residual={resid} tol={:.0e} {:.1}s  {}", s.name, c.id, c.tolerance, c.wall_time_s, c.detail);
        }
    }
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    if let Err(e) = std::fs::create_dir_all(&out) {
        return usage(format!("cannot create {}: {e}", out.display()));
    }
    let (json, csv) = (out.join(format!("{stem}.report.json")), out.join(format!("{stem}.report.csv")));
    if let Err(e) = report::write(&report, &json, &csv) {
        return usage(format!("cannot write reports: {e}"));
    }
    println!("{}: {} -> {}", if report.pass { "pass" } else { "FAIL" }, config.display(), json.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn coefficients(n_max: i64, format: Format) -> ExitCode {
    if !(2..=64).contains(&n_max) {
        return usage("--n-max must be between 2 and 64");
    }
    let rows = tables::coefficient_table(n_max);
    let printed = match format {
        Format::Json => serde_json::to_string_pretty(&rows).map(|s| println!("{s}")).map_err(anyhow::Error::from),
        Format::Csv => (|| {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        })(),
    };
    match printed {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage(e),
    }
}

fn lambda(file: PathBuf, n: Option<usize>) -> ExitCode {
    let m = match config::read_mass_file(&file) {
        Ok(m) => m,
        Err(e) => return usage(e),
    };
    let (md, mm) = match m.matrices() {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let n = n.or(m.n).unwrap_or(4);
    if n < 2 || n % 2 != 0 {
        return usage(format!("n = {n} must be even and at least 2"));
    }
    let t = tables::lambda_terms(&md, &mm, n);
    match serde_json::to_string_pretty(&t) {
        Ok(s) => println!("{s}"),
        Err(e) => return usage(e),
    }
    ExitCode::SUCCESS
}
