//! Run reports: JSON for the full record, CSV for one row per check.
//!
//! Everything except `wall_time_s` is a function of the config alone.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{self, CheckError};
use crate::config::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The scenario lacks the structure the check needs; does not fail the run.
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub p: usize,
    pub q: usize,
    pub epsilon: i8,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub precision: &'static str,
    pub threads: usize,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: String,
    pub environment: Environment,
    pub scenarios: Vec<ScenarioReport>,
    pub pass: bool,
}

fn run_check(s: &Scenario, id: &str) -> CheckReport {
    let check = checks::find(id).expect("validated check id");
    let tolerance = s.tolerance(id, check.tolerance);
    let samples = s.samples(check.samples);
    let mut rng = clifford_dirac::random::rng_for(s.seed, id);
    let t = Instant::now();
    let outcome = (check.run)(s, samples, &mut rng);
    let wall_time_s = t.elapsed().as_secs_f64();
    let (status, residual, detail) = match outcome {
        Ok(m) if m.residual < tolerance => (Status::Pass, Some(m.residual), m.detail),
        Ok(m) => (Status::Fail, Some(m.residual), m.detail),
        Err(CheckError::NotApplicable(why)) => (Status::NotApplicable, None, why),
        Err(CheckError::Failed(e)) => (Status::Fail, None, format!("error: {e}")),
    };
    CheckReport { id: id.to_string(), status, residual, tolerance, samples, detail, wall_time_s }
}

/// Checks run in parallel; results keep the declared order.
pub fn run_scenario(s: &Scenario) -> ScenarioReport {
    let checks: Vec<CheckReport> = s.checks.par_iter().map(|id| run_check(s, id)).collect();
    let pass = checks.iter().all(|c| c.status != Status::Fail);
    ScenarioReport { name: s.name.clone(), p: s.sig.p, q: s.sig.q, epsilon: s.sig.eps() as i8, seed: s.seed, checks, pass }
}

pub fn run(config: &Path, scenarios: &[Scenario]) -> RunReport {
    let scenarios: Vec<ScenarioReport> = scenarios.iter().map(run_scenario).collect();
    let pass = scenarios.iter().all(|s| s.pass);
    RunReport {
        config: config.display().to_string(),
        environment: Environment { precision: "f64", threads: rayon::current_num_threads(), version: env!("CARGO_PKG_VERSION") },
        scenarios,
        pass,
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: &'a str,
    check: &'a str,
    status: Status,
    residual: Option<f64>,
    tolerance: f64,
    samples: usize,
    wall_time_s: f64,
}

pub fn write(report: &RunReport, json: &Path, csv_path: &Path) -> anyhow::Result<()> {
    std::fs::write(json, serde_json::to_string_pretty(report)? + "\n")?;
    // Headers are written by hand so a run without checks still gets them.
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(csv_path)?;
    w.write_record(["scenario", "check", "status", "residual", "tolerance", "samples", "wall_time_s"])?;
    for s in &report.scenarios {
        for c in &s.checks {
            w.serialize(CsvRow {
                scenario: &s.name,
                check: &c.id,
                status: c.status,
                residual: c.residual,
                tolerance: c.tolerance,
                samples: c.samples,
                wall_time_s: c.wall_time_s,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
