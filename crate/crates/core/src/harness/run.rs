use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{RunSpec, SystemChoice};
use crate::besov::{build_frequency_envelope, FrequencyWeight};
use crate::diagnostics::{l2_energy_residual, EnergyReport, ReportConfig, ReportSummary};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Trajectory};
use crate::snapshot::save_snapshot;
use crate::spectral::{SpectralField, VectorField};
use crate::systems::{bulk_to_species, species_to_bulk, SystemState};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Relative divergence allowed anywhere along a run.
pub const DIVERGENCE_LIMIT: f64 = 1e-9;
/// Largest single-step rise of `E_cal`, relative to its initial value.
pub const MONOTONE_SLACK: f64 = 1e-6;
/// Largest per-step L2 energy-law defect, relative to the initial energy.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

/// One measured invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            limit,
            passed: value >= limit,
        }
    }
}

/// In-memory result of one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub report: EnergyReport,
    pub weight: Option<FrequencyWeight>,
    pub checks: Vec<Check>,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub report: ReportSummary,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub weight: Option<Vec<f64>>,
}

/// Initial state of a spec (bulk variables for the species form).
pub fn initial_state(spec: &RunSpec) -> Result<SystemState> {
    let grid = spec.grid()?;
    let state = spec.initial.build(&grid, &spec.params, spec.system.kind())?;
    if spec.system == SystemChoice::Species {
        // The species form is integrated through its bulk equivalent; the
        // round trip only guards the conversion.
        if let SystemState::Plasma(p) = &state {
            let back = species_to_bulk(&bulk_to_species(p, &spec.params)?, &spec.params)?;
            return Ok(SystemState::Plasma(back));
        }
    }
    Ok(state)
}

/// Envelope of the initial `(u, eps j, E, B)` at regularity `s`.
pub fn initial_envelope(state: &SystemState, spec: &RunSpec) -> Result<FrequencyWeight> {
    let mut family: Vec<VectorField> = vec![state.u().clone(), state.e().clone(), state.b().clone()];
    if let SystemState::Plasma(p) = state {
        family.push(p.j.scaled(spec.params.eps));
    }
    build_frequency_envelope(&family, spec.params.s)
}

/// Runs a spec in memory and evaluates the run invariants.
pub fn simulate(spec: &RunSpec) -> Result<RunResult> {
    spec.validate()?;
    let state = initial_state(spec)?;
    let weight = if spec.diagnostics.weight {
        Some(initial_envelope(&state, spec)?)
    } else {
        None
    };
    let rc = ReportConfig {
        k0s: spec.diagnostics.k0s.clone(),
        weight: weight.clone(),
    };
    let (trajectory, report) = integrate(state, spec.t_end, &spec.params, &spec.stepper, &rc, &mut [])?;
    let mut checks = vec![Check::at_most("max_divergence", trajectory.max_divergence, DIVERGENCE_LIMIT)];
    let summary = report.summary()?;
    checks.push(Check::at_most("e_cal_max_increase", summary.e_cal_max_increase, MONOTONE_SLACK));
    if trajectory.len() >= 2 {
        checks.push(Check::at_most("energy_residual", l2_energy_residual(&trajectory)?, RESIDUAL_LIMIT));
    }
    Ok(RunResult {
        trajectory,
        report,
        weight,
        checks,
    })
}

/// Writes the resolved config and version stamp into `out`.
pub fn write_provenance(spec: &RunSpec, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let cfg = out.join("config.toml");
    fs::write(&cfg, spec.to_toml()?)?;
    let ver = out.join("version.txt");
    fs::write(&ver, format!("{VERSION}\n"))?;
    Ok(vec![cfg, ver])
}

#[derive(Serialize)]
struct Manifest<'a> {
    files: &'a [PathBuf],
    error: Option<String>,
}

fn write_manifest(out: &Path, files: &[PathBuf], error: Option<&Error>) -> Result<()> {
    let m = Manifest {
        files,
        error: error.map(|e| e.to_string()),
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

/// Runs a spec and writes config echo, report CSV, JSON summary and
/// snapshots under `out`. A failed run still leaves a manifest naming what
/// was written and why it stopped.
pub fn run_single(spec: &RunSpec, out: &Path) -> Result<RunSummary> {
    let mut files = write_provenance(spec, out)?;
    match write_run(spec, out, &mut files) {
        Ok(s) => {
            write_manifest(out, &files, None)?;
            Ok(s)
        }
        Err(e) => {
            write_manifest(out, &files, Some(&e))?;
            Err(e)
        }
    }
}

fn write_run(spec: &RunSpec, out: &Path, files: &mut Vec<PathBuf>) -> Result<RunSummary> {
    let res = simulate(spec)?;
    let csv = out.join("report.csv");
    res.report.save_csv(&csv)?;
    files.push(csv);
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    for (i, s) in res.trajectory.snapshots.iter().enumerate() {
        let p = snaps.join(format!("state_{i:04}.snap"));
        save_snapshot(&p, s, &spec.params)?;
        files.push(p);
    }
    let summary = RunSummary {
        version: VERSION.to_string(),
        report: res.report.summary()?,
        passed: res.passed(),
        checks: res.checks,
        weight: res.weight.map(|w| w.values().to_vec()),
    };
    let js = out.join("summary.json");
    fs::write(&js, serde_json::to_string_pretty(&summary)? + "\n")?;
    files.push(js);
    Ok(summary)
}
