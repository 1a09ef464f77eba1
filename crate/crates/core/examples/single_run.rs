//! One small-data run with the full report, written to a directory.
//!
//! cargo run --example single_run -- [out-dir]

use std::path::PathBuf;

use twofluid::harness::{run_single, RunSpec};

fn main() -> twofluid::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("twofluid-run"));
    let mut spec = RunSpec::default();
    spec.grid.n = 32;
    spec.t_end = 0.2;
    spec.params = spec.params.with_eps(0.1);
    spec.stepper.dt = 2.5e-4;
    spec.stepper.layer_dt0 = Some(1e-6);
    spec.stepper.layer_steps = 400;
    spec.stepper.record_every = Some(0.1);
    spec.diagnostics.weight = true;

    let summary = run_single(&spec, &out)?;
    let r = &summary.report;
    println!("{} steps to t = {}", r.steps, r.t_final);
    println!("E_cal {:.4e} -> {:.4e} (sup {:.4e})", r.e_cal_initial, r.e_cal_final, r.e_cal_sup);
    println!("int D_cal {:.4e}", r.d_cal_integral);
    for (k0, v) in &r.dtj_integral {
        println!("int |eps^2 dj/dt|^2 below block {k0}: {v:.4e}");
    }
    for c in &summary.checks {
        println!("{:<20} {:.3e} <= {:.1e}: {}", c.name, c.value, c.limit, c.passed);
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
