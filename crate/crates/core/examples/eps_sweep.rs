//! A coarse epsilon ladder from shared data, with the direct limit run and the
//! pairwise difference matrix.
//!
//! cargo run --example eps_sweep

use twofluid::harness::{run_sweep, LadderSpec, RunSpec};

fn main() -> twofluid::Result<()> {
    let mut spec = RunSpec::default();
    spec.grid.n = 32;
    spec.t_end = 0.2;
    spec.ladder = Some(LadderSpec {
        eps: vec![0.2, 0.1, 0.05],
        direct_limit: true,
    });

    let res = run_sweep(&spec)?;
    let r = &res.report;
    println!("{} lockstep steps, smallest dt {:.3e}", r.steps, r.min_dt);
    println!("sup_t E_diff:");
    for row in &r.sup_e {
        println!("  {}", row.iter().map(|x| format!("{x:10.3e}")).collect::<Vec<_>>().join(" "));
    }
    for m in &r.members {
        let gap = m.gap_to_limit.map(|g| g.sup_e).unwrap_or(f64::NAN);
        println!("eps {:<5} Ohm defect {:.3e}  gap to limit {:.3e}", m.eps, m.nsmo_residual_final, gap);
    }
    let v = &r.verdict;
    println!("sup decreasing {}  int decreasing {}  cauchy {}", v.sup_decreasing, v.int_decreasing, v.cauchy);
    if let Some(rate) = v.empirical_rate {
        println!("fitted rate in eps: {rate:.2} (empirical)");
    }
    Ok(())
}
