use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twofluid::diagnostics::{dissipation_d, energy_e, l2_energy, nsmo_residual};
use twofluid::harness::{parse_config, run_property_suite, run_single, run_sweep, RunSpec, Suite};
use twofluid::snapshot::load_snapshot;
use twofluid::spectral::{relative_divergence, SpectralField};
use twofluid::systems::SystemState;
use twofluid::{Error, Result};

#[derive(Parser)]
#[command(name = "twofluid", version, about = "Two-fluid Navier-Stokes-Maxwell solver and epsilon-limit harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Worker threads for concurrent ladder members (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the initial-data seed, or the suite seed for `check`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write report, snapshots and summary.
    Run { config: PathBuf },
    /// Integrate an epsilon ladder from shared data and emit the Cauchy verdict.
    Sweep { config: PathBuf },
    /// Run a property suite: spectral, besov, systems, integrator or all.
    Check { suite: String },
    /// Print the header and norms of a snapshot file.
    Inspect { snapshot: PathBuf },
}

fn load_spec(path: &Path, common: &Common) -> Result<RunSpec> {
    let mut spec = parse_config(&fs::read_to_string(path)?)?;
    if let Some(seed) = common.seed {
        spec.initial.seed = seed;
    }
    Ok(spec)
}

fn out_dir(spec: &RunSpec, common: &Common, fallback: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn run(path: &Path, common: &Common) -> Result<bool> {
    let spec = load_spec(path, common)?;
    let out = out_dir(&spec, common, "out/run");
    let summary = run_single(&spec, &out)?;
    for c in &summary.checks {
        println!("{:<20} {:>12.4e} (limit {:.1e}) {}", c.name, c.value, c.limit, verdict(c.passed));
    }
    println!("wrote {}", out.display());
    Ok(summary.passed)
}

fn sweep(path: &Path, common: &Common) -> Result<bool> {
    let spec = load_spec(path, common)?;
    let out = out_dir(&spec, common, "out/sweep");
    let res = run_sweep(&spec)?;
    res.save(&spec, &out)?;
    let r = &res.report;
    println!("steps {}  min dt {:.3e}", r.steps, r.min_dt);
    for m in &r.members {
        println!("eps {:<8} terminal Ohm defect {:.4e}", m.eps, m.nsmo_residual_final);
    }
    let v = &r.verdict;
    println!("consecutive sup E  {:?}", v.consecutive_sup);
    println!("consecutive int D  {:?}", v.consecutive_int);
    println!("Ohm defect ratio   {:.4}", v.residual_ratio);
    if let Some(rate) = v.empirical_rate {
        println!("empirical rate     {rate:.3} (fitted, not a proven constant)");
    }
    println!("cauchy {}", verdict(v.cauchy));
    println!("wrote {}", out.display());
    Ok(v.cauchy)
}

fn check(name: &str, common: &Common) -> Result<bool> {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse()?]
    };
    let seed = common.seed.unwrap_or(1);
    let reports: Vec<_> = suites.into_iter().map(|s| run_property_suite(s, seed)).collect();
    for r in &reports {
        for c in &r.checks {
            println!("{:<10} {:<40} {:>12.4e} (limit {:.1e}) {}", r.suite, c.name, c.value, c.limit, verdict(c.passed));
        }
    }
    if let Some(out) = &common.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("checks.json"), serde_json::to_string_pretty(&reports)? + "\n")?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn inspect(path: &Path) -> Result<bool> {
    let snap = load_snapshot(path)?;
    let h = &snap.header;
    println!("{}", serde_json::to_string_pretty(h)?);
    let names = &h.fields;
    for (name, f) in names.iter().zip(snap.state.fields()) {
        println!("{name:<2} L2 {:.6e}  rel div {:.3e}", f.norm(), relative_divergence(f));
    }
    println!("L2 energy   {:.6e}", l2_energy(&snap.state, &h.params));
    let p = match &snap.state {
        SystemState::Plasma(p) => p.clone(),
        SystemState::Limit(l) => l.with_ohm_current(&h.params)?,
    };
    let params = match snap.state {
        SystemState::Plasma(_) => h.params,
        SystemState::Limit(_) => h.params.with_eps(0.0),
    };
    println!("E_cal       {:.6e}", energy_e(&p, &params, None));
    println!("D_cal       {:.6e}", dissipation_d(&p, &params, None));
    println!("Ohm defect  {:.6e}", nsmo_residual(&p, &h.params)?);
    Ok(true)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Run { config } => run(config, &cli.common),
        Command::Sweep { config } => sweep(config, &cli.common),
        Command::Check { suite } => check(suite, &cli.common),
        Command::Inspect { snapshot } => inspect(snapshot),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
