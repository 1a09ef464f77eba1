//! Per-mode exponential propagation: nonlinearity-off runs against the dense
//! matrix exponential, stiff current relaxation, and second-order convergence.
//!
//! cargo run --example linear_propagator

use twofluid::harness::{linear_exactness, richardson_defect};
use twofluid::integrator::{stable_dt, Scheme, StepperConfig};
use twofluid::initial::{CurrentInit, InitialData};
use twofluid::spectral::build_grid;
use twofluid::systems::{Params, SystemKind};

fn main() -> twofluid::Result<()> {
    let g = build_grid(2, 16)?;
    for eps in [0.1, 0.01, 0.001] {
        let p = Params::default().with_eps(eps);
        let bulk = linear_exactness(&g, &p, SystemKind::Eqnsm, 0.05, 20, 1)?;
        let limit = linear_exactness(&g, &p, SystemKind::Nsmo, 0.05, 20, 1)?;
        println!("eps {eps:<6} dt 0.05: bulk defect {bulk:.2e}, limit defect {limit:.2e}");
    }

    let g = build_grid(2, 64)?;
    let p = Params::default().with_eps(0.05);
    let state = InitialData::default().build(&g, &p, SystemKind::Eqnsm)?;
    println!("stable dt at default data: {:.3e}", stable_dt(&state, &p, &StepperConfig::default())?);

    let g = build_grid(2, 32)?;
    for scheme in [Scheme::Etd2, Scheme::StrangExp] {
        let base = StepperConfig {
            scheme,
            ..Default::default()
        };
        let coarse = richardson_defect(&g, &p, 0.2, 4e-3, &base, CurrentInit::Ohm, 4)?;
        let fine = richardson_defect(&g, &p, 0.2, 2e-3, &base, CurrentInit::Ohm, 4)?;
        println!("{scheme:?}: step defects {coarse:.3e} -> {fine:.3e}, ratio {:.2}", coarse / fine);
    }
    Ok(())
}
