//! Instantaneous energy identities of the bulk and limit systems, and the
//! species round trip.
//!
//! cargo run --example energy_balance

use twofluid::harness::energy_balance_defects;
use twofluid::initial::{CurrentInit, InitialData};
use twofluid::spectral::{build_grid, SpectralField};
use twofluid::systems::{bulk_to_species, eqnsm_rhs, species_to_bulk, Params, SystemKind, SystemState};

fn main() -> twofluid::Result<()> {
    let p = Params::default().with_eps(0.05);
    for (d, n) in [(2, 64), (3, 16)] {
        let g = build_grid(d, n)?;
        let (bulk, limit) = energy_balance_defects(&g, &p, 3)?;
        println!("d={d} n={n}: bulk balance {bulk:.2e}, limit balance {limit:.2e}");
    }

    let g = build_grid(2, 64)?;
    let data = InitialData {
        current: CurrentInit::Ohm,
        ..Default::default()
    };
    let SystemState::Plasma(s) = data.build(&g, &p, SystemKind::Eqnsm)? else {
        unreachable!("bulk kind builds a plasma state")
    };
    let terms = eqnsm_rhs(&s, &p)?;
    println!(
        "|du| {:.3e}  |eps^2 dj| {:.3e}  |dE| {:.3e}  |dB| {:.3e}",
        terms.du().norm(),
        terms.eps2_dj().norm(),
        terms.de().norm(),
        terms.db().norm()
    );

    let back = species_to_bulk(&bulk_to_species(&s, &p)?, &p)?;
    println!("species round trip {:.2e}", (&back.u - &s.u).norm() + (&back.j - &s.j).norm());
    Ok(())
}
