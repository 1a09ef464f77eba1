//! Writing a state to the binary snapshot format and reading it back.
//!
//! cargo run --example snapshot_io

use twofluid::initial::{InitialData, Recipe};
use twofluid::snapshot::{load_snapshot, save_snapshot};
use twofluid::spectral::{build_grid, SpectralField};
use twofluid::systems::{Params, SystemKind};

fn main() -> twofluid::Result<()> {
    let g = build_grid(3, 16)?;
    let p = Params::default().with_eps(0.2);
    let data = InitialData {
        recipe: Recipe::TaylorGreen,
        ..Default::default()
    };
    let state = data.build(&g, &p, SystemKind::Nsmo)?;
    let path = std::env::temp_dir().join("twofluid-example.snap");
    save_snapshot(&path, &state, &p)?;

    let snap = load_snapshot(&path)?;
    println!("{} bytes at {}", std::fs::metadata(&path)?.len(), path.display());
    println!("header {:?}", snap.header);
    for (name, (a, b)) in snap.header.fields.iter().zip(state.fields().into_iter().zip(snap.state.fields())) {
        println!("{name}: |f| {:.6e}, round-trip defect {:.1e}", a.norm(), (a - b).norm());
    }
    Ok(())
}
