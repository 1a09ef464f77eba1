//! Besov norms, the Bony split of a product, and the frequency envelope of a
//! small initial state.
//!
//! cargo run --example besov_envelope

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twofluid::besov::{besov_norm, build_frequency_envelope, paraproduct, remainder, BesovSpec};
use twofluid::initial::{random_scalar, InitialData};
use twofluid::spectral::{build_grid, pointwise_product, SpectralField};
use twofluid::systems::Params;

fn main() -> twofluid::Result<()> {
    let g = build_grid(2, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_scalar(&g, &mut rng).scaled(1e-2);
    let h = random_scalar(&g, &mut rng).scaled(1e-2);

    for (s, p, r) in [(1.6, 2.0, 2.0), (0.5, 2.0, 1.0), (0.0, f64::INFINITY, f64::INFINITY), (1.0, f64::INFINITY, 2.0)] {
        println!("B^{s}_({p},{r}) = {:.6e}", besov_norm(&f, &BesovSpec::new(s, p, r)?)?);
    }

    let fg = pointwise_product(&f, &h)?;
    let (tf, tg, rr) = (paraproduct(&f, &h)?, paraproduct(&h, &f)?, remainder(&f, &h)?);
    let split = &(&tf + &tg) + &rr;
    println!(
        "|T_f h| {:.3e}  |T_h f| {:.3e}  |R| {:.3e}  split defect {:.2e}",
        tf.norm(),
        tg.norm(),
        rr.norm(),
        (&split - &fg).norm() / fg.norm()
    );

    let data = InitialData::default().fields(&g, &Params::default())?;
    let w = build_frequency_envelope(&data, 1.6)?;
    println!("envelope {:?}", w.values());
    println!("axioms hold: {}", w.satisfies_axioms());
    Ok(())
}
