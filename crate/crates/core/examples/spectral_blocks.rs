//! Dyadic decomposition of a random field, Leray projection and the FFT
//! round trip on the 2D torus.
//!
//! cargo run --example spectral_blocks

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twofluid::initial::random_scalar;
use twofluid::spectral::{
    build_grid, dyadic_block, from_spectral, leray_project, relative_divergence, to_spectral, ScalarField,
    SpectralField, VectorField,
};

fn main() -> twofluid::Result<()> {
    let g = build_grid(2, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_scalar(&g, &mut rng);
    let top = g.profile().top();

    println!("block   energy        share");
    let mut sum = ScalarField::zeros(&g);
    for k in -1..=top {
        let b = dyadic_block(&f, k)?;
        println!("{k:>5}   {:.6e}  {:.4}", b.norm_sq(), b.norm_sq() / f.norm_sq());
        sum.axpy(1.0, &b);
    }
    println!("reconstruction defect {:.2e}", (&sum - &f).norm() / f.norm());

    let v = VectorField::from_components([
        random_scalar(&g, &mut rng),
        random_scalar(&g, &mut rng),
        random_scalar(&g, &mut rng),
    ])?;
    let pv = leray_project(&v);
    println!("divergence before {:.3e}, after {:.3e}", relative_divergence(&v), relative_divergence(&pv));

    let samples = from_spectral(&f)?;
    let back = to_spectral(&g, &samples)?;
    println!("fft round trip {:.2e} over {} samples", (&back - &f).norm() / f.norm(), samples.len());
    Ok(())
}
