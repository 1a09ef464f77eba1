use crate::error::Result;
use crate::spectral::ScalarField;

/// Padded physical values of every block `Delta_k f`, `k = -1..=top`.
fn padded_blocks(f: &ScalarField) -> Vec<Vec<f64>> {
    let grid = f.grid();
    let top = grid.profile().top();
    let blocks: Vec<Vec<_>> = (-1..=top)
        .map(|k| {
            let profile = grid.profile();
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(idx, &v)| v * profile.weight(k, idx))
                .collect()
        })
        .collect();
    let refs: Vec<&[_]> = blocks.iter().map(|b| b.as_slice()).collect();
    crate::spectral::to_padded(grid, &refs)
}

fn collapse(f: &ScalarField, acc: Vec<f64>) -> Result<ScalarField> {
    let mut coarse = crate::spectral::from_padded(f.grid(), &[acc]);
    ScalarField::from_coeffs(f.grid(), coarse.pop().expect("one field"))
}

/// Paraproduct `T_f g = sum_{l >= 1} S_{l-1} f Delta_l g`, with
/// `S_{l-1} = sum_{m <= l-2} Delta_m`.
pub fn paraproduct(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.grid().same_as(g.grid())?;
    let bf = padded_blocks(f);
    let bg = padded_blocks(g);
    let len = bf[0].len();
    let mut acc = vec![0.0; len];
    let mut low = vec![0.0; len];
    // block index i corresponds to k = i - 1; S_{l-1} for l = i - 1 sums bf[0..i-1]
    for i in 2..bg.len() {
        for (s, v) in low.iter_mut().zip(&bf[i - 2]) {
            *s += v;
        }
        for ((a, s), v) in acc.iter_mut().zip(&low).zip(&bg[i]) {
            *a += s * v;
        }
    }
    collapse(f, acc)
}

/// Remainder `R(f, g) = sum_{|k - l| <= 1} Delta_k f Delta_l g`.
pub fn remainder(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.grid().same_as(g.grid())?;
    let bf = padded_blocks(f);
    let bg = padded_blocks(g);
    let len = bf[0].len();
    let nb = bf.len();
    let mut acc = vec![0.0; len];
    for k in 0..nb {
        for l in k.saturating_sub(1)..(k + 2).min(nb) {
            for ((a, x), y) in acc.iter_mut().zip(&bf[k]).zip(&bg[l]) {
                *a += x * y;
            }
        }
    }
    collapse(f, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use crate::spectral::{build_grid, dyadic_block, pointwise_product, to_spectral};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> ScalarField {
        let g = build_grid(2, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        to_spectral(&g, &s).unwrap()
    }

    #[test]
    fn decomposition_is_exact() {
        let f = random(16, 1);
        let g = random(16, 2);
        let fg = pointwise_product(&f, &g).unwrap();
        let mut sum = paraproduct(&f, &g).unwrap();
        sum.axpy(1.0, &paraproduct(&g, &f).unwrap());
        sum.axpy(1.0, &remainder(&f, &g).unwrap());
        assert!((&sum - &fg).norm() < 1e-12 * fg.norm());
    }

    #[test]
    fn paraproduct_matches_block_pair_sum() {
        let f = random(16, 3);
        let g = random(16, 4);
        let top = f.grid().profile().top();
        let mut expect = ScalarField::zeros(f.grid());
        for l in 1..=top {
            for m in -1..=l - 2 {
                let p = pointwise_product(&dyadic_block(&f, m).unwrap(), &dyadic_block(&g, l).unwrap()).unwrap();
                expect.axpy(1.0, &p);
            }
        }
        let got = paraproduct(&f, &g).unwrap();
        assert!((&got - &expect).norm() < 1e-12 * expect.norm());
        let mut expect_r = ScalarField::zeros(f.grid());
        for k in -1..=top {
            for l in (k - 1).max(-1)..=(k + 1).min(top) {
                let p = pointwise_product(&dyadic_block(&f, k).unwrap(), &dyadic_block(&g, l).unwrap()).unwrap();
                expect_r.axpy(1.0, &p);
            }
        }
        let got_r = remainder(&f, &g).unwrap();
        assert!((&got_r - &expect_r).norm() < 1e-12 * expect_r.norm());
    }

    #[test]
    fn paraproduct_with_a_constant() {
        // S_{l-1} 1 = 1 for l >= 1, so T_1 g = g - Delta_{-1} g - Delta_0 g
        let g = random(16, 5);
        let one = ScalarField::constant(g.grid(), 1.0);
        let t = paraproduct(&one, &g).unwrap();
        let mut expect = g.clone();
        expect.axpy(-1.0, &dyadic_block(&g, -1).unwrap());
        expect.axpy(-1.0, &dyadic_block(&g, 0).unwrap());
        // the product drops the Nyquist rows
        let nyq: Vec<bool> = (0..g.grid().len()).map(|i| g.grid().is_nyquist(i)).collect();
        let expect = expect.apply_multiplier(|i| if nyq[i] { 0.0 } else { 1.0 });
        assert!((&t - &expect).norm() < 1e-12 * expect.norm());
    }
}
