use num_complex::Complex64;

use super::field::{AnyField, ScalarField, SpectralField, VectorField};
use super::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const HERMITIAN_TOL: f64 = 1e-10;

/// Forward transform of real samples (row-major, first axis slowest).
pub fn to_spectral(grid: &Grid, samples: &[f64]) -> Result<ScalarField> {
    if samples.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft().forward(&mut buf);
    let scale = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    ScalarField::from_coeffs(grid, buf)
}

/// Physical samples of a real field.
pub fn from_spectral(f: &ScalarField) -> Result<Vec<f64>> {
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOL * f.max_abs_coeff().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let mut buf = f.coeffs().to_vec();
    f.grid().fft().inverse(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    Grad,
    Div,
    Curl,
    Laplacian,
}

/// Rank-checked dispatch over the differential operators.
pub fn apply_derivative(f: &AnyField, kind: DerivativeKind) -> Result<AnyField> {
    match (kind, f) {
        (DerivativeKind::Grad, AnyField::Scalar(s)) => Ok(gradient(s).into()),
        (DerivativeKind::Div, AnyField::Vector(v)) => Ok(divergence(v).into()),
        (DerivativeKind::Curl, AnyField::Vector(v)) => Ok(curl(v).into()),
        (DerivativeKind::Laplacian, AnyField::Scalar(s)) => Ok(laplacian(s).into()),
        (DerivativeKind::Laplacian, AnyField::Vector(v)) => Ok(laplacian(v).into()),
        (DerivativeKind::Grad, _) => Err(Error::RankMismatch {
            op: "grad",
            expected: "scalar",
        }),
        (DerivativeKind::Div, _) => Err(Error::RankMismatch {
            op: "div",
            expected: "vector",
        }),
        (DerivativeKind::Curl, _) => Err(Error::RankMismatch {
            op: "curl",
            expected: "vector",
        }),
    }
}

/// `i xi f_hat`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let mut out = VectorField::zeros(grid);
    for (idx, &v) in f.coeffs().iter().enumerate() {
        let k = grid.wave(idx);
        out.set(idx, [I * k[0] * v, I * k[1] * v, I * k[2] * v]);
    }
    out
}

/// `i xi . v_hat`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut out = ScalarField::zeros(grid);
    for (idx, o) in out.coeffs_mut().iter_mut().enumerate() {
        let k = grid.wave(idx);
        let a = v.at(idx);
        *o = I * (k[0] * a[0] + k[1] * a[1] + k[2] * a[2]);
    }
    out
}

/// `i xi x v_hat`.
pub fn curl(v: &VectorField) -> VectorField {
    let grid = v.grid();
    let mut out = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let k = grid.wave(idx);
        let a = v.at(idx);
        out.set(
            idx,
            [
                I * (k[1] * a[2] - k[2] * a[1]),
                I * (k[2] * a[0] - k[0] * a[2]),
                I * (k[0] * a[1] - k[1] * a[0]),
            ],
        );
    }
    out
}

/// `-|xi|^2 f_hat`, component-wise.
pub fn laplacian<F: SpectralField>(f: &F) -> F {
    let ksq = f.grid().ksq().to_vec();
    f.apply_multiplier(|idx| -ksq[idx])
}

/// Projection onto divergence-free fields, `v - xi (xi.v)/|xi|^2`; the mean
/// mode is left untouched.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.grid();
    let mut out = v.clone();
    for idx in 1..grid.len() {
        let k = grid.wave(idx);
        let ksq = grid.ksq()[idx];
        let a = v.at(idx);
        let dot = (k[0] * a[0] + k[1] * a[1] + k[2] * a[2]) / ksq;
        out.set(idx, [a[0] - k[0] * dot, a[1] - k[1] * dot, a[2] - k[2] * dot]);
    }
    out
}

/// `||div v|| / ||grad v||`, a scale-free divergence measure (0 for `v = 0`).
pub fn relative_divergence(v: &VectorField) -> f64 {
    let grid = v.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..grid.len() {
        let k = grid.wave(idx);
        let a = v.at(idx);
        num += (k[0] * a[0] + k[1] * a[1] + k[2] * a[2]).norm_sqr();
        den += grid.ksq()[idx] * (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr());
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Sharp Fourier truncation to the ball `|xi| <= m`.
pub fn friedrichs_cutoff<F: SpectralField>(f: &F, m: f64) -> F {
    let r = f.grid().radii().to_vec();
    f.apply_multiplier(|idx| if r[idx] <= m { 1.0 } else { 0.0 })
}

/// Littlewood-Paley block `Delta_k f` (`k >= -1`).
pub fn dyadic_block<F: SpectralField>(f: &F, k: i32) -> Result<F> {
    if k < -1 {
        return Err(Error::InvalidArgument(format!("block index {k} < -1")));
    }
    let profile = f.grid().profile().clone();
    Ok(f.apply_multiplier(|idx| profile.weight(k, idx)))
}

/// Low-pass `S_k f = sum_{m <= k-1} Delta_m f` (`k >= 0`).
pub fn low_pass<F: SpectralField>(f: &F, k: i32) -> Result<F> {
    if k < 0 {
        return Err(Error::InvalidArgument(format!("low-pass index {k} < 0")));
    }
    let profile = f.grid().profile().clone();
    Ok(f.apply_multiplier(|idx| {
        let (lo, a, b) = profile.entry(idx);
        let mut w = 0.0;
        if lo <= k - 1 {
            w += a;
        }
        if lo + 1 <= k - 1 {
            w += b;
        }
        w
    }))
}

/// Physical values on the padded lattice of a batch of real fields.
pub(crate) fn to_padded(grid: &Grid, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let (a, b) = grid.padded_pair(pair[0], pair.get(1).copied());
        out.push(a);
        if pair.len() == 2 {
            out.push(b);
        }
    }
    out
}

/// Coarse-lattice coefficients of a batch of real padded-grid functions.
pub(crate) fn from_padded(grid: &Grid, values: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(values.len());
    for pair in values.chunks(2) {
        let (a, b) = grid.coarse_pair(&pair[0], pair.get(1).map(|v| v.as_slice()));
        out.push(a);
        if pair.len() == 2 {
            out.push(b);
        }
    }
    out
}

/// Dealiased pointwise product.
pub fn pointwise_product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.grid().same_as(g.grid())?;
    let grid = f.grid();
    let phys = to_padded(grid, &[f.coeffs(), g.coeffs()]);
    let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(a, b)| a * b).collect();
    let mut coarse = from_padded(grid, &[prod]);
    ScalarField::from_coeffs(grid, coarse.pop().expect("one product"))
}

/// Dealiased cross product `a x b`.
pub fn cross(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    a.grid().same_as(b.grid())?;
    let grid = a.grid();
    let phys = to_padded(
        grid,
        &[
            a.comp(0).coeffs(),
            a.comp(1).coeffs(),
            a.comp(2).coeffs(),
            b.comp(0).coeffs(),
            b.comp(1).coeffs(),
            b.comp(2).coeffs(),
        ],
    );
    let out = cross_physical(&phys[0..3], &phys[3..6]);
    vector_from_padded(grid, &out)
}

/// Dealiased advection `(a . grad) b`.
pub fn dot_grad(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    a.grid().same_as(b.grid())?;
    let grid = a.grid();
    let av = to_padded(grid, &[a.comp(0).coeffs(), a.comp(1).coeffs(), a.comp(2).coeffs()]);
    let gb = gradient_physical(grid, b);
    let out = advect_physical(grid.dim(), &av, &gb);
    vector_from_padded(grid, &out)
}

pub(crate) fn vector_from_padded(grid: &Grid, comps: &[Vec<f64>]) -> Result<VectorField> {
    let mut coarse = from_padded(grid, comps).into_iter();
    let mut next = || ScalarField::from_coeffs(grid, coarse.next().expect("three components"));
    VectorField::from_components([next()?, next()?, next()?])
}

/// Padded physical values of `d_j b_i`, indexed `[j][i]`; for `d = 2` the
/// `j = 2` row is absent (identically zero).
pub(crate) fn gradient_physical(grid: &Grid, b: &VectorField) -> Vec<Vec<Vec<f64>>> {
    let d = grid.dim();
    let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(3 * d);
    for j in 0..d {
        for i in 0..3 {
            let c = b.comp(i).coeffs();
            derivs.push(
                c.iter()
                    .enumerate()
                    .map(|(idx, &v)| I * grid.wave(idx)[j] * v)
                    .collect(),
            );
        }
    }
    let refs: Vec<&[Complex64]> = derivs.iter().map(|v| v.as_slice()).collect();
    let mut phys = to_padded(grid, &refs).into_iter();
    (0..d)
        .map(|_| (0..3).map(|_| phys.next().expect("derivative")).collect())
        .collect()
}

/// `(a . grad) b` from padded values of `a` and of `grad b` (`[j][i]`).
pub(crate) fn advect_physical(d: usize, a: &[Vec<f64>], grad_b: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let len = a[0].len();
    (0..3)
        .map(|i| {
            (0..len)
                .map(|p| (0..d).map(|j| a[j][p] * grad_b[j][i][p]).sum::<f64>())
                .collect()
        })
        .collect()
}

pub(crate) fn cross_physical(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = a[0].len();
    let mut out = vec![vec![0.0; len]; 3];
    for p in 0..len {
        out[0][p] = a[1][p] * b[2][p] - a[2][p] * b[1][p];
        out[1][p] = a[2][p] * b[0][p] - a[0][p] * b[2][p];
        out[2][p] = a[0][p] * b[1][p] - a[1][p] * b[0][p];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(grid: &Grid, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_vector(grid: &Grid, seed: u64) -> VectorField {
        let mut c = (0..3).map(|i| to_spectral(grid, &random_samples(grid, seed + i)).unwrap());
        VectorField::from_components([c.next().unwrap(), c.next().unwrap(), c.next().unwrap()]).unwrap()
    }

    #[test]
    fn cosine_samples_give_half_amplitudes() {
        let g = build_grid(2, 8).unwrap();
        let samples: Vec<f64> = (0..g.len()).map(|i| g.point(i)[0].cos()).collect();
        let f = to_spectral(&g, &samples).unwrap();
        for (idx, v) in f.coeffs().iter().enumerate() {
            let w = g.wave(idx);
            let expect = if w[1] == 0.0 && w[0].abs() == 1.0 { 0.5 } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-15);
        }
        let back = from_spectral(&f).unwrap();
        for (a, b) in back.iter().zip(&samples) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_samples_give_mean_mode() {
        let g = build_grid(3, 8).unwrap();
        let f = to_spectral(&g, &vec![2.5; g.len()]).unwrap();
        assert!((f.coeffs()[0].re - 2.5).abs() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = build_grid(2, 8).unwrap();
        assert!(matches!(to_spectral(&g, &[0.0; 10]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = build_grid(2, 8).unwrap();
        let mut f = ScalarField::zeros(&g);
        f.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(from_spectral(&f), Err(Error::NotHermitian { .. })));
        assert!(from_spectral(&ScalarField::zeros(&g)).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn transforms_match_brute_force_dft() {
        let g = build_grid(2, 8).unwrap();
        let samples = random_samples(&g, 7);
        let f = to_spectral(&g, &samples).unwrap();
        assert!(f.hermitian_defect() < 1e-14);
        for idx in 0..g.len() {
            let k = g.wave(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, &s) in samples.iter().enumerate() {
                let x = g.point(p);
                acc += s * Complex64::from_polar(1.0, -(k[0] * x[0] + k[1] * x[1]));
            }
            acc /= g.len() as f64;
            assert!((acc - f.coeffs()[idx]).norm() < 1e-12);
        }
        // inverse direction on the same coefficients
        let back = from_spectral(&f).unwrap();
        for (p, &b) in back.iter().enumerate() {
            let x = g.point(p);
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, &c) in f.coeffs().iter().enumerate() {
                let k = g.wave(idx);
                acc += c * Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            }
            assert!((acc.re - b).abs() < 1e-12 && acc.im.abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_plane_wave() {
        let g = build_grid(2, 8).unwrap();
        let f = ScalarField::cosine(&g, [1, 2, 0], 1.0, 0.3).unwrap();
        let lap = laplacian(&f);
        let diff = &lap + &f.scaled(5.0);
        assert!(diff.norm() < 1e-15);
    }

    #[test]
    fn derivative_identities() {
        let g = build_grid(3, 8).unwrap();
        let f = to_spectral(&g, &random_samples(&g, 3)).unwrap();
        let grad = gradient(&f);
        let dd = &divergence(&grad) - &laplacian(&f);
        assert!(dd.norm() <= 1e-14 * laplacian(&f).norm());
        assert!(curl(&grad).norm() <= 1e-13 * grad.norm());
        assert!(matches!(
            apply_derivative(&AnyField::Scalar(f), DerivativeKind::Curl),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn leray_kills_gradients_and_is_idempotent() {
        let g = build_grid(2, 16).unwrap();
        let phi = to_spectral(&g, &random_samples(&g, 11)).unwrap();
        let grad = gradient(&phi);
        assert!(leray_project(&grad).norm() < 1e-14 * grad.norm());

        let v = random_vector(&g, 20);
        let p = leray_project(&v);
        assert!(relative_divergence(&p) < 1e-14);
        let pp = leray_project(&p);
        assert!((&pp - &p).norm() < 1e-14 * p.norm());
        // per-mode 3x3 projector oracle
        for idx in 1..g.len() {
            let k = g.wave(idx);
            let ksq = g.ksq()[idx];
            let a = v.at(idx);
            let q = p.at(idx);
            for r in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..3 {
                    let m = if r == c { 1.0 } else { 0.0 } - k[r] * k[c] / ksq;
                    acc += m * a[c];
                }
                assert!((acc - q[r]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn product_of_modes_adds_frequencies() {
        let g = build_grid(2, 16).unwrap();
        let samples: Vec<f64> = (0..g.len()).map(|i| (g.point(i)[0]).cos()).collect();
        let f = to_spectral(&g, &samples).unwrap();
        let sq = pointwise_product(&f, &f).unwrap();
        // cos^2 = 1/2 + cos(2x)/2
        let expect = &ScalarField::constant(&g, 0.5) + &ScalarField::cosine(&g, [2, 0, 0], 0.5, 0.0).unwrap();
        assert!((&sq - &expect).norm() < 1e-15);
        let one = ScalarField::constant(&g, 1.0);
        assert!((&pointwise_product(&f, &one).unwrap() - &f).norm() < 1e-15);
    }

    #[test]
    fn product_matches_direct_convolution() {
        let g = build_grid(2, 16).unwrap();
        let band = |seed| {
            let f = to_spectral(&g, &random_samples(&g, seed)).unwrap();
            friedrichs_cutoff(&f, 7.0)
        };
        let (f, h) = (band(1), band(2));
        let prod = pointwise_product(&f, &h).unwrap();
        for idx in 0..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let k = g.wave(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..g.len() {
                let ka = g.wave(a);
                let kb = [(k[0] - ka[0]) as i64, (k[1] - ka[1]) as i64, 0];
                if let Some(b) = g.index_of(kb) {
                    acc += f.coeffs()[a] * h.coeffs()[b];
                }
            }
            assert!((acc - prod.coeffs()[idx]).norm() < 1e-12, "mode {k:?}");
        }
    }

    #[test]
    fn cutoff_behaviour() {
        let g = build_grid(2, 16).unwrap();
        let f = to_spectral(&g, &random_samples(&g, 5)).unwrap();
        let full = friedrichs_cutoff(&f, g.max_radius());
        assert!((&full - &f).norm() == 0.0);
        let wave = ScalarField::cosine(&g, [3, 4, 0], 1.0, 0.0).unwrap();
        assert_eq!(friedrichs_cutoff(&wave, 3.0).norm(), 0.0);
        let cut = friedrichs_cutoff(&f, 4.0);
        let direct: f64 = (0..g.len())
            .filter(|&i| g.radii()[i] <= 4.0)
            .map(|i| f.coeffs()[i].norm_sqr())
            .sum();
        assert!((cut.norm_sq() - direct).abs() < 1e-15);
        let twice = friedrichs_cutoff(&cut, 4.0);
        assert!((&twice - &cut).norm() == 0.0);
        assert!(cut.norm() <= f.norm());
    }

    #[test]
    fn blocks_partition_and_separate() {
        let g = build_grid(2, 32).unwrap();
        let f = to_spectral(&g, &random_samples(&g, 9)).unwrap();
        let top = g.profile().top();
        let mut sum = ScalarField::zeros(&g);
        for k in -1..=top {
            sum.axpy(1.0, &dyadic_block(&f, k).unwrap());
        }
        assert!((&sum - &f).norm() <= 1e-13 * f.norm());
        for m in -1..=top {
            for k in -1..=top {
                if (m - k).abs() >= 2 {
                    let mk = dyadic_block(&dyadic_block(&f, k).unwrap(), m).unwrap();
                    assert_eq!(mk.norm(), 0.0);
                }
            }
        }
        assert!(dyadic_block(&f, -2).is_err());
    }

    #[test]
    fn low_pass_is_partial_block_sum() {
        let g = build_grid(2, 32).unwrap();
        let f = to_spectral(&g, &random_samples(&g, 10)).unwrap();
        let s0 = low_pass(&f, 0).unwrap();
        assert!((&s0 - &dyadic_block(&f, -1).unwrap()).norm() < 1e-15);
        let s3 = low_pass(&f, 3).unwrap();
        let mut sum = ScalarField::zeros(&g);
        for k in -1..=2 {
            sum.axpy(1.0, &dyadic_block(&f, k).unwrap());
        }
        assert!((&s3 - &sum).norm() < 1e-15);
        let all = low_pass(&f, g.profile().top() + 1).unwrap();
        assert!((&all - &f).norm() <= 1e-13 * f.norm());
    }

    #[test]
    fn plane_wave_of_radius_two_lives_in_blocks_zero_and_one() {
        let g = build_grid(2, 16).unwrap();
        let f = ScalarField::cosine(&g, [2, 0, 0], 1.0, 0.0).unwrap();
        let b0 = dyadic_block(&f, 0).unwrap();
        let b1 = dyadic_block(&f, 1).unwrap();
        let expect0 = crate::spectral::phi(2.0);
        let expect1 = crate::spectral::phi(1.0);
        assert!((b0.norm() - expect0 * f.norm()).abs() < 1e-15);
        assert!((b1.norm() - expect1 * f.norm()).abs() < 1e-15);
        assert!((expect0 + expect1 - 1.0).abs() < 1e-15);
        for k in [-1, 2, 3] {
            assert_eq!(dyadic_block(&f, k).unwrap().norm(), 0.0);
        }
    }
}
