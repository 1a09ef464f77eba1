//! Periodic spectral discretization on the torus `[0, 2pi)^d`.
//!
//! Fields are stored as Fourier coefficients with the convention
//! `f(x) = sum_xi f_hat(xi) e^{i xi.x}`, so `||f||^2 = sum |f_hat|^2`
//! (the `(2pi)^d` volume factor is dropped everywhere). Coefficients are laid
//! out row-major over the axes, first axis slowest, each axis in FFT order:
//! index `i` carries frequency `i` for `i < n/2` and `i - n` otherwise.

mod dyadic;
mod fft;
mod field;
mod ops;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dyadic::{block_multiplier, ANNULUS_INNER, ANNULUS_OUTER, chi, phi, smooth_step, top_block, DyadicProfile};
pub use field::{AnyField, ScalarField, SpectralField, VectorField};
pub use ops::{
    apply_derivative, cross, curl, divergence, dot_grad, dyadic_block, friedrichs_cutoff,
    from_spectral, gradient, laplacian, leray_project, low_pass, pointwise_product,
    relative_divergence, to_spectral, DerivativeKind,
};

pub(crate) use fft::FftNd;
pub(crate) use ops::{
    advect_physical, cross_physical, from_padded, gradient_physical, to_padded,
};

/// Periodic lattice shared by every field of a run. Cloning is cheap.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    len: usize,
    wave: Vec<[f64; 3]>,
    ksq: Vec<f64>,
    radius: Vec<f64>,
    neg: Vec<usize>,
    nyquist: Vec<bool>,
    profile: DyadicProfile,
    fft: FftNd,
    padded: PaddedGrid,
}

/// 3/2-rule padded lattice used for quadratic products.
struct PaddedGrid {
    m: usize,
    fft: FftNd,
    /// position of each coarse lattice point inside the padded array
    embed: Vec<usize>,
    /// index of `-xi` on the padded lattice
    neg: Vec<usize>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid(d={}, n={})", self.dim(), self.n())
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim() && self.n() == other.n())
    }
}

fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn multi_index(mut idx: usize, dim: usize, n: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    for axis in (0..dim).rev() {
        out[axis] = idx % n;
        idx /= n;
    }
    out
}

fn flat_index(ix: &[usize; 3], dim: usize, n: usize) -> usize {
    ix[..dim].iter().fold(0, |acc, &i| acc * n + i)
}

impl Grid {
    /// Builds the lattice for dimension `d` with `n` modes per axis.
    pub fn new(d: usize, n: usize) -> Result<Grid> {
        if d != 2 && d != 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidModeCount(n));
        }
        let len = n.pow(d as u32);
        let mut wave = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        let mut nyquist = Vec::with_capacity(len);
        for idx in 0..len {
            let ix = multi_index(idx, d, n);
            let mut k = [0.0; 3];
            let mut nix = [0usize; 3];
            let mut nyq = false;
            for axis in 0..d {
                k[axis] = signed_freq(ix[axis], n) as f64;
                nix[axis] = (n - ix[axis]) % n;
                nyq |= ix[axis] == n / 2;
            }
            wave.push(k);
            neg.push(flat_index(&nix, d, n));
            nyquist.push(nyq);
        }
        let ksq: Vec<f64> = wave.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        let radius: Vec<f64> = ksq.iter().map(|v| v.sqrt()).collect();
        let r_max = (n as f64 / 2.0) * (d as f64).sqrt();
        let profile = DyadicProfile::tabulate(&radius, r_max);

        let m = 3 * n / 2;
        let plen = m.pow(d as u32);
        let mut embed = Vec::with_capacity(len);
        for w in &wave {
            let mut pix = [0usize; 3];
            for axis in 0..d {
                let f = w[axis] as i64;
                pix[axis] = if f >= 0 { f as usize } else { (m as i64 + f) as usize };
            }
            embed.push(flat_index(&pix, d, m));
        }
        let pneg = (0..plen)
            .map(|idx| {
                let ix = multi_index(idx, d, m);
                let mut nix = [0usize; 3];
                for axis in 0..d {
                    nix[axis] = (m - ix[axis]) % m;
                }
                flat_index(&nix, d, m)
            })
            .collect();

        Ok(Grid {
            inner: Arc::new(GridInner {
                dim: d,
                n,
                len,
                wave,
                ksq,
                radius,
                neg,
                nyquist,
                profile,
                fft: FftNd::new(d, n),
                padded: PaddedGrid {
                    m,
                    fft: FftNd::new(d, m),
                    embed,
                    neg: pneg,
                },
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Modes per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    /// Physical spacing `2pi/n` on every axis.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.inner.n as f64
    }

    /// Integer wave vector at `idx` (third component zero when `d = 2`).
    #[inline]
    pub fn wave(&self, idx: usize) -> [f64; 3] {
        self.inner.wave[idx]
    }

    pub fn waves(&self) -> &[[f64; 3]] {
        &self.inner.wave
    }

    /// `|xi|^2` at every lattice point.
    pub fn ksq(&self) -> &[f64] {
        &self.inner.ksq
    }

    /// `|xi|` at every lattice point.
    pub fn radii(&self) -> &[f64] {
        &self.inner.radius
    }

    /// Largest lattice radius, `(n/2) sqrt(d)`.
    pub fn max_radius(&self) -> f64 {
        (self.inner.n as f64 / 2.0) * (self.inner.dim as f64).sqrt()
    }

    /// Largest per-axis frequency magnitude kept by products, `n/2 - 1`.
    pub fn k_max(&self) -> f64 {
        (self.inner.n / 2 - 1) as f64
    }

    /// Default Friedrichs radius: the largest ball free of the unpaired
    /// `-n/2` row, on which 3/2-padded products are exactly alias-free.
    pub fn dealiased_radius(&self) -> f64 {
        self.k_max()
    }

    /// Index of `-xi` (modulo the lattice).
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        self.inner.neg[idx]
    }

    /// True on the unpaired `-n/2` rows.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.inner.nyquist[idx]
    }

    pub fn profile(&self) -> &DyadicProfile {
        &self.inner.profile
    }

    /// Physical coordinate of sample `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Physical point of flat sample index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ix = multi_index(idx, self.dim(), self.n());
        let mut x = [0.0; 3];
        for axis in 0..self.dim() {
            x[axis] = self.coordinate(ix[axis]);
        }
        x
    }

    /// Flat index of the lattice frequency `xi`, if representable.
    pub fn index_of(&self, xi: [i64; 3]) -> Option<usize> {
        let n = self.n() as i64;
        let mut ix = [0usize; 3];
        for axis in 0..3 {
            if axis >= self.dim() {
                if xi[axis] != 0 {
                    return None;
                }
                continue;
            }
            let f = xi[axis];
            if f < -n / 2 || f >= n / 2 {
                return None;
            }
            ix[axis] = if f >= 0 { f as usize } else { (n + f) as usize };
        }
        Some(flat_index(&ix, self.dim(), self.n()))
    }

    pub(crate) fn fft(&self) -> &FftNd {
        &self.inner.fft
    }

    /// Padded lattice size per axis.
    pub fn padded_n(&self) -> usize {
        self.inner.padded.m
    }

    /// Physical values of two real fields on the padded lattice, packed into
    /// one complex transform (`f + i g`).
    pub(crate) fn padded_pair(&self, f: &[Complex64], g: Option<&[Complex64]>) -> (Vec<f64>, Vec<f64>) {
        let pg = &self.inner.padded;
        let mut buf = vec![Complex64::new(0.0, 0.0); pg.fft.len()];
        let i = Complex64::new(0.0, 1.0);
        for (idx, &p) in pg.embed.iter().enumerate() {
            if self.inner.nyquist[idx] {
                continue;
            }
            let mut v = f[idx];
            if let Some(g) = g {
                v += i * g[idx];
            }
            buf[p] = v;
        }
        pg.fft.inverse(&mut buf);
        let re = buf.iter().map(|c| c.re).collect();
        let im = if g.is_some() { buf.iter().map(|c| c.im).collect() } else { Vec::new() };
        (re, im)
    }

    /// Coarse-lattice coefficients of two real padded-grid functions
    /// (`b` may be absent). Frequencies outside the coarse lattice and the
    /// unpaired `-n/2` rows are dropped.
    pub(crate) fn coarse_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<Complex64>, Vec<Complex64>) {
        let pg = &self.inner.padded;
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        pg.fft.forward(&mut buf);
        let scale = 1.0 / pg.fft.len() as f64;
        let zero = Complex64::new(0.0, 0.0);
        let mut out_a = vec![zero; self.len()];
        let mut out_b = if b.is_some() { vec![zero; self.len()] } else { Vec::new() };
        for (idx, &p) in pg.embed.iter().enumerate() {
            if self.inner.nyquist[idx] {
                continue;
            }
            let z = buf[p];
            if b.is_some() {
                let zc = buf[pg.neg[p]].conj();
                out_a[idx] = 0.5 * (z + zc) * scale;
                out_b[idx] = Complex64::new(0.0, -0.5) * (z - zc) * scale;
            } else {
                out_a[idx] = z * scale;
            }
        }
        (out_a, out_b)
    }

    pub(crate) fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{self:?}"),
                right: format!("{other:?}"),
            })
        }
    }
}

/// Builds a grid, mirroring the `build_grid` operation.
pub fn build_grid(d: usize, n: usize) -> Result<Grid> {
    Grid::new(d, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = build_grid(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g.spacing() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(build_grid(3, 32).unwrap().len(), 32768);
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(matches!(build_grid(1, 8), Err(Error::UnsupportedDimension(1))));
        assert!(matches!(build_grid(4, 8), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(build_grid(2, 9), Err(Error::InvalidModeCount(9))));
        assert!(matches!(build_grid(2, 6), Err(Error::InvalidModeCount(6))));
    }

    #[test]
    fn negation_map_is_an_involution() {
        let g = build_grid(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.neg_index(g.neg_index(idx)), idx);
            if !g.is_nyquist(idx) {
                let (a, b) = (g.wave(idx), g.wave(g.neg_index(idx)));
                for axis in 0..3 {
                    assert_eq!(a[axis], -b[axis]);
                }
            }
        }
    }

    #[test]
    fn index_of_round_trips() {
        let g = build_grid(2, 8).unwrap();
        for idx in 0..g.len() {
            let w = g.wave(idx);
            let xi = [w[0] as i64, w[1] as i64, w[2] as i64];
            assert_eq!(g.index_of(xi), Some(idx));
        }
        assert_eq!(g.index_of([4, 0, 0]), None);
        assert_eq!(g.index_of([0, 0, 1]), None);
    }
}
