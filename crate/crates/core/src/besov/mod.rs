//! Besov and weighted Besov norms, the low/high frequency split of `H^s`,
//! frequency envelopes and the Bony paraproduct calculus.
//!
//! `||Delta_k f||_{L^2}` is an exact lattice sum; `||Delta_k f||_{L^inf}` is
//! the maximum over the physical grid (a lower bound for the true supremum).

mod bony;
mod weight;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dyadic_block, from_spectral, SpectralField, VectorField};

pub use bony::{paraproduct, remainder};
pub use weight::{build_frequency_envelope, FrequencyWeight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lebesgue {
    Two,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summation {
    One,
    Two,
    Inf,
}

impl Lebesgue {
    pub fn from_exponent(p: f64) -> Result<Self> {
        if p == 2.0 {
            Ok(Lebesgue::Two)
        } else if p == f64::INFINITY {
            Ok(Lebesgue::Inf)
        } else {
            Err(Error::UnsupportedExponent(format!("p = {p} (supported: 2, inf)")))
        }
    }
}

impl Summation {
    pub fn from_exponent(r: f64) -> Result<Self> {
        if r == 1.0 {
            Ok(Summation::One)
        } else if r == 2.0 {
            Ok(Summation::Two)
        } else if r == f64::INFINITY {
            Ok(Summation::Inf)
        } else {
            Err(Error::UnsupportedExponent(format!("r = {r} (supported: 1, 2, inf)")))
        }
    }
}

/// Indices of `B^s_{p,r}` and an optional frequency weight.
#[derive(Clone, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Lebesgue,
    pub r: Summation,
    pub weight: Option<FrequencyWeight>,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        Ok(BesovSpec {
            s,
            p: Lebesgue::from_exponent(p)?,
            r: Summation::from_exponent(r)?,
            weight: None,
        })
    }

    /// `H^s = B^s_{2,2}`.
    pub fn sobolev(s: f64) -> Self {
        BesovSpec {
            s,
            p: Lebesgue::Two,
            r: Summation::Two,
            weight: None,
        }
    }

    pub fn with_weight(mut self, weight: FrequencyWeight) -> Self {
        self.weight = Some(weight);
        self
    }
}

/// `||Delta_k f||_{L^2}^2` for `k = -1..=top` (index 0 is block `-1`).
pub fn block_energies<F: SpectralField>(f: &F) -> Vec<f64> {
    let profile = f.grid().profile();
    let mut out = vec![0.0; profile.block_count()];
    for c in f.components() {
        for (idx, v) in c.coeffs().iter().enumerate() {
            let (lo, a, b) = profile.entry(idx);
            let e = v.norm_sqr();
            let i = (lo + 1) as usize;
            out[i] += a * a * e;
            if b != 0.0 {
                out[i + 1] += b * b * e;
            }
        }
    }
    out
}

/// `||Delta_k grad f||_{L^2}^2` for `k = -1..=top`.
pub fn gradient_block_energies<F: SpectralField>(f: &F) -> Vec<f64> {
    let grid = f.grid();
    let profile = grid.profile();
    let ksq = grid.ksq();
    let mut out = vec![0.0; profile.block_count()];
    for c in f.components() {
        for (idx, v) in c.coeffs().iter().enumerate() {
            let (lo, a, b) = profile.entry(idx);
            let e = v.norm_sqr() * ksq[idx];
            let i = (lo + 1) as usize;
            out[i] += a * a * e;
            if b != 0.0 {
                out[i + 1] += b * b * e;
            }
        }
    }
    out
}

/// `||Delta_k f||_{L^inf}` for `k = -1..=top`, pointwise Euclidean norm for
/// vector fields, maximised over the physical grid.
pub fn block_sup_norms<F: SpectralField>(f: &F) -> Result<Vec<f64>> {
    let top = f.grid().profile().top();
    (-1..=top)
        .map(|k| sup_norm(&dyadic_block(f, k)?))
        .collect()
}

/// Physical-grid maximum of `|f(x)|`.
pub fn sup_norm<F: SpectralField>(f: &F) -> Result<f64> {
    let mut sq = vec![0.0; f.grid().len()];
    for c in f.components() {
        for (acc, v) in sq.iter_mut().zip(from_spectral(c)?) {
            *acc += v * v;
        }
    }
    Ok(sq.into_iter().fold(0.0, f64::max).sqrt())
}

/// Weighted dyadic `l^2` sum `sum_k w_k^2 2^{2ks} e_k` restricted to blocks
/// `k in [from, to]`, where `e[i]` is the squared block norm of block `i - 1`.
pub fn dyadic_sum_sq(e: &[f64], s: f64, weight: Option<&FrequencyWeight>, from: i32, to: i32) -> f64 {
    let mut acc = 0.0;
    for (i, &ek) in e.iter().enumerate() {
        let k = i as i32 - 1;
        if k < from || k > to || ek == 0.0 {
            continue;
        }
        let w = weight.and_then(|w| w.get(k)).unwrap_or(1.0);
        acc += w * w * f64::powf(2.0, 2.0 * k as f64 * s) * ek;
    }
    acc
}

fn check_weight_cover(weight: Option<&FrequencyWeight>, top: i32) -> Result<()> {
    match weight {
        Some(w) if w.top() < top => Err(Error::InvalidArgument(format!(
            "weight covers blocks up to {} but the field is active up to {top}",
            w.top()
        ))),
        _ => Ok(()),
    }
}

/// `||f||_{B^s_{p,r}(omega)}`.
pub fn besov_norm<F: SpectralField>(f: &F, spec: &BesovSpec) -> Result<f64> {
    let top = f.grid().profile().top();
    check_weight_cover(spec.weight.as_ref(), top)?;
    let block_norms: Vec<f64> = match spec.p {
        Lebesgue::Two => block_energies(f).into_iter().map(f64::sqrt).collect(),
        Lebesgue::Inf => block_sup_norms(f)?,
    };
    let terms = block_norms.iter().enumerate().map(|(i, &b)| {
        let k = i as i32 - 1;
        let w = spec.weight.as_ref().and_then(|w| w.get(k)).unwrap_or(1.0);
        w * f64::powf(2.0, k as f64 * spec.s) * b
    });
    Ok(match spec.r {
        Summation::One => terms.sum(),
        Summation::Two => terms.map(|t| t * t).sum::<f64>().sqrt(),
        Summation::Inf => terms.fold(0.0, f64::max),
    })
}

/// `||f||_{H^s}`.
pub fn sobolev_norm<F: SpectralField>(f: &F, s: f64) -> f64 {
    dyadic_sum_sq(&block_energies(f), s, None, -1, i32::MAX).sqrt()
}

/// `(||f||_{H^s_{<=k0}}, ||f||_{H^s_{>k0}})`.
pub fn sobolev_split<F: SpectralField>(f: &F, s: f64, k0: i32) -> (f64, f64) {
    let e = block_energies(f);
    (
        dyadic_sum_sq(&e, s, None, -1, k0).sqrt(),
        dyadic_sum_sq(&e, s, None, k0 + 1, i32::MAX).sqrt(),
    )
}

/// `||u||_{L^inf} / ||grad u||_{H^{s'}}` for a zero-mean field.
pub fn linf_bound_check(u: &VectorField, s_prime: f64) -> Result<f64> {
    if !(s_prime > 0.5) {
        return Err(Error::InvalidArgument(format!("s' = {s_prime} must exceed 1/2")));
    }
    let den = dyadic_sum_sq(&gradient_block_energies(u), s_prime, None, -1, i32::MAX).sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument("zero gradient norm".into()));
    }
    Ok(sup_norm(u)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, to_spectral, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ScalarField {
        let g = build_grid(2, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        to_spectral(&g, &s).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = build_grid(2, 16).unwrap();
        let z = ScalarField::zeros(&g);
        for (p, r) in [(2.0, 1.0), (2.0, 2.0), (f64::INFINITY, f64::INFINITY), (f64::INFINITY, 1.0)] {
            assert_eq!(besov_norm(&z, &BesovSpec::new(1.3, p, r).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn unsupported_exponents_are_rejected() {
        assert!(matches!(BesovSpec::new(1.0, 3.0, 2.0), Err(Error::UnsupportedExponent(_))));
        assert!(matches!(BesovSpec::new(1.0, 2.0, 4.0), Err(Error::UnsupportedExponent(_))));
    }

    #[test]
    fn single_block_wave_matches_definition() {
        // |xi| = 4 sqrt 2 sits only in block 2 (phi = 1 on [4/3, 3/2])
        let g = build_grid(2, 16).unwrap();
        let f = ScalarField::cosine(&g, [4, 4, 0], 2.0, 0.1).unwrap();
        let e = block_energies(&f);
        assert!((e[3] - f.norm_sq()).abs() < 1e-15);
        let s = 1.6;
        let hs = besov_norm(&f, &BesovSpec::sobolev(s)).unwrap();
        assert!((hs - f64::powf(2.0, 2.0 * s) * f.norm()).abs() < 1e-12);
        let w = FrequencyWeight::new(vec![1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2], 0.5).unwrap();
        let hw = besov_norm(&f, &BesovSpec::sobolev(s).with_weight(w)).unwrap();
        assert!((hw - 1.6 * hs).abs() < 1e-12);
    }

    #[test]
    fn norms_follow_the_dyadic_definition() {
        let f = random_field(32, 4);
        let s = 0.7;
        let top = f.grid().profile().top();
        let w = FrequencyWeight::new((0..=top + 1).map(|i| 1.0 + 0.1 * i as f64).collect(), 0.5).unwrap();
        let blocks: Vec<f64> = (-1..=top)
            .map(|k| dyadic_block(&f, k).unwrap().norm())
            .collect();
        let direct_l2: f64 = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (w.values()[i] * f64::powf(2.0, (i as f64 - 1.0) * s) * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let spec = BesovSpec::sobolev(s).with_weight(w.clone());
        assert!((besov_norm(&f, &spec).unwrap() - direct_l2).abs() < 1e-12 * direct_l2);
        let direct_l1: f64 = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| f64::powf(2.0, (i as f64 - 1.0) * s) * b)
            .sum();
        let b1 = besov_norm(&f, &BesovSpec::new(s, 2.0, 1.0).unwrap()).unwrap();
        assert!((b1 - direct_l1).abs() < 1e-12 * direct_l1);
        // weights >= 1 never decrease a norm
        assert!(besov_norm(&f, &BesovSpec::sobolev(s)).unwrap() <= besov_norm(&f, &spec).unwrap());
    }

    #[test]
    fn short_weight_is_rejected() {
        let f = random_field(32, 4);
        let spec = BesovSpec::sobolev(1.0).with_weight(FrequencyWeight::unit(1));
        assert!(besov_norm(&f, &spec).is_err());
    }

    #[test]
    fn split_is_pythagorean() {
        let f = random_field(32, 8);
        let s = 1.6;
        let full = sobolev_norm(&f, s);
        for k0 in -1..=6 {
            let (lo, hi) = sobolev_split(&f, s, k0);
            assert!((lo * lo + hi * hi - full * full).abs() <= 1e-12 * full * full);
        }
        let top = f.grid().profile().top();
        let (lo, hi) = sobolev_split(&f, s, top);
        assert_eq!(hi, 0.0);
        assert!((lo - full).abs() <= 1e-14 * full);
        // no mean mode means no block -1 content
        let mut g = f.clone();
        for (idx, v) in g.coeffs_mut().iter_mut().enumerate() {
            if f.grid().radii()[idx] < 4.0 / 3.0 {
                *v = 0.0.into();
            }
        }
        let (lo, hi) = sobolev_split(&g, s, -1);
        assert_eq!(lo, 0.0);
        assert!((hi - sobolev_norm(&g, s)).abs() < 1e-14 * hi);
    }

    #[test]
    fn low_frequency_lift_costs_at_most_the_block_overlap() {
        // ||f||_{H^{s+1}_{<=k0}} <= (8/3) 2^{k0} ||f||_{H^s_{<=k0}}: each block k <= k0
        // is lifted by 2^k <= 2^{k0}, so C = 1 on the dyadic definition
        let f = random_field(32, 12);
        for k0 in 0..=5 {
            let (lo1, _) = sobolev_split(&f, 2.6, k0);
            let (lo0, _) = sobolev_split(&f, 1.6, k0);
            assert!(lo1 <= f64::powi(2.0, k0) * lo0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn linf_ratio_of_a_plane_wave() {
        let g = build_grid(2, 16).unwrap();
        let c = ScalarField::cosine(&g, [0, 3, 0], 0.8, 0.0).unwrap();
        let u = VectorField::from_components([c, ScalarField::zeros(&g), ScalarField::zeros(&g)]).unwrap();
        let sp = 0.8;
        // |xi| = 3 is interior to block 1; summing blocks 0 and 1 is the same
        let grad_hs_sq: f64 = (0..=1)
            .map(|k| {
                let m = crate::spectral::block_multiplier(k, 3.0);
                f64::powf(2.0, 2.0 * k as f64 * sp) * m * m * 9.0 * u.norm_sq()
            })
            .sum();
        let expect = 0.8 / grad_hs_sq.sqrt();
        let ratio = linf_bound_check(&u, sp).unwrap();
        assert!((ratio - expect).abs() < 1e-12 * expect);
        let u2 = u.scaled(2.0);
        assert!((linf_bound_check(&u2, sp).unwrap() - ratio).abs() < 1e-12 * ratio);
        assert!(linf_bound_check(&u, 0.5).is_err());
        assert!(linf_bound_check(&VectorField::zeros(&g), 1.0).is_err());
    }
}
