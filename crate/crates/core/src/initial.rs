//! Named initial-data recipes, normalised to a target Sobolev energy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::energy_e;
use crate::error::{Error, Result};
use crate::spectral::{leray_project, Grid, ScalarField, SpectralField, VectorField};
use crate::systems::{nsmo_ohm, LimitState, Params, PlasmaState, SystemKind, SystemState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Recipe {
    Zero,
    /// Taylor-Green velocity cell with an out-of-plane magnetic cell.
    TaylorGreen,
    /// Independent random solenoidal `u`, `E`, `B` on `1 <= |xi| <= kmax`
    /// with coefficient magnitudes `~ |xi|^-decay`.
    RandomSolenoidal { kmax: f64, decay: f64 },
    /// One transverse electric plane wave at `xi`, everything else zero.
    MaxwellMode { xi: [i64; 3] },
}

/// How the initial current is chosen for the bulk system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentInit {
    /// `j^in = 0`.
    #[default]
    Zero,
    /// Ohm's-law current `sigma(c E + P(u x B))` (well-prepared data).
    Ohm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    pub recipe: Recipe,
    pub seed: u64,
    /// Target `E_cal` of `(u, E, B)`; `None` keeps the raw amplitude.
    pub energy: Option<f64>,
    pub current: CurrentInit,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            recipe: Recipe::RandomSolenoidal { kmax: 8.0, decay: 2.0 },
            seed: 0,
            energy: Some(0.01),
            current: CurrentInit::Zero,
        }
    }
}

/// Random divergence-free, zero-mean field on `1 <= |xi| <= kmax`, magnitudes
/// decaying like `|xi|^-decay`.
pub fn random_solenoidal(grid: &Grid, kmax: f64, decay: f64, rng: &mut ChaCha8Rng) -> VectorField {
    let mut v = VectorField::zeros(grid);
    for idx in 1..grid.len() {
        let r = grid.radii()[idx];
        if r > kmax || grid.is_nyquist(idx) {
            continue;
        }
        let amp = r.powf(-decay);
        let z: [Complex64; 3] = std::array::from_fn(|_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp
        });
        v.set(idx, z);
    }
    v.symmetrize();
    leray_project(&v)
}

/// White-noise real field: independent uniform samples on `[-1, 1)` per grid point.
pub fn random_scalar(grid: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let s: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    crate::spectral::to_spectral(grid, &s).expect("sample count matches the grid")
}

fn samples(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Result<ScalarField> {
    let s: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
    crate::spectral::to_spectral(grid, &s)
}

fn taylor_green(grid: &Grid) -> Result<(VectorField, VectorField)> {
    let z3 = |x: [f64; 3]| if grid.dim() == 3 { x[2].cos() } else { 1.0 };
    let u = VectorField::from_components([
        samples(grid, |x| x[0].sin() * x[1].cos() * z3(x))?,
        samples(grid, |x| -x[0].cos() * x[1].sin() * z3(x))?,
        ScalarField::zeros(grid),
    ])?;
    let b = VectorField::from_components([
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        samples(grid, |x| (x[0] + 2.0 * x[1]).cos())?,
    ])?;
    Ok((leray_project(&u), leray_project(&b)))
}

fn maxwell_mode(grid: &Grid, xi: [i64; 3]) -> Result<VectorField> {
    if xi == [0, 0, 0] {
        return Err(Error::InvalidArgument("Maxwell mode needs a nonzero frequency".into()));
    }
    let w = [xi[0] as f64, xi[1] as f64, xi[2] as f64];
    // polarisation: unit vector orthogonal to xi
    let trial = if xi[2] == 0 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let k2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let dot = (trial[0] * w[0] + trial[1] * w[1] + trial[2] * w[2]) / k2;
    let mut p = [trial[0] - dot * w[0], trial[1] - dot * w[1], trial[2] - dot * w[2]];
    let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p.iter_mut().for_each(|x| *x /= l);
    let mode = ScalarField::cosine(grid, xi, 1.0, 0.0)?;
    VectorField::from_components([mode.scaled(p[0]), mode.scaled(p[1]), mode.scaled(p[2])])
}

impl InitialData {
    /// `(u, E, B)` before the current is attached, normalised to the target.
    pub fn fields(&self, grid: &Grid, params: &Params) -> Result<[VectorField; 3]> {
        let z = VectorField::zeros(grid);
        let [u, e, b] = match &self.recipe {
            Recipe::Zero => [z.clone(), z.clone(), z],
            Recipe::TaylorGreen => {
                let (u, b) = taylor_green(grid)?;
                [u, z, b]
            }
            Recipe::RandomSolenoidal { kmax, decay } => {
                if !(*kmax >= 1.0) {
                    return Err(Error::config("initial.kmax", format!("must be at least 1, got {kmax}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let u = random_solenoidal(grid, *kmax, *decay, &mut rng);
                let e = random_solenoidal(grid, *kmax, *decay, &mut rng);
                let b = random_solenoidal(grid, *kmax, *decay, &mut rng);
                [u, e, b]
            }
            Recipe::MaxwellMode { xi } => [z.clone(), maxwell_mode(grid, *xi)?, z],
        };
        let Some(target) = self.energy else { return Ok([u, e, b]) };
        if !(target >= 0.0) {
            return Err(Error::config("initial.energy", format!("must be nonnegative, got {target}")));
        }
        let probe = PlasmaState {
            u: u.clone(),
            j: VectorField::zeros(grid),
            e: e.clone(),
            b: b.clone(),
            t: 0.0,
        };
        let now = energy_e(&probe, params, None);
        if now == 0.0 {
            return Ok([u, e, b]);
        }
        let lam = (target / now).sqrt();
        Ok([u.scaled(lam), e.scaled(lam), b.scaled(lam)])
    }

    pub fn build(&self, grid: &Grid, params: &Params, kind: SystemKind) -> Result<SystemState> {
        let [u, e, b] = self.fields(grid, params)?;
        Ok(match kind {
            SystemKind::Nsmo => SystemState::Limit(LimitState { u, e, b, t: 0.0 }),
            SystemKind::Eqnsm => {
                let j = match self.current {
                    CurrentInit::Zero => VectorField::zeros(grid),
                    CurrentInit::Ohm => nsmo_ohm(&u, &e, &b, params)?,
                };
                SystemState::Plasma(PlasmaState { u, j, e, b, t: 0.0 })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, relative_divergence};

    #[test]
    fn recipes_are_solenoidal_and_normalised() {
        let g = build_grid(2, 32).unwrap();
        let p = Params::default();
        for recipe in [
            Recipe::TaylorGreen,
            Recipe::RandomSolenoidal { kmax: 6.0, decay: 1.5 },
            Recipe::MaxwellMode { xi: [2, 1, 0] },
        ] {
            let init = InitialData {
                recipe: recipe.clone(),
                seed: 3,
                energy: Some(0.02),
                current: CurrentInit::Ohm,
            };
            let s = init.build(&g, &p, SystemKind::Eqnsm).unwrap();
            s.validate().unwrap();
            let SystemState::Plasma(ps) = &s else { panic!() };
            assert!(ps.u.hermitian_defect() < 1e-15);
            let no_j = PlasmaState { j: VectorField::zeros(&g), ..ps.clone() };
            assert!((energy_e(&no_j, &p, None) - 0.02).abs() < 1e-14, "{recipe:?}");
            for f in s.fields() {
                assert!(relative_divergence(f) < 1e-13);
            }
            for f in [&ps.u, &ps.e, &ps.b] {
                assert!(f.comp(0).coeffs()[0].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let g = build_grid(2, 16).unwrap();
        let p = Params::default();
        let a = InitialData { seed: 5, ..InitialData::default() }.fields(&g, &p).unwrap();
        let b = InitialData { seed: 5, ..InitialData::default() }.fields(&g, &p).unwrap();
        let c = InitialData { seed: 6, ..InitialData::default() }.fields(&g, &p).unwrap();
        assert_eq!((&a[0] - &b[0]).norm(), 0.0);
        assert!((&a[0] - &c[0]).norm() > 0.0);
    }

    #[test]
    fn zero_recipe_stays_zero() {
        let g = build_grid(2, 16).unwrap();
        let s = InitialData { recipe: Recipe::Zero, ..InitialData::default() }
            .build(&g, &Params::default(), SystemKind::Nsmo)
            .unwrap();
        assert!(s.fields().iter().all(|f| f.norm() == 0.0));
    }
}
