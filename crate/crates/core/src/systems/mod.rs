//! The bulk two-fluid system in `(u, j, E, B)` variables, its species form,
//! the small-`eps` limit with solenoidal Ohm's law, and their per-mode linear
//! parts.
//!
//! Pressures never appear: every nonlinear term is Leray-projected.

mod linear;
mod rhs;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{relative_divergence, Grid, SpectralField, VectorField};

pub use linear::{linear_block, linear_matrix};
pub use rhs::{eqnsm_rhs, nsmo_ohm, nsmo_rhs, EqNsmTerms, NsmoTerms};
pub(crate) use rhs::{eqnsm_nonlinear, nsmo_nonlinear};

/// Input divergence tolerance of the right-hand-side evaluators.
pub const DIVERGENCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub mu: f64,
    pub sigma: f64,
    pub c: f64,
    pub eps: f64,
    pub s: f64,
    pub s_prime: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            mu: 0.1,
            sigma: 1.0,
            c: 1.0,
            eps: 0.1,
            s: 1.6,
            s_prime: 1.6,
        }
    }
}

impl Params {
    pub fn new(mu: f64, sigma: f64, c: f64, eps: f64, s: f64, s_prime: f64) -> Result<Self> {
        let p = Params {
            mu,
            sigma,
            c,
            eps,
            s,
            s_prime,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Params { eps, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("sigma", self.sigma), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::config("eps", format!("must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.s > 1.5) {
            return Err(Error::config(
                "s",
                format!("global well-posedness needs s > 3/2, got {}", self.s),
            ));
        }
        if !(self.s - 1.0 <= self.s_prime && self.s_prime <= self.s + 1.0) {
            return Err(Error::config(
                "s_prime",
                format!("needs s - 1 <= s' <= s + 1, got s = {}, s' = {}", self.s, self.s_prime),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Bulk two-fluid system in `(u, j, E, B)`.
    Eqnsm,
    /// Limit system in `(u, E, B)`, `j` slaved by Ohm's law.
    Nsmo,
}

#[derive(Clone, Debug)]
pub struct PlasmaState {
    pub u: VectorField,
    pub j: VectorField,
    pub e: VectorField,
    pub b: VectorField,
    pub t: f64,
}

#[derive(Clone, Debug)]
pub struct SpeciesState {
    pub u_plus: VectorField,
    pub u_minus: VectorField,
    pub e: VectorField,
    pub b: VectorField,
    pub t: f64,
}

#[derive(Clone, Debug)]
pub struct LimitState {
    pub u: VectorField,
    pub e: VectorField,
    pub b: VectorField,
    pub t: f64,
}

fn check_divergence(fields: &[&VectorField]) -> Result<()> {
    for f in fields {
        let r = relative_divergence(f);
        if r > DIVERGENCE_TOL {
            return Err(Error::ConstraintViolation(r));
        }
    }
    Ok(())
}

fn check_grids(fields: &[&VectorField]) -> Result<()> {
    for f in &fields[1..] {
        fields[0].grid().same_as(f.grid())?;
    }
    Ok(())
}

impl PlasmaState {
    pub fn zeros(grid: &Grid) -> Self {
        let z = VectorField::zeros(grid);
        PlasmaState {
            u: z.clone(),
            j: z.clone(),
            e: z.clone(),
            b: z,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn fields(&self) -> [&VectorField; 4] {
        [&self.u, &self.j, &self.e, &self.b]
    }

    /// Checks grid agreement and the four divergence constraints.
    pub fn validate(&self) -> Result<()> {
        check_grids(&self.fields())?;
        check_divergence(&self.fields())
    }

    /// `||u||^2 + ||j||^2 + ||E||^2 + ||B||^2`, square-rooted.
    pub fn l2_norm(&self) -> f64 {
        self.fields().iter().map(|f| f.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        PlasmaState {
            u: self.u.scaled(lambda),
            j: self.j.scaled(lambda),
            e: self.e.scaled(lambda),
            b: self.b.scaled(lambda),
            t: self.t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

impl LimitState {
    pub fn zeros(grid: &Grid) -> Self {
        let z = VectorField::zeros(grid);
        LimitState {
            u: z.clone(),
            e: z.clone(),
            b: z,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn fields(&self) -> [&VectorField; 3] {
        [&self.u, &self.e, &self.b]
    }

    pub fn validate(&self) -> Result<()> {
        check_grids(&self.fields())?;
        check_divergence(&self.fields())
    }

    /// The bulk state carrying the Ohm's-law current.
    pub fn with_ohm_current(&self, params: &Params) -> Result<PlasmaState> {
        Ok(PlasmaState {
            u: self.u.clone(),
            j: nsmo_ohm(&self.u, &self.e, &self.b, params)?,
            e: self.e.clone(),
            b: self.b.clone(),
            t: self.t,
        })
    }
}

impl SpeciesState {
    pub fn validate(&self) -> Result<()> {
        let f = [&self.u_plus, &self.u_minus, &self.e, &self.b];
        check_grids(&f)?;
        check_divergence(&f)
    }
}

/// A state of either system, as evolved by the integrator.
#[derive(Clone, Debug)]
pub enum SystemState {
    Plasma(PlasmaState),
    Limit(LimitState),
}

impl SystemState {
    pub fn kind(&self) -> SystemKind {
        match self {
            SystemState::Plasma(_) => SystemKind::Eqnsm,
            SystemState::Limit(_) => SystemKind::Nsmo,
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            SystemState::Plasma(p) => p.t,
            SystemState::Limit(l) => l.t,
        }
    }

    pub fn set_t(&mut self, t: f64) {
        match self {
            SystemState::Plasma(p) => p.t = t,
            SystemState::Limit(l) => l.t = t,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            SystemState::Plasma(p) => p.grid(),
            SystemState::Limit(l) => l.grid(),
        }
    }

    /// `[u, j, E, B]` or `[u, E, B]`.
    pub fn fields(&self) -> Vec<&VectorField> {
        match self {
            SystemState::Plasma(p) => p.fields().to_vec(),
            SystemState::Limit(l) => l.fields().to_vec(),
        }
    }

    /// Rebuilds a state of `kind` from fields in [`SystemState::fields`] order.
    pub fn from_fields(kind: SystemKind, fields: Vec<VectorField>, t: f64) -> Result<Self> {
        let expected = match kind {
            SystemKind::Eqnsm => 4,
            SystemKind::Nsmo => 3,
        };
        if fields.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: fields.len(),
            });
        }
        let mut it = fields.into_iter();
        let mut next = || it.next().expect("length checked");
        Ok(match kind {
            SystemKind::Eqnsm => SystemState::Plasma(PlasmaState {
                u: next(),
                j: next(),
                e: next(),
                b: next(),
                t,
            }),
            SystemKind::Nsmo => SystemState::Limit(LimitState {
                u: next(),
                e: next(),
                b: next(),
                t,
            }),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemState::Plasma(p) => p.validate(),
            SystemState::Limit(l) => l.validate(),
        }
    }

    pub fn u(&self) -> &VectorField {
        match self {
            SystemState::Plasma(p) => &p.u,
            SystemState::Limit(l) => &l.u,
        }
    }

    pub fn e(&self) -> &VectorField {
        match self {
            SystemState::Plasma(p) => &p.e,
            SystemState::Limit(l) => &l.e,
        }
    }

    pub fn b(&self) -> &VectorField {
        match self {
            SystemState::Plasma(p) => &p.b,
            SystemState::Limit(l) => &l.b,
        }
    }
}

impl From<PlasmaState> for SystemState {
    fn from(p: PlasmaState) -> Self {
        SystemState::Plasma(p)
    }
}

impl From<LimitState> for SystemState {
    fn from(l: LimitState) -> Self {
        SystemState::Limit(l)
    }
}

/// `u = (u+ + u-)/2`, `j = (u+ - u-)/(2 eps)`.
pub fn species_to_bulk(s: &SpeciesState, params: &Params) -> Result<PlasmaState> {
    s.u_plus.grid().same_as(s.u_minus.grid())?;
    let mut u = s.u_plus.clone();
    u.axpy(1.0, &s.u_minus);
    let mut j = s.u_plus.clone();
    j.axpy(-1.0, &s.u_minus);
    Ok(PlasmaState {
        u: u.scaled(0.5),
        j: j.scaled(0.5 / params.eps),
        e: s.e.clone(),
        b: s.b.clone(),
        t: s.t,
    })
}

/// `u+ = u + eps j`, `u- = u - eps j`.
pub fn bulk_to_species(p: &PlasmaState, params: &Params) -> Result<SpeciesState> {
    p.u.grid().same_as(p.j.grid())?;
    let mut u_plus = p.u.clone();
    u_plus.axpy(params.eps, &p.j);
    let mut u_minus = p.u.clone();
    u_minus.axpy(-params.eps, &p.j);
    Ok(SpeciesState {
        u_plus,
        u_minus,
        e: p.e.clone(),
        b: p.b.clone(),
        t: p.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, ScalarField};

    fn wave(g: &Grid) -> VectorField {
        let c = ScalarField::cosine(g, [1, 2, 0], 0.3, 0.2).unwrap();
        VectorField::from_components([ScalarField::zeros(g), ScalarField::zeros(g), c]).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(Params::default().validate().is_ok());
        let p = Params::default();
        assert!(Params { s: 1.0, ..p }.validate().is_err());
        assert!(Params { eps: 1.5, ..p }.validate().is_err());
        assert!(Params { eps: 0.0, ..p }.validate().is_err());
        assert!(Params { s_prime: 2.7, ..p }.validate().is_err());
        assert!(Params { s_prime: 0.5, ..p }.validate().is_err());
        assert!(Params { mu: 0.0, ..p }.validate().is_err());
        assert!(Params { sigma: -1.0, ..p }.validate().is_err());
        assert!(Params { c: f64::NAN, ..p }.validate().is_err());
        assert!(Params::new(0.1, 1.0, 1.0, 1.0, 2.0, 3.0).is_ok());
    }

    #[test]
    fn species_and_bulk_variables() {
        let g = build_grid(2, 8).unwrap();
        let v = wave(&g);
        let z = VectorField::zeros(&g);
        let params = Params::default().with_eps(0.5);
        let sym = SpeciesState {
            u_plus: v.clone(),
            u_minus: v.clone(),
            e: z.clone(),
            b: z.clone(),
            t: 0.0,
        };
        let p = species_to_bulk(&sym, &params).unwrap();
        assert!((&p.u - &v).norm() < 1e-15);
        assert_eq!(p.j.norm(), 0.0);
        let anti = SpeciesState {
            u_plus: v.clone(),
            u_minus: -&v,
            e: z.clone(),
            b: v.clone(),
            t: 0.3,
        };
        let p = species_to_bulk(&anti, &params).unwrap();
        assert_eq!(p.u.norm(), 0.0);
        assert!((&p.j - &v.scaled(2.0)).norm() < 1e-15);
        let back = bulk_to_species(&p, &params).unwrap();
        assert!((&back.u_plus - &v).norm() < 1e-15);
        assert!((&back.u_minus + &v).norm() < 1e-15);
        assert_eq!(back.t, 0.3);
        assert!((&back.b - &v).norm() == 0.0);
    }

    #[test]
    fn divergence_is_checked() {
        let g = build_grid(2, 8).unwrap();
        let mut s = PlasmaState::zeros(&g);
        assert!(s.validate().is_ok());
        s.u = VectorField::from_components([
            ScalarField::cosine(&g, [1, 0, 0], 1.0, 0.0).unwrap(),
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
        ])
        .unwrap();
        assert!(matches!(s.validate(), Err(Error::ConstraintViolation(_))));
    }
}
