use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real scalar field held by its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

/// R^3-valued field; three components on one grid, even when `d = 2`.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

/// Either rank, for operations that accept both.
#[derive(Clone, Debug)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
}

/// Shared behaviour of scalar and vector fields: everything that acts
/// component-wise through a Fourier multiplier.
pub trait SpectralField: Clone {
    fn grid(&self) -> &Grid;
    fn components(&self) -> &[ScalarField];
    fn components_mut(&mut self) -> &mut [ScalarField];

    /// Multiplies every component by the real multiplier `m(idx)`.
    fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for c in out.components_mut() {
            for (idx, v) in c.coeffs.iter_mut().enumerate() {
                *v *= m(idx);
            }
        }
        out
    }

    /// `||f||_{L^2}^2 = sum_xi |f_hat(xi)|^2`, summed over components.
    fn norm_sq(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real L^2 inner product `<f, g>`.
    fn inner(&self, other: &Self) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| {
                a.coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum::<f64>()
            })
            .sum()
    }

    /// `self + alpha * other`, in place.
    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.components_mut().iter_mut().zip(other.components()) {
            for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
                *x += alpha * y;
            }
        }
    }

    fn scaled(&self, alpha: f64) -> Self {
        self.apply_multiplier(|_| alpha)
    }

    /// Largest absolute coefficient over all components.
    fn max_abs_coeff(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.coeffs.iter())
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    fn is_finite(&self) -> bool {
        self.components()
            .iter()
            .all(|c| c.coeffs.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Real plane wave `amp * cos(xi.x + phase)`: coefficients `amp/2 e^{+-i phase}` at `+-xi`.
    pub fn cosine(grid: &Grid, xi: [i64; 3], amp: f64, phase: f64) -> Result<Self> {
        let mut f = ScalarField::zeros(grid);
        let idx = grid
            .index_of(xi)
            .ok_or_else(|| Error::InvalidArgument(format!("frequency {xi:?} is off the lattice")))?;
        let nidx = grid.neg_index(idx);
        if idx == nidx {
            f.coeffs[idx] = Complex64::new(amp * phase.cos(), 0.0);
        } else {
            f.coeffs[idx] += Complex64::from_polar(0.5 * amp, phase);
            f.coeffs[nidx] += Complex64::from_polar(0.5 * amp, -phase);
        }
        Ok(f)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut f = ScalarField::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Largest Hermitian-symmetry defect `|f(-xi) - conj f(xi)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|idx| (self.coeffs[self.grid.neg_index(idx)] - self.coeffs[idx].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces the coefficients by their Hermitian-symmetric part.
    pub fn symmetrize(&mut self) {
        let old = self.coeffs.clone();
        for (idx, v) in self.coeffs.iter_mut().enumerate() {
            *v = 0.5 * (old[idx] + old[self.grid.neg_index(idx)].conj());
        }
    }
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            comps: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_components(comps: [ScalarField; 3]) -> Result<Self> {
        comps[0].grid.same_as(&comps[1].grid)?;
        comps[0].grid.same_as(&comps[2].grid)?;
        Ok(VectorField { comps })
    }

    pub fn grid(&self) -> &Grid {
        &self.comps[0].grid
    }

    pub fn comp(&self, axis: usize) -> &ScalarField {
        &self.comps[axis]
    }

    pub fn comp_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.comps[axis]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    /// Vector of the three coefficients at lattice point `idx`.
    #[inline]
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [
            self.comps[0].coeffs[idx],
            self.comps[1].coeffs[idx],
            self.comps[2].coeffs[idx],
        ]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [Complex64; 3]) {
        for (axis, value) in v.into_iter().enumerate() {
            self.comps[axis].coeffs[idx] = value;
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(ScalarField::hermitian_defect)
            .fold(0.0, f64::max)
    }

    pub fn symmetrize(&mut self) {
        for c in &mut self.comps {
            c.symmetrize();
        }
    }
}

impl SpectralField for ScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[ScalarField] {
        std::slice::from_ref(self)
    }
    fn components_mut(&mut self) -> &mut [ScalarField] {
        std::slice::from_mut(self)
    }
}

impl SpectralField for VectorField {
    fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }
    fn components(&self) -> &[ScalarField] {
        &self.comps
    }
    fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.comps
    }
}

macro_rules! impl_arith {
    ($ty:ty) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                let mut out = self.clone();
                out.axpy(1.0, rhs);
                out
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                let mut out = self.clone();
                out.axpy(-1.0, rhs);
                out
            }
        }
        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self.scaled(rhs)
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(-1.0)
            }
        }
    };
}

impl_arith!(ScalarField);
impl_arith!(VectorField);

impl AnyField {
    pub fn grid(&self) -> &Grid {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::Vector(v) => v.grid(),
        }
    }

    pub fn into_scalar(self) -> Option<ScalarField> {
        match self {
            AnyField::Scalar(f) => Some(f),
            AnyField::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<VectorField> {
        match self {
            AnyField::Vector(v) => Some(v),
            AnyField::Scalar(_) => None,
        }
    }
}

impl From<ScalarField> for AnyField {
    fn from(f: ScalarField) -> Self {
        AnyField::Scalar(f)
    }
}

impl From<VectorField> for AnyField {
    fn from(v: VectorField) -> Self {
        AnyField::Vector(v)
    }
}
