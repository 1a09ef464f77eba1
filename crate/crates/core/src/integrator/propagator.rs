//! Per-mode linear propagators.
//!
//! The linear block is rotation-equivariant: `L(Q xi) = Q L(xi) Q^T` with `Q`
//! acting on every 3-vector slot. Each distinct `|xi|^2` is therefore
//! exponentiated once at `xi = (|xi|, 0, 0)`, and each mode is rotated into
//! that frame and back. The velocity block is scalar.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expm::{phi_functions, phi_scalar};
use crate::spectral::{Grid, ScalarField, VectorField};
use crate::systems::{linear_matrix, Params, SystemKind};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which part of the linear dynamics the propagator carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LinearPart {
    Full,
    /// Only the curl coupling of `E` and `B`; every other entry zeroed.
    MaxwellOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    Exp,
    Phi1,
    Phi2,
    /// `phi_1 - phi_2`
    Phi1m2,
}

impl Op {
    fn slot(self) -> usize {
        match self {
            Op::Exp => 0,
            Op::Phi1 => 1,
            Op::Phi2 => 2,
            Op::Phi1m2 => 3,
        }
    }
}

/// Orthonormal frames and shell indices for the retained modes of a grid.
#[derive(Debug)]
pub(crate) struct ModeTable {
    /// Rows are the frame vectors; the first is `xi / |xi|`.
    frames: Vec<[[f64; 3]; 3]>,
    /// Shell of each retained mode, `None` outside the Friedrichs ball.
    shell: Vec<Option<u32>>,
    radii: Vec<f64>,
}

fn frame(xi: [f64; 3]) -> [[f64; 3]; 3] {
    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    if r == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let n = [xi[0] / r, xi[1] / r, xi[2] / r];
    let a = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let dot = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
    let mut e2 = [a[0] - dot * n[0], a[1] - dot * n[1], a[2] - dot * n[2]];
    let l = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
    e2.iter_mut().for_each(|v| *v /= l);
    let e3 = [
        n[1] * e2[2] - n[2] * e2[1],
        n[2] * e2[0] - n[0] * e2[2],
        n[0] * e2[1] - n[1] * e2[0],
    ];
    [n, e2, e3]
}

impl ModeTable {
    pub(crate) fn new(grid: &Grid, radius: f64) -> Self {
        let mut keys: HashMap<u64, u32> = HashMap::new();
        let mut radii = Vec::new();
        let mut shell = Vec::with_capacity(grid.len());
        let mut frames = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let w = grid.wave(idx);
            frames.push(frame(w));
            if grid.radii()[idx] > radius || grid.is_nyquist(idx) {
                shell.push(None);
                continue;
            }
            let ksq = grid.ksq()[idx].round() as u64;
            let next = radii.len() as u32;
            let id = *keys.entry(ksq).or_insert_with(|| {
                radii.push((ksq as f64).sqrt());
                next
            });
            shell.push(Some(id));
        }
        ModeTable { frames, shell, radii }
    }

    /// Zeroes every coefficient outside the retained set.
    pub(crate) fn truncate(&self, f: &mut VectorField) {
        for axis in 0..3 {
            let c = f.comp_mut(axis).coeffs_mut();
            for (idx, v) in c.iter_mut().enumerate() {
                if self.shell[idx].is_none() {
                    *v = ZERO;
                }
            }
        }
    }
}

/// `exp(hL)`, `phi_1(hL)`, `phi_2(hL)` and `phi_1 - phi_2` per shell.
pub(crate) struct Propagator {
    nc: usize,
    /// Velocity-block scalars per shell, indexed by [`Op::slot`].
    scalar: Vec<[f64; 4]>,
    /// Coupled-block matrices per shell, row-major `nc x nc`.
    blocks: Vec<[Vec<Complex64>; 4]>,
}

fn coupled_block(r: f64, params: &Params, kind: SystemKind, part: LinearPart) -> DMatrix<Complex64> {
    let full = linear_matrix([r, 0.0, 0.0], params, kind);
    let n = full.nrows() - 3;
    let mut m = full.view((3, 3), (n, n)).into_owned();
    if part == LinearPart::MaxwellOnly {
        // keep the E <-> B curl blocks only (the last six slots)
        let em = n - 6;
        for a in 0..n {
            for b in 0..n {
                let curl = a >= em && b >= em && (a < em + 3) != (b < em + 3);
                if !curl {
                    m[(a, b)] = ZERO;
                }
            }
        }
    }
    m
}

impl Propagator {
    pub(crate) fn new(table: &ModeTable, h: f64, params: &Params, kind: SystemKind, part: LinearPart) -> Self {
        let nc = match kind {
            SystemKind::Eqnsm => 9,
            SystemKind::Nsmo => 6,
        };
        let mut scalar = Vec::with_capacity(table.radii.len());
        let mut blocks = Vec::with_capacity(table.radii.len());
        for &r in &table.radii {
            let z = match part {
                LinearPart::Full => -params.mu * r * r * h,
                LinearPart::MaxwellOnly => 0.0,
            };
            let (e, p1, p2) = phi_scalar(z);
            scalar.push([e, p1, p2, p1 - p2]);
            let a = coupled_block(r, params, kind, part) * Complex64::from(h);
            let (e, p1, p2) = phi_functions(&a);
            let p12 = &p1 - &p2;
            let flat = |m: &DMatrix<Complex64>| -> Vec<Complex64> {
                (0..nc).flat_map(|i| (0..nc).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
            };
            blocks.push([flat(&e), flat(&p1), flat(&p2), flat(&p12)]);
        }
        Propagator { nc, scalar, blocks }
    }

    /// `sum_t coeff_t * Op_t(fields_t)` on the retained modes, zero elsewhere.
    /// Every field list is in state order (`u` first, then the coupled slots).
    pub(crate) fn combine(&self, table: &ModeTable, terms: &[(Op, f64, &[&VectorField])]) -> Vec<VectorField> {
        let grid = terms[0].2[0].grid();
        let nf = 1 + self.nc / 3;
        let mut out: Vec<[Vec<Complex64>; 3]> =
            (0..nf).map(|_| std::array::from_fn(|_| vec![ZERO; grid.len()])).collect();
        let mut w = vec![ZERO; self.nc];
        let mut y = vec![ZERO; self.nc];
        for idx in 0..grid.len() {
            let Some(sh) = table.shell[idx] else { continue };
            let sh = sh as usize;
            let q = &table.frames[idx];
            y.iter_mut().for_each(|v| *v = ZERO);
            let mut yu = [ZERO; 3];
            for &(op, coeff, fields) in terms {
                let su = self.scalar[sh][op.slot()] * coeff;
                let u = fields[0].at(idx);
                for a in 0..3 {
                    yu[a] += su * u[a];
                }
                // rotate the coupled slots into the canonical frame
                for (slot, f) in fields[1..].iter().enumerate() {
                    let v = f.at(idx);
                    for a in 0..3 {
                        w[3 * slot + a] = v[0] * q[a][0] + v[1] * q[a][1] + v[2] * q[a][2];
                    }
                }
                let m = &self.blocks[sh][op.slot()];
                for (i, yi) in y.iter_mut().enumerate() {
                    let row = &m[i * self.nc..(i + 1) * self.nc];
                    let mut acc = ZERO;
                    for (mij, wj) in row.iter().zip(&w) {
                        acc += mij * wj;
                    }
                    *yi += coeff * acc;
                }
            }
            for a in 0..3 {
                out[0][a][idx] = yu[a];
            }
            for slot in 0..(nf - 1) {
                for b in 0..3 {
                    let mut acc = ZERO;
                    for a in 0..3 {
                        acc += q[a][b] * y[3 * slot + a];
                    }
                    out[slot + 1][b][idx] = acc;
                }
            }
        }
        out.into_iter()
            .map(|comps| {
                let [a, b, c] = comps;
                VectorField::from_components([
                    ScalarField::from_coeffs(grid, a).expect("grid-sized"),
                    ScalarField::from_coeffs(grid, b).expect("grid-sized"),
                    ScalarField::from_coeffs(grid, c).expect("grid-sized"),
                ])
                .expect("one grid")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::expm::expm;
    use crate::spectral::{build_grid, leray_project};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_are_proper_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let xi = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let q = frame(xi);
            for a in 0..3 {
                for b in 0..3 {
                    let d: f64 = (0..3).map(|k| q[a][k] * q[b][k]).sum();
                    assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            let det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
                + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
            assert!((det - 1.0).abs() < 1e-14);
        }
        let q = frame([0.0, 0.0, -2.0]);
        assert_eq!(q[0], [0.0, 0.0, -1.0]);
    }

    fn random_vector(g: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
        let mut v = VectorField::zeros(g);
        for idx in 0..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let z: [Complex64; 3] = std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            v.set(idx, z);
        }
        v.symmetrize();
        leray_project(&v)
    }

    #[test]
    fn rotated_exponential_matches_dense_oracle() {
        for (d, kind, n) in [(2, SystemKind::Eqnsm, 8), (3, SystemKind::Eqnsm, 8), (3, SystemKind::Nsmo, 8)] {
            let g = build_grid(d, n).unwrap();
            let table = ModeTable::new(&g, g.dealiased_radius());
            let p = Params { eps: 0.2, mu: 0.3, c: 1.2, sigma: 0.8, ..Params::default() };
            let h = 0.07;
            let prop = Propagator::new(&table, h, &p, kind, LinearPart::Full);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let nf = if kind == SystemKind::Eqnsm { 4 } else { 3 };
            let fields: Vec<VectorField> = (0..nf).map(|_| random_vector(&g, &mut rng)).collect();
            let refs: Vec<&VectorField> = fields.iter().collect();
            for op in [Op::Exp, Op::Phi1, Op::Phi2] {
                let out = prop.combine(&table, &[(op, 1.0, &refs)]);
                for idx in 0..g.len() {
                    if table.shell[idx].is_none() {
                        assert!(out.iter().all(|f| f.at(idx).iter().all(|v| *v == ZERO)));
                        continue;
                    }
                    let a = linear_matrix(g.wave(idx), &p, kind) * Complex64::from(h);
                    let dense = match op {
                        Op::Exp => expm(&a),
                        Op::Phi1 => phi_functions(&a).1,
                        _ => phi_functions(&a).2,
                    };
                    let x = DVector::from_iterator(3 * nf, fields.iter().flat_map(|f| f.at(idx)));
                    let y = dense * x;
                    let got: Vec<Complex64> = out.iter().flat_map(|f| f.at(idx)).collect();
                    for (a, b) in got.iter().zip(y.iter()) {
                        assert!((a - b).norm() < 1e-12, "{op:?} idx {idx}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn maxwell_only_conserves_electromagnetic_energy() {
        let g = build_grid(2, 16).unwrap();
        let table = ModeTable::new(&g, g.dealiased_radius());
        let p = Params::default();
        let prop = Propagator::new(&table, 0.3, &p, SystemKind::Eqnsm, LinearPart::MaxwellOnly);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fields: Vec<VectorField> = (0..4).map(|_| random_vector(&g, &mut rng)).collect();
        let mut cut = fields.clone();
        cut.iter_mut().for_each(|f| table.truncate(f));
        let refs: Vec<&VectorField> = cut.iter().collect();
        let out = prop.combine(&table, &[(Op::Exp, 1.0, &refs)]);
        use crate::spectral::SpectralField;
        let before = cut[2].norm_sq() + cut[3].norm_sq();
        let after = out[2].norm_sq() + out[3].norm_sq();
        assert!((before - after).abs() < 1e-13 * before);
        assert!((&out[1] - &cut[1]).norm() < 1e-14 * cut[1].norm());
        assert!((&out[0] - &cut[0]).norm() < 1e-14 * cut[0].norm());
    }
}
