use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Params, SystemKind};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn put_scaled_identity(m: &mut DMatrix<Complex64>, row: usize, col: usize, v: Complex64) {
    for a in 0..3 {
        m[(row + a, col + a)] += v;
    }
}

/// Adds `scale * (i xi x .)` into the 3x3 block at `(row, col)`.
fn put_curl(m: &mut DMatrix<Complex64>, row: usize, col: usize, xi: [f64; 3], scale: f64) {
    let k = [
        [0.0, -xi[2], xi[1]],
        [xi[2], 0.0, -xi[0]],
        [-xi[1], xi[0], 0.0],
    ];
    for a in 0..3 {
        for b in 0..3 {
            m[(row + a, col + b)] += I * (scale * k[a][b]);
        }
    }
}

/// Linear part of the per-mode dynamics at wave vector `xi`, acting on the
/// stacked components `(u, j, E, B)` (12x12) or `(u, E, B)` (9x9).
pub fn linear_matrix(xi: [f64; 3], params: &Params, system: SystemKind) -> DMatrix<Complex64> {
    let ksq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let visc = Complex64::from(-params.mu * ksq);
    let c = params.c;
    match system {
        SystemKind::Eqnsm => {
            let e2 = params.eps * params.eps;
            let mut m = DMatrix::zeros(12, 12);
            put_scaled_identity(&mut m, 0, 0, visc);
            put_scaled_identity(&mut m, 3, 3, visc - 1.0 / (params.sigma * e2));
            put_scaled_identity(&mut m, 3, 6, (c / e2).into());
            put_scaled_identity(&mut m, 6, 3, (-c).into());
            put_curl(&mut m, 6, 9, xi, c);
            put_curl(&mut m, 9, 6, xi, -c);
            m
        }
        SystemKind::Nsmo => {
            let mut m = DMatrix::zeros(9, 9);
            put_scaled_identity(&mut m, 0, 0, visc);
            put_scaled_identity(&mut m, 3, 3, (-params.sigma * c * c).into());
            put_curl(&mut m, 3, 6, xi, c);
            put_curl(&mut m, 6, 3, xi, -c);
            m
        }
    }
}

/// [`linear_matrix`] at an integer lattice frequency.
pub fn linear_block(xi: [i64; 3], params: &Params, system: SystemKind) -> DMatrix<Complex64> {
    linear_matrix([xi[0] as f64, xi[1] as f64, xi[2] as f64], params, system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, VectorField};
    use crate::systems::{eqnsm_rhs, nsmo_rhs, LimitState, PlasmaState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_frequency_is_block_diagonal_relaxation() {
        let p = Params { eps: 1.0, sigma: 1.0, mu: 0.0, ..Params::default() };
        let m = linear_block([0, 0, 0], &p, SystemKind::Eqnsm);
        assert_eq!(m.nrows(), 12);
        // no E <-> B coupling at xi = 0
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(m[(6 + a, 9 + b)], Complex64::from(0.0));
                assert_eq!(m[(9 + a, 6 + b)], Complex64::from(0.0));
            }
        }
        let jj = m.view((3, 3), (3, 3)).into_owned();
        for ev in jj.diagonal().iter() {
            assert_eq!(*ev, Complex64::from(-1.0));
        }
        assert!(jj.iter().enumerate().all(|(i, v)| i % 4 == 0 || *v == Complex64::from(0.0)));
        let n = linear_block([0, 0, 0], &p, SystemKind::Nsmo);
        assert_eq!(n.nrows(), 9);
        assert_eq!(n[(3, 3)], Complex64::from(-p.sigma * p.c * p.c));
    }

    fn stack(fields: &[&VectorField], idx: usize) -> Vec<Complex64> {
        fields.iter().flat_map(|f| f.at(idx)).collect()
    }

    #[test]
    fn matrix_reproduces_linear_tendency() {
        // with u = 0 and B = 0 only the u rows carry quadratic terms
        let g = build_grid(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rand_field = || {
            let mut v = VectorField::zeros(&g);
            for idx in 0..g.len() {
                if g.is_nyquist(idx) {
                    continue;
                }
                let z: [Complex64; 3] =
                    std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                v.set(idx, z);
            }
            v.symmetrize();
            crate::spectral::leray_project(&v)
        };
        let p = Params { eps: 0.3, sigma: 1.7, c: 0.9, mu: 0.2, ..Params::default() };
        let mut s = PlasmaState::zeros(&g);
        s.j = rand_field();
        s.e = rand_field();
        let mut l = LimitState::zeros(&g);
        l.e = s.e.clone();
        l.b = rand_field();
        let t = eqnsm_rhs(&s, &p).unwrap().tendency();
        let tl = nsmo_rhs(&l, &p).unwrap().tendency();
        for idx in 0..g.len() {
            let w = g.wave(idx);
            let x = nalgebra::DVector::from_vec(stack(&s.fields(), idx));
            let y = linear_matrix(w, &p, SystemKind::Eqnsm) * x;
            let expect = stack(&t.fields(), idx);
            for (a, b) in y.iter().zip(&expect).skip(3) {
                assert!((a - b).norm() < 1e-12);
            }
            let x = nalgebra::DVector::from_vec(stack(&l.fields(), idx));
            let y = linear_matrix(w, &p, SystemKind::Nsmo) * x;
            let expect = stack(&tl.fields(), idx);
            for (a, b) in y.iter().zip(&expect).skip(3) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
