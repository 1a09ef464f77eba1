//! Dense complex matrix exponential: scaling and squaring with a fixed
//! diagonal Pade approximant of order 13 (Higham's coefficients and
//! threshold `theta_13`).

use nalgebra::DMatrix;
use num_complex::Complex64;

type Mat = DMatrix<Complex64>;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &Mat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn lincomb(terms: &[(f64, &Mat)], n: usize) -> Mat {
    let mut out = Mat::zeros(n, n);
    for (c, m) in terms {
        out += *m * Complex64::from(*c);
    }
    out
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &Mat) -> Mat {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::from(f64::powi(2.0, -squarings));
    let b = &PADE13;
    let id = Mat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n)
        + lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = &a * u_inner;
    let v = &a6 * lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n)
        + lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is nonsingular");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// `(exp(a), phi_1(a), phi_2(a))` with `phi_1(z) = (e^z - 1)/z` and
/// `phi_2(z) = (e^z - 1 - z)/z^2`, read off the exponential of the block
/// matrix `[[a, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn phi_functions(a: &Mat) -> (Mat, Mat, Mat) {
    let n = a.nrows();
    let mut big = Mat::zeros(3 * n, 3 * n);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    for i in 0..n {
        big[(i, n + i)] = Complex64::from(1.0);
        big[(n + i, 2 * n + i)] = Complex64::from(1.0);
    }
    let e = expm(&big);
    (
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
        e.view((0, 2 * n), (n, n)).into_owned(),
    )
}

/// Scalar `(e^z, phi_1(z), phi_2(z))` for real `z`, series near zero.
pub fn phi_scalar(z: f64) -> (f64, f64, f64) {
    let e = z.exp();
    if z.abs() < 1e-3 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z.powi(4) / 120.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z.powi(4) / 720.0;
        (e, phi1, phi2)
    } else {
        let phi1 = z.exp_m1() / z;
        (e, phi1, (phi1 - 1.0) / z)
    }
}
