use super::{check_divergence, check_grids, LimitState, Params, PlasmaState};
use crate::error::Result;
use crate::spectral::{
    advect_physical, cross_physical, curl, from_padded, gradient_physical, laplacian,
    leray_project, to_padded, ScalarField, SpectralField, VectorField,
};

/// Term-by-term tendency of the bulk system. The current-equation terms are
/// kept undivided by `eps^2`: `eps^2 dj/dt` is their plain sum.
#[derive(Clone, Debug)]
pub struct EqNsmTerms {
    /// `P(-u.grad u - eps^2 j.grad j)`
    pub u_advection: VectorField,
    /// `P(j x B)`
    pub u_lorentz: VectorField,
    /// `mu lap u`
    pub u_diffusion: VectorField,
    /// `P(-u.grad j - j.grad u)`, enters `dj/dt` without a factor
    pub j_advection: VectorField,
    /// `P(u x B)`, enters `dj/dt` over `eps^2`
    pub j_motional: VectorField,
    /// `c E`, over `eps^2`
    pub j_field: VectorField,
    /// `-j / sigma`, over `eps^2`
    pub j_relaxation: VectorField,
    /// `mu lap j`, without a factor
    pub j_diffusion: VectorField,
    /// `c curl B`
    pub e_curl: VectorField,
    /// `-c j`
    pub e_current: VectorField,
    /// `-c curl E`
    pub b_curl: VectorField,
    pub eps: f64,
}

impl EqNsmTerms {
    pub fn du(&self) -> VectorField {
        sum(&[&self.u_advection, &self.u_lorentz, &self.u_diffusion])
    }

    /// `eps^2 dj/dt`, assembled without dividing by `eps^2`.
    pub fn eps2_dj(&self) -> VectorField {
        let e2 = self.eps * self.eps;
        let mut out = sum(&[&self.j_motional, &self.j_field, &self.j_relaxation]);
        out.axpy(e2, &self.j_advection);
        out.axpy(e2, &self.j_diffusion);
        out
    }

    pub fn dj(&self) -> VectorField {
        let mut out = sum(&[&self.j_motional, &self.j_field, &self.j_relaxation]).scaled(1.0 / (self.eps * self.eps));
        out.axpy(1.0, &self.j_advection);
        out.axpy(1.0, &self.j_diffusion);
        out
    }

    pub fn de(&self) -> VectorField {
        sum(&[&self.e_curl, &self.e_current])
    }

    pub fn db(&self) -> VectorField {
        self.b_curl.clone()
    }

    /// Full time derivative packed as a state (time field zero).
    pub fn tendency(&self) -> PlasmaState {
        PlasmaState {
            u: self.du(),
            j: self.dj(),
            e: self.de(),
            b: self.db(),
            t: 0.0,
        }
    }
}

/// Term-by-term tendency of the limit system.
#[derive(Clone, Debug)]
pub struct NsmoTerms {
    /// Ohm's-law current `sigma(c E + P(u x B))`
    pub j: VectorField,
    /// `P(-u.grad u)`
    pub u_advection: VectorField,
    /// `P(j x B)`
    pub u_lorentz: VectorField,
    pub u_diffusion: VectorField,
    pub e_curl: VectorField,
    pub e_current: VectorField,
    pub b_curl: VectorField,
}

impl NsmoTerms {
    pub fn du(&self) -> VectorField {
        sum(&[&self.u_advection, &self.u_lorentz, &self.u_diffusion])
    }

    pub fn de(&self) -> VectorField {
        sum(&[&self.e_curl, &self.e_current])
    }

    pub fn db(&self) -> VectorField {
        self.b_curl.clone()
    }

    pub fn tendency(&self) -> LimitState {
        LimitState {
            u: self.du(),
            e: self.de(),
            b: self.db(),
            t: 0.0,
        }
    }
}

fn sum(parts: &[&VectorField]) -> VectorField {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        out.axpy(1.0, p);
    }
    out
}

fn coeff_refs<'a>(fields: &[&'a VectorField]) -> Vec<&'a [num_complex::Complex64]> {
    fields
        .iter()
        .flat_map(|f| f.comps().iter().map(|c| c.coeffs()))
        .collect()
}

fn vectors_from_padded(grid: &crate::spectral::Grid, phys: Vec<Vec<f64>>) -> Result<Vec<VectorField>> {
    let coarse = from_padded(grid, &phys);
    let mut out = Vec::with_capacity(coarse.len() / 3);
    let mut it = coarse.into_iter();
    while let (Some(a), Some(b), Some(c)) = (it.next(), it.next(), it.next()) {
        out.push(VectorField::from_components([
            ScalarField::from_coeffs(grid, a)?,
            ScalarField::from_coeffs(grid, b)?,
            ScalarField::from_coeffs(grid, c)?,
        ])?);
    }
    Ok(out)
}

/// Unprojected quadratic terms of the bulk system:
/// `[-u.grad u - eps^2 j.grad j, j x B, -u.grad j - j.grad u, u x B]`.
fn eqnsm_products(u: &VectorField, j: &VectorField, b: &VectorField, eps: f64) -> Result<Vec<VectorField>> {
    let grid = u.grid();
    let d = grid.dim();
    let phys = to_padded(grid, &coeff_refs(&[u, j, b]));
    let (pu, rest) = phys.split_at(3);
    let (pj, pb) = rest.split_at(3);
    let gu = gradient_physical(grid, u);
    let gj = gradient_physical(grid, j);
    let uu = advect_physical(d, pu, &gu);
    let jj = advect_physical(d, pj, &gj);
    let uj = advect_physical(d, pu, &gj);
    let ju = advect_physical(d, pj, &gu);
    let e2 = eps * eps;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(12);
    for i in 0..3 {
        out.push(uu[i].iter().zip(&jj[i]).map(|(a, b)| -a - e2 * b).collect());
    }
    out.extend(cross_physical(pj, pb));
    for i in 0..3 {
        out.push(uj[i].iter().zip(&ju[i]).map(|(a, b)| -a - b).collect());
    }
    out.extend(cross_physical(pu, pb));
    vectors_from_padded(grid, out)
}

/// Nonlinear part of the bulk system with the stiff linear part removed,
/// `(P(-u.grad u - eps^2 j.grad j + j x B), P(-u.grad j - j.grad u) + P(u x B)/eps^2)`,
/// followed by `P(u x B)` itself.
pub(crate) fn eqnsm_nonlinear(
    u: &VectorField,
    j: &VectorField,
    b: &VectorField,
    eps: f64,
) -> Result<[VectorField; 3]> {
    let mut p = eqnsm_products(u, j, b, eps)?.into_iter();
    let mut next = || p.next().expect("four products");
    let (adv, lor, jadv, uxb) = (next(), next(), next(), next());
    let mut nu = adv;
    nu.axpy(1.0, &lor);
    let uxb = leray_project(&uxb);
    let mut nj = leray_project(&jadv);
    nj.axpy(1.0 / (eps * eps), &uxb);
    Ok([leray_project(&nu), nj, uxb])
}

/// `[-u.grad u, u x B]`, unprojected.
fn nsmo_products(u: &VectorField, b: &VectorField) -> Result<(Vec<Vec<f64>>, Vec<VectorField>)> {
    let grid = u.grid();
    let phys = to_padded(grid, &coeff_refs(&[u, b]));
    let gu = gradient_physical(grid, u);
    let mut out: Vec<Vec<f64>> = advect_physical(grid.dim(), &phys[..3], &gu)
        .into_iter()
        .map(|v| v.into_iter().map(|x| -x).collect())
        .collect();
    out.extend(cross_physical(&phys[..3], &phys[3..]));
    let pb = phys[3..].to_vec();
    Ok((pb, vectors_from_padded(grid, out)?))
}

fn ohm(e: &VectorField, uxb_projected: &VectorField, params: &Params) -> VectorField {
    let mut j = e.scaled(params.c);
    j.axpy(1.0, uxb_projected);
    j.scaled(params.sigma)
}

fn padded_cross(a: &VectorField, pb: &[Vec<f64>]) -> Result<VectorField> {
    let grid = a.grid();
    let pa = to_padded(grid, &coeff_refs(&[a]));
    Ok(vectors_from_padded(grid, cross_physical(&pa, pb))?.remove(0))
}

/// Nonlinear part of the limit system, `(P(-u.grad u + j x B), -c sigma P(u x B))`
/// with `j` from Ohm's law, followed by `P(u x B)`.
pub(crate) fn nsmo_nonlinear(
    u: &VectorField,
    e: &VectorField,
    b: &VectorField,
    params: &Params,
) -> Result<[VectorField; 3]> {
    let (pb, mut p) = nsmo_products(u, b)?;
    let uxb = leray_project(&p.remove(1));
    let adv = p.remove(0);
    let j = ohm(e, &uxb, params);
    let mut nu = padded_cross(&j, &pb)?;
    nu.axpy(1.0, &adv);
    let ne = uxb.scaled(-params.c * params.sigma);
    Ok([leray_project(&nu), ne, uxb])
}

/// Time derivative of the bulk system, split into its terms.
pub fn eqnsm_rhs(state: &PlasmaState, params: &Params) -> Result<EqNsmTerms> {
    check_grids(&state.fields())?;
    check_divergence(&state.fields())?;
    let PlasmaState { u, j, e, b, .. } = state;
    let mut p = eqnsm_products(u, j, b, params.eps)?.into_iter();
    let mut next = || leray_project(&p.next().expect("four products"));
    let (u_advection, u_lorentz, j_advection, j_motional) = (next(), next(), next(), next());
    Ok(EqNsmTerms {
        u_advection,
        u_lorentz,
        u_diffusion: laplacian(u).scaled(params.mu),
        j_advection,
        j_motional,
        j_field: e.scaled(params.c),
        j_relaxation: j.scaled(-1.0 / params.sigma),
        j_diffusion: laplacian(j).scaled(params.mu),
        e_curl: curl(b).scaled(params.c),
        e_current: j.scaled(-params.c),
        b_curl: curl(e).scaled(-params.c),
        eps: params.eps,
    })
}

/// Solenoidal Ohm's law `j = sigma(c E + P(u x B))`.
pub fn nsmo_ohm(u: &VectorField, e: &VectorField, b: &VectorField, params: &Params) -> Result<VectorField> {
    check_grids(&[u, e, b])?;
    let (_, mut p) = nsmo_products(u, b)?;
    Ok(ohm(e, &leray_project(&p.remove(1)), params))
}

/// Time derivative of the limit system, split into its terms.
pub fn nsmo_rhs(state: &LimitState, params: &Params) -> Result<NsmoTerms> {
    check_grids(&state.fields())?;
    check_divergence(&state.fields())?;
    let LimitState { u, e, b, .. } = state;
    let (pb, mut p) = nsmo_products(u, b)?;
    let uxb = leray_project(&p.remove(1));
    let u_advection = leray_project(&p.remove(0));
    let j = ohm(e, &uxb, params);
    let u_lorentz = leray_project(&padded_cross(&j, &pb)?);
    Ok(NsmoTerms {
        u_advection,
        u_lorentz,
        u_diffusion: laplacian(u).scaled(params.mu),
        e_curl: curl(b).scaled(params.c),
        e_current: j.scaled(-params.c),
        b_curl: curl(e).scaled(-params.c),
        j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, friedrichs_cutoff, gradient, relative_divergence, Grid};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random divergence-free field supported in `|xi| <= kmax`, Hermitian.
    pub(crate) fn random_solenoidal(grid: &Grid, kmax: f64, amp: f64, rng: &mut ChaCha8Rng) -> VectorField {
        let mut v = VectorField::zeros(grid);
        for idx in 1..grid.len() {
            if grid.radii()[idx] > kmax || grid.is_nyquist(idx) {
                continue;
            }
            let mut a = [Complex64::new(0.0, 0.0); 3];
            for x in a.iter_mut() {
                *x = Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp));
            }
            v.set(idx, a);
        }
        v.symmetrize();
        leray_project(&v)
    }

    fn random_state(grid: &Grid, seed: u64, amp: f64) -> PlasmaState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 5.0;
        PlasmaState {
            u: random_solenoidal(grid, k, amp, &mut rng),
            j: random_solenoidal(grid, k, amp, &mut rng),
            e: random_solenoidal(grid, k, amp, &mut rng),
            b: random_solenoidal(grid, k, amp, &mut rng),
            t: 0.0,
        }
    }

    fn grad_sq(v: &VectorField) -> f64 {
        let ksq = v.grid().ksq().to_vec();
        v.components()
            .iter()
            .map(|c| c.coeffs().iter().zip(&ksq).map(|(x, k)| k * x.norm_sqr()).sum::<f64>())
            .sum()
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = build_grid(2, 16).unwrap();
        let t = eqnsm_rhs(&PlasmaState::zeros(&g), &Params::default()).unwrap().tendency();
        assert_eq!(t.l2_norm(), 0.0);
        let t = nsmo_rhs(&LimitState::zeros(&g), &Params::default()).unwrap().tendency();
        assert_eq!(t.u.norm() + t.e.norm() + t.b.norm(), 0.0);
    }

    #[test]
    fn pure_magnetic_field_drives_only_e() {
        let g = build_grid(2, 16).unwrap();
        let mut s = PlasmaState::zeros(&g);
        s.b = VectorField::from_components([
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
            ScalarField::cosine(&g, [2, 1, 0], 0.5, 0.0).unwrap(),
        ])
        .unwrap();
        let p = Params { c: 1.7, ..Params::default() };
        let t = eqnsm_rhs(&s, &p).unwrap().tendency();
        assert!((&t.e - &curl(&s.b).scaled(1.7)).norm() < 1e-15);
        assert_eq!(t.b.norm(), 0.0);
        assert_eq!(t.u.norm(), 0.0);
        assert_eq!(t.j.norm(), 0.0);
    }

    #[test]
    fn bulk_energy_identity() {
        for (d, n) in [(2, 16), (3, 8)] {
            let g = build_grid(d, n).unwrap();
            let p = Params { eps: 0.3, mu: 0.05, sigma: 2.0, c: 1.3, ..Params::default() };
            let s = random_state(&g, 11 + d as u64, 0.1);
            let t = eqnsm_rhs(&s, &p).unwrap().tendency();
            let e2 = p.eps * p.eps;
            let lhs = s.u.inner(&t.u) + e2 * s.j.inner(&t.j) + s.e.inner(&t.e) + s.b.inner(&t.b);
            let rhs = -p.mu * grad_sq(&s.u) - p.mu * e2 * grad_sq(&s.j) - s.j.norm_sq() / p.sigma;
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "d={d}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn skew_terms_cancel() {
        let g = build_grid(2, 16).unwrap();
        let p = Params::default().with_eps(0.2);
        let s = random_state(&g, 5, 0.2);
        let terms = eqnsm_rhs(&s, &p).unwrap();
        let scale = s.l2_norm().powi(2);
        let maxwell = s.e.inner(&terms.e_curl) + s.b.inner(&terms.b_curl);
        assert!(maxwell.abs() < 1e-12 * scale);
        let exchange = s.j.inner(&terms.j_field) + s.e.inner(&terms.e_current);
        assert!(exchange.abs() < 1e-12 * scale);
        let lorentz = s.u.inner(&terms.u_lorentz) + s.j.inner(&terms.j_motional);
        assert!(lorentz.abs() < 1e-12 * scale.powf(1.5));
        let transport = s.u.inner(&terms.u_advection) + p.eps * p.eps * s.j.inner(&terms.j_advection);
        assert!(transport.abs() < 1e-12 * scale.powf(1.5));
    }

    #[test]
    fn outputs_are_solenoidal() {
        let g = build_grid(2, 16).unwrap();
        let s = random_state(&g, 3, 0.3);
        let t = eqnsm_rhs(&s, &Params::default()).unwrap().tendency();
        for f in t.fields() {
            assert!(relative_divergence(f) < 1e-12);
        }
        let l = LimitState { u: s.u, e: s.e, b: s.b, t: 0.0 };
        let nt = nsmo_rhs(&l, &Params::default()).unwrap();
        for f in [&nt.j, &nt.du(), &nt.de(), &nt.db()] {
            assert!(relative_divergence(f) < 1e-12);
        }
    }

    #[test]
    fn terms_scale_with_their_degree() {
        let g = build_grid(2, 16).unwrap();
        let p = Params::default().with_eps(0.4);
        let s = random_state(&g, 9, 0.1);
        let lam = 3.0;
        let a = eqnsm_rhs(&s, &p).unwrap();
        let b = eqnsm_rhs(&s.scaled(lam), &p).unwrap();
        let close = |x: &VectorField, y: &VectorField, f: f64| (&x.scaled(f) - y).norm() <= 1e-12 * y.norm().max(1e-300);
        for (x, y) in [
            (&a.u_advection, &b.u_advection),
            (&a.u_lorentz, &b.u_lorentz),
            (&a.j_advection, &b.j_advection),
            (&a.j_motional, &b.j_motional),
        ] {
            assert!(close(x, y, lam * lam));
        }
        for (x, y) in [
            (&a.u_diffusion, &b.u_diffusion),
            (&a.j_field, &b.j_field),
            (&a.j_relaxation, &b.j_relaxation),
            (&a.j_diffusion, &b.j_diffusion),
            (&a.e_curl, &b.e_curl),
            (&a.e_current, &b.e_current),
            (&a.b_curl, &b.b_curl),
        ] {
            assert!(close(x, y, lam));
        }
    }

    #[test]
    fn divergent_input_is_rejected() {
        let g = build_grid(2, 16).unwrap();
        let mut s = PlasmaState::zeros(&g);
        s.e = gradient(&ScalarField::cosine(&g, [1, 1, 0], 1.0, 0.0).unwrap());
        assert!(eqnsm_rhs(&s, &Params::default()).is_err());
    }

    #[test]
    fn ohm_law_cases() {
        let g = build_grid(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Params { sigma: 2.0, c: 0.7, ..Params::default() };
        let e = random_solenoidal(&g, 6.0, 1.0, &mut rng);
        let z = VectorField::zeros(&g);
        let b = random_solenoidal(&g, 6.0, 1.0, &mut rng);
        let j = nsmo_ohm(&z, &e, &b, &p).unwrap();
        assert!((&j - &e.scaled(1.4)).norm() < 1e-14);

        // u and B parallel constant-direction fields give u x B = 0 pointwise
        let f = ScalarField::cosine(&g, [0, 2, 0], 1.0, 0.0).unwrap();
        let zc = ScalarField::zeros(&g);
        let ux = VectorField::from_components([f.clone(), zc.clone(), zc.clone()]).unwrap();
        let bx = VectorField::from_components([f, zc.clone(), zc]).unwrap();
        let j = nsmo_ohm(&ux, &e, &bx, &p).unwrap();
        assert!((&j - &e.scaled(1.4)).norm() < 1e-14);

        // per-mode projector oracle on sigma(c E + u x B)
        let u = random_solenoidal(&g, 5.0, 1.0, &mut rng);
        let j = nsmo_ohm(&u, &e, &b, &p).unwrap();
        let raw = crate::spectral::cross(&u, &b).unwrap();
        let mut expect = VectorField::zeros(&g);
        for idx in 0..g.len() {
            let k = g.wave(idx);
            let ksq = g.ksq()[idx];
            let ev = e.at(idx);
            let w = raw.at(idx);
            let mut out = [Complex64::new(0.0, 0.0); 3];
            for a in 0..3 {
                let mut acc = w[a];
                if ksq > 0.0 {
                    for c in 0..3 {
                        acc -= k[a] * k[c] / ksq * w[c];
                    }
                }
                out[a] = p.sigma * (p.c * ev[a] + acc);
            }
            expect.set(idx, out);
        }
        assert!((&j - &expect).norm() < 1e-12 * expect.norm());
        assert!(relative_divergence(&j) < 1e-12);
    }

    #[test]
    fn limit_energy_identity_and_decay_mode() {
        let g = build_grid(2, 16).unwrap();
        let p = Params { sigma: 1.5, c: 0.8, ..Params::default() };
        let s = random_state(&g, 21, 0.2);
        let l = LimitState { u: s.u, e: s.e, b: s.b, t: 0.0 };
        let terms = nsmo_rhs(&l, &p).unwrap();
        let t = terms.tendency();
        let lhs = l.u.inner(&t.u) + l.e.inner(&t.e) + l.b.inner(&t.b);
        let rhs = -p.mu * grad_sq(&l.u) - terms.j.norm_sq() / p.sigma;
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());

        let mut single = LimitState::zeros(&g);
        single.e = friedrichs_cutoff(&random_solenoidal(&g, 1.0, 1.0, &mut ChaCha8Rng::seed_from_u64(2)), 1.0);
        let t = nsmo_rhs(&single, &p).unwrap().tendency();
        let decay = single.e.scaled(-p.sigma * p.c * p.c);
        assert!((&t.e - &(&decay + &curl(&single.b).scaled(p.c))).norm() < 1e-14);
    }
}
