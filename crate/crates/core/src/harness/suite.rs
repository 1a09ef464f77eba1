//! Property suites: every module invariant measured on seeded random data.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::run::Check;
use crate::besov::{
    besov_norm, block_energies, build_frequency_envelope, paraproduct, remainder, BesovSpec,
};
use crate::diagnostics::ReportConfig;
use crate::error::{Error, Result};
use crate::initial::{random_scalar, random_solenoidal, CurrentInit, InitialData};
use crate::integrator::expm::expm;
use crate::integrator::{integrate, Dynamics, Schedule, Stepper, StepperConfig};
use crate::spectral::{
    build_grid, dyadic_block, from_spectral, leray_project, pointwise_product, relative_divergence, to_spectral,
    Grid, ScalarField, ANNULUS_INNER, ANNULUS_OUTER, SpectralField, VectorField,
};
use crate::systems::{eqnsm_rhs, linear_matrix, nsmo_ohm, nsmo_rhs, LimitState, Params, PlasmaState, SystemKind, SystemState};

/// Identities at round-off level.
pub const EXACT: f64 = 1e-12;
/// Energy balances, which sum many round-off-sized terms.
pub const BALANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Spectral,
    Besov,
    Systems,
    Integrator,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Spectral, Suite::Besov, Suite::Systems, Suite::Integrator];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Spectral => "spectral",
            Suite::Besov => "besov",
            Suite::Systems => "systems",
            Suite::Integrator => "integrator",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}` (spectral, besov, systems, integrator)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn label(g: &Grid) -> String {
    format!("d{}n{}", g.dim(), g.n())
}

fn random_vector(g: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::from_components([random_scalar(g, rng), random_scalar(g, rng), random_scalar(g, rng)])
        .expect("same grid")
}

/// Partition of unity, block reconstruction, quasi-orthogonality, Leray
/// projector identities, FFT round trip, Parseval and Bony reconstruction.
pub fn spectral_identities(g: &Grid, seed: u64) -> Result<Vec<Check>> {
    let tag = label(g);
    let name = |s: &str| format!("{s}[{tag}]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_scalar(g, &mut rng);
    let top = g.profile().top();
    let mut out = Vec::new();

    let pou = (0..g.len())
        .map(|i| ((-1..=top).map(|k| g.profile().weight(k, i)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most(&name("partition_of_unity"), pou, EXACT));

    let blocks: Vec<ScalarField> = (-1..=top).map(|k| dyadic_block(&f, k)).collect::<Result<_>>()?;
    let mut sum = ScalarField::zeros(g);
    for b in &blocks {
        sum.axpy(1.0, b);
    }
    out.push(Check::at_most(&name("block_reconstruction"), (&sum - &f).norm() / f.norm(), EXACT));

    let mut qo: f64 = 0.0;
    for (m, bm) in blocks.iter().enumerate() {
        for bk in blocks.iter().skip(m + 2) {
            qo = qo.max(bm.inner(bk).abs());
        }
    }
    out.push(Check::at_most(&name("quasi_orthogonality"), qo / f.norm_sq(), EXACT));

    let v = random_vector(g, &mut rng);
    let pv = leray_project(&v);
    let ppv = leray_project(&pv);
    out.push(Check::at_most(&name("leray_idempotent"), (&ppv - &pv).norm() / v.norm(), EXACT));
    out.push(Check::at_most(&name("leray_div_kill"), relative_divergence(&pv), EXACT));
    let orth = pv.inner(&(&v - &pv)).abs() / v.norm_sq();
    out.push(Check::at_most(&name("leray_orthogonal"), orth, EXACT));

    let phys = from_spectral(&f)?;
    let back = to_spectral(g, &phys)?;
    out.push(Check::at_most(&name("fft_round_trip"), (&back - &f).norm() / f.norm(), EXACT));
    let mean_sq = phys.iter().map(|x| x * x).sum::<f64>() / phys.len() as f64;
    out.push(Check::at_most(&name("parseval"), (mean_sq - f.norm_sq()).abs() / f.norm_sq(), EXACT));

    let h = random_scalar(g, &mut rng);
    out.push(Check::at_most(&name("bony_reconstruction"), bony_defect(&f, &h)?, EXACT));
    Ok(out)
}

/// `||T_f g + T_g f + R(f, g) - f g|| / ||f g||`.
pub fn bony_defect(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    let fg = pointwise_product(f, g)?;
    let mut s = paraproduct(f, g)?;
    s.axpy(1.0, &paraproduct(g, f)?);
    s.axpy(1.0, &remainder(f, g)?);
    let scale = fg.norm();
    Ok(if scale == 0.0 { s.norm() } else { (&s - &fg).norm() / scale })
}

/// Extremes of `||grad Delta_k f|| / (2^k ||Delta_k f||)` over `count` random
/// fields localised to block `k`.
pub fn bernstein_ratios(g: &Grid, k: i32, count: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ksq = g.ksq();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..count {
        let f = dyadic_block(&random_scalar(g, &mut rng), k)?;
        let h = dyadic_block(&f, k)?;
        let grad: f64 = h.coeffs().iter().zip(ksq).map(|(c, q)| q * c.norm_sqr()).sum();
        let r = grad.sqrt() / (f64::powi(2.0, k) * h.norm());
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Besov norm against a direct block-by-block evaluation.
pub fn besov_oracle_defect(g: &Grid, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_scalar(g, &mut rng);
    let spec = BesovSpec::new(1.3, 2.0, 2.0)?;
    let got = besov_norm(&f, &spec)?;
    let mut want = 0.0;
    for k in -1..=g.profile().top() {
        want += f64::powf(2.0, 2.0 * 1.3 * k as f64) * dyadic_block(&f, k)?.norm_sq();
    }
    Ok((got - want.sqrt()).abs() / want.sqrt())
}

fn random_plasma(g: &Grid, seed: u64, amp: f64) -> PlasmaState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = g.dealiased_radius();
    let mut f = || random_solenoidal(g, kmax, 1.0, &mut rng).scaled(amp);
    PlasmaState {
        u: f(),
        j: f(),
        e: f(),
        b: f(),
        t: 0.0,
    }
}

fn grad_sq(v: &VectorField) -> f64 {
    let ksq = v.grid().ksq();
    v.comps()
        .iter()
        .map(|c| c.coeffs().iter().zip(ksq).map(|(x, q)| q * x.norm_sqr()).sum::<f64>())
        .sum()
}

/// Relative defects of the instantaneous L2 energy balances of both systems.
pub fn energy_balance_defects(g: &Grid, params: &Params, seed: u64) -> Result<(f64, f64)> {
    let s = random_plasma(g, seed, 0.1);
    let t = eqnsm_rhs(&s, params)?.tendency();
    let e2 = params.eps * params.eps;
    let lhs = s.u.inner(&t.u) + e2 * s.j.inner(&t.j) + s.e.inner(&t.e) + s.b.inner(&t.b);
    let rhs = -params.mu * grad_sq(&s.u) - params.mu * e2 * grad_sq(&s.j) - s.j.norm_sq() / params.sigma;
    let bulk = (lhs - rhs).abs() / rhs.abs();

    let l = LimitState {
        u: s.u,
        e: s.e,
        b: s.b,
        t: 0.0,
    };
    let terms = nsmo_rhs(&l, params)?;
    let t = terms.tendency();
    let lhs = l.u.inner(&t.u) + l.e.inner(&t.e) + l.b.inner(&t.b);
    let rhs = -params.mu * grad_sq(&l.u) - terms.j.norm_sq() / params.sigma;
    Ok((bulk, (lhs - rhs).abs() / rhs.abs()))
}

/// Largest per-mode deviation of a nonlinearity-off run from the dense
/// matrix exponential, relative to the largest initial coefficient.
pub fn linear_exactness(g: &Grid, params: &Params, kind: SystemKind, dt: f64, steps: usize, seed: u64) -> Result<f64> {
    let s0 = random_plasma(g, seed, 0.3);
    let state = match kind {
        SystemKind::Eqnsm => SystemState::Plasma(s0),
        SystemKind::Nsmo => SystemState::Limit(LimitState {
            u: s0.u,
            e: s0.e,
            b: s0.b,
            t: 0.0,
        }),
    };
    let cfg = StepperConfig {
        dt,
        dynamics: Dynamics::Linear,
        ..Default::default()
    };
    let mut st = Stepper::new(state.clone(), params, &cfg)?;
    for _ in 0..steps {
        st.step(dt)?;
    }
    let end = st.into_state();
    let t = dt * steps as f64;
    let m = cfg.radius(g);
    let nc = 3 * state.fields().len();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for idx in 0..g.len() {
        if g.radii()[idx] > m || g.is_nyquist(idx) {
            continue;
        }
        let x0: Vec<Complex64> = state.fields().iter().flat_map(|f| f.at(idx)).collect();
        scale = x0.iter().fold(scale, |a, z| a.max(z.norm()));
        let want = expm(&linear_matrix(g.wave(idx), params, kind).scale(t)) * DVector::from_vec(x0);
        let got: Vec<Complex64> = end.fields().iter().flat_map(|f| f.at(idx)).collect();
        debug_assert_eq!(got.len(), nc);
        for (w, x) in want.iter().zip(&got) {
            worst = worst.max((w - x).norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Energy-norm distance `(u, eps j, E, B)` between runs at `dt` and `dt/2`
/// from the same small random data, relative to the initial norm. Every other
/// stepper setting comes from `base`; a graded start is refined with the step.
/// `current` picks the initial current; a zero current puts an initial layer
/// of width `eps^2 sigma` into the run.
pub fn richardson_defect(
    g: &Grid,
    params: &Params,
    t_end: f64,
    dt: f64,
    base: &StepperConfig,
    current: CurrentInit,
    seed: u64,
) -> Result<f64> {
    let mut s0 = random_plasma(g, seed, 0.05);
    s0.j = match current {
        CurrentInit::Zero => VectorField::zeros(g),
        CurrentInit::Ohm => nsmo_ohm(&s0.u, &s0.e, &s0.b, params)?,
    };
    let run = |refine: usize| -> Result<PlasmaState> {
        let cfg = StepperConfig {
            dt: dt / refine as f64,
            cfl_safety: 0.99,
            layer_dt0: base.layer_dt0.map(|d| d / refine as f64),
            layer_steps: base.layer_steps * refine,
            ..base.clone()
        };
        let (traj, _) = integrate(SystemState::Plasma(s0.clone()), t_end, params, &cfg, &ReportConfig::default(), &mut [])?;
        match traj.last() {
            Some(SystemState::Plasma(p)) => Ok(p.clone()),
            _ => Err(Error::MissingData("run recorded no final state".into())),
        }
    };
    let a = run(1)?;
    let b = run(2)?;
    let e = params.eps;
    let d = (&a.u - &b.u).norm_sq() + e * e * (&a.j - &b.j).norm_sq() + (&a.e - &b.e).norm_sq() + (&a.b - &b.b).norm_sq();
    Ok(d.sqrt() / s0.l2_norm())
}

fn spectral_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = spectral_identities(&build_grid(2, 32)?, seed)?;
    out.extend(spectral_identities(&build_grid(3, 16)?, seed + 1)?);
    Ok(out)
}

fn besov_suite(seed: u64) -> Result<Vec<Check>> {
    let g = build_grid(2, 64)?;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // adversarial inputs: both factors inside one or two adjacent blocks
    let mut worst: f64 = 0.0;
    for k in 0..g.profile().top() {
        let f = dyadic_block(&random_scalar(&g, &mut rng), k)?;
        let h = dyadic_block(&random_scalar(&g, &mut rng), k + 1)?;
        worst = worst.max(bony_defect(&f, &h)?).max(bony_defect(&f, &f)?);
    }
    out.push(Check::at_most("bony_single_block", worst, EXACT));
    for k in 0..=4 {
        let (lo, hi) = bernstein_ratios(&g, k, 20, seed + k as u64)?;
        out.push(Check::at_least(&format!("bernstein_lower[k{k}]"), lo, ANNULUS_INNER * (1.0 - 1e-6)));
        out.push(Check::at_most(&format!("bernstein_upper[k{k}]"), hi, ANNULUS_OUTER));
    }
    out.push(Check::at_most("besov_definition_oracle", besov_oracle_defect(&g, seed)?, EXACT));
    let data = InitialData {
        seed,
        ..Default::default()
    }
    .fields(&g, &Params::default())?;
    let family = data.to_vec();
    let w = build_frequency_envelope(&family, 1.6)?;
    out.push(Check::at_least(
        "envelope_axioms",
        if w.satisfies_axioms() { 1.0 } else { 0.0 },
        1.0,
    ));
    let top = g.profile().top();
    let below = (-1..top).filter_map(|k| w.get(k)).fold(0.0, f64::max);
    out.push(Check::at_least("envelope_top_margin", w.get(top).unwrap_or(0.0) / below, 1.0 + 1e-12));
    // weight^2 = 2^m on [N_m, N_{m+1}) with tail(N_m) <= 4^-m bounds the
    // weighted energy of every member by its full H^s energy plus one
    let mut excess: f64 = f64::NEG_INFINITY;
    for f in &family {
        let (mut plain, mut weighted) = (0.0, 0.0);
        for (i, e) in block_energies(f).iter().enumerate() {
            let k = i as i32 - 1;
            let hs = f64::powf(2.0, 2.0 * 1.6 * k as f64) * e;
            plain += hs;
            weighted += w.get(k).unwrap_or(f64::INFINITY).powi(2) * hs;
        }
        excess = excess.max(weighted - plain);
    }
    out.push(Check::at_most("envelope_weighted_energy", excess, 1.0));
    let energies = block_energies(&family[0]);
    out.push(Check::at_least("block_energies_nonnegative", energies.iter().copied().fold(f64::INFINITY, f64::min), 0.0));
    Ok(out)
}

fn systems_suite(seed: u64) -> Result<Vec<Check>> {
    let p = Params::default().with_eps(0.2);
    let mut out = Vec::new();
    for (d, n) in [(2, 32), (3, 16)] {
        let g = build_grid(d, n)?;
        let (bulk, lim) = energy_balance_defects(&g, &p, seed)?;
        out.push(Check::at_most(&format!("bulk_energy_balance[{}]", label(&g)), bulk, BALANCE));
        out.push(Check::at_most(&format!("limit_energy_balance[{}]", label(&g)), lim, BALANCE));
        let s = random_plasma(&g, seed + 7, 0.2);
        let t = eqnsm_rhs(&s, &p)?.tendency();
        let div = t.fields().iter().map(|f| relative_divergence(f)).fold(0.0, f64::max);
        out.push(Check::at_most(&format!("solenoidal_tendency[{}]", label(&g)), div, EXACT));
    }
    Ok(out)
}

fn integrator_suite(seed: u64) -> Result<Vec<Check>> {
    let g = build_grid(2, 16)?;
    let mut out = Vec::new();
    for kind in [SystemKind::Eqnsm, SystemKind::Nsmo] {
        let p = Params::default().with_eps(0.05);
        let d = linear_exactness(&g, &p, kind, 0.02, 10, seed)?;
        out.push(Check::at_most(&format!("linear_exactness[{kind:?}]"), d, 1e-11));
    }
    let cfg = StepperConfig {
        dt: 0.3,
        record_every: Some(0.5),
        layer_dt0: Some(1e-4),
        layer_steps: 4,
        ..Default::default()
    };
    let mut sch = Schedule::new(1.0, &cfg)?;
    let mut hits = 0;
    while !sch.done() {
        let len = sch.next_step(f64::INFINITY);
        sch.advance(len);
        if sch.at_record() {
            hits += 1;
        }
    }
    out.push(Check::at_most("schedule_end_defect", (sch.t() - 1.0).abs(), 0.0));
    out.push(Check::at_least("schedule_record_hits", hits as f64, 2.0));
    let p = Params::default().with_eps(0.2);
    let base = StepperConfig::default();
    let e1 = richardson_defect(&g, &p, 0.2, 0.02, &base, CurrentInit::Zero, seed)?;
    let e2 = richardson_defect(&g, &p, 0.2, 0.01, &base, CurrentInit::Zero, seed)?;
    out.push(Check::at_least("second_order_ratio", e1 / e2, 3.0));
    Ok(out)
}

/// Runs one suite; internal errors become failed checks.
pub fn run_property_suite(suite: Suite, seed: u64) -> SuiteReport {
    let res = match suite {
        Suite::Spectral => spectral_suite(seed),
        Suite::Besov => besov_suite(seed),
        Suite::Systems => systems_suite(seed),
        Suite::Integrator => integrator_suite(seed),
    };
    let checks = res.unwrap_or_else(|e| {
        vec![Check {
            name: format!("error: {e}"),
            value: f64::NAN,
            limit: 0.0,
            passed: false,
        }]
    });
    SuiteReport {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for s in Suite::ALL {
            let r = run_property_suite(s, 1);
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            assert!(r.passed, "{s}: {failed:?}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let a = run_property_suite(Suite::Systems, 3);
        let b = run_property_suite(Suite::Systems, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("fluids".parse::<Suite>().is_err());
    }
}
