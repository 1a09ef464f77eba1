//! Energies, dissipations, frequency tails, difference functionals and the
//! limit-system residual, on single states and along trajectories.
//!
//! Notation: `E_l2 = (||u||^2 + eps^2 ||j||^2 + ||E||^2 + ||B||^2) / 2` and
//! `D_l2 = mu ||grad u||^2 + mu eps^2 ||grad j||^2 + ||j||^2 / sigma` satisfy
//! `dE_l2/dt = -D_l2`. The Sobolev energy `E_cal` measures `u` in `H^{s'}`
//! and `(eps j, E, B)` in `H^s`; `D_cal` is its dissipation.

mod report;

use crate::besov::{block_energies, dyadic_sum_sq, gradient_block_energies, FrequencyWeight};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{SpectralField, VectorField};
use crate::systems::{nsmo_ohm, Params, PlasmaState, SystemState};

pub use report::{EnergyReport, ReportBuilder, ReportConfig, ReportRow, ReportSummary};

fn grad_sq(v: &VectorField) -> f64 {
    let ksq = v.grid().ksq();
    v.comps()
        .iter()
        .map(|c| c.coeffs().iter().zip(ksq).map(|(x, k)| k * x.norm_sqr()).sum::<f64>())
        .sum()
}

fn ohm_from(state: &SystemState, params: &Params, uxb: &VectorField) -> VectorField {
    let mut j = state.e().scaled(params.c);
    j.axpy(1.0, uxb);
    j.scaled(params.sigma)
}

/// Quadratic L2 energy; the limit system has no `eps^2 ||j||^2` term.
pub fn l2_energy(state: &SystemState, params: &Params) -> f64 {
    let base = state.u().norm_sq() + state.e().norm_sq() + state.b().norm_sq();
    let j = match state {
        SystemState::Plasma(p) => params.eps * params.eps * p.j.norm_sq(),
        SystemState::Limit(_) => 0.0,
    };
    0.5 * (base + j)
}

/// L2 dissipation rate; `uxb = P(u x B)` supplies the Ohm's-law current of
/// the limit system.
pub fn l2_dissipation(state: &SystemState, params: &Params, uxb: &VectorField) -> f64 {
    let visc = params.mu * grad_sq(state.u());
    match state {
        SystemState::Plasma(p) => {
            visc + params.mu * params.eps * params.eps * grad_sq(&p.j) + p.j.norm_sq() / params.sigma
        }
        SystemState::Limit(_) => visc + ohm_from(state, params, uxb).norm_sq() / params.sigma,
    }
}

fn hs_sq(f: &VectorField, s: f64, w: Option<&FrequencyWeight>) -> f64 {
    dyadic_sum_sq(&block_energies(f), s, w, -1, i32::MAX)
}

fn grad_hs_sq(f: &VectorField, s: f64, w: Option<&FrequencyWeight>) -> f64 {
    dyadic_sum_sq(&gradient_block_energies(f), s, w, -1, i32::MAX)
}

/// `E_cal = ||u||^2_{H^{s'}} + ||eps j||^2_{H^s} + ||E||^2_{H^s} + ||B||^2_{H^s}`,
/// every term weighted by `omega` when given.
pub fn energy_e(state: &PlasmaState, params: &Params, weight: Option<&FrequencyWeight>) -> f64 {
    let (s, sp) = (params.s, params.s_prime);
    hs_sq(&state.u, sp, weight)
        + params.eps * params.eps * hs_sq(&state.j, s, weight)
        + hs_sq(&state.e, s, weight)
        + hs_sq(&state.b, s, weight)
}

/// `D_cal = mu ||grad u||^2_{H^{s'}} + mu ||eps grad j||^2_{H^s} + ||j||^2_{H^s} / sigma`.
pub fn dissipation_d(state: &PlasmaState, params: &Params, weight: Option<&FrequencyWeight>) -> f64 {
    let (s, sp) = (params.s, params.s_prime);
    params.mu * grad_hs_sq(&state.u, sp, weight)
        + params.mu * params.eps * params.eps * grad_hs_sq(&state.j, s, weight)
        + hs_sq(&state.j, s, weight) / params.sigma
}

/// `(E_cal, D_cal)` of either system; the limit system carries `eps = 0` in
/// the energy and the Ohm's-law current in the dissipation.
pub fn energy_pair(
    state: &SystemState,
    params: &Params,
    weight: Option<&FrequencyWeight>,
    uxb: &VectorField,
) -> (f64, f64) {
    match state {
        SystemState::Plasma(p) => (energy_e(p, params, weight), dissipation_d(p, params, weight)),
        SystemState::Limit(l) => {
            let (s, sp) = (params.s, params.s_prime);
            let j = ohm_from(state, params, uxb);
            let e = hs_sq(&l.u, sp, weight) + hs_sq(&l.e, s, weight) + hs_sq(&l.b, s, weight);
            let d = params.mu * grad_hs_sq(&l.u, sp, weight) + hs_sq(&j, s, weight) / params.sigma;
            (e, d)
        }
    }
}

/// Share of `E_cal` carried by blocks `k > k0`.
pub fn tail_fraction(state: &PlasmaState, k0: i32, params: &Params) -> Result<f64> {
    if k0 < -1 {
        return Err(Error::InvalidArgument(format!("split index {k0} < -1")));
    }
    let e2 = params.eps * params.eps;
    let parts = [
        (&state.u, params.s_prime, 1.0),
        (&state.j, params.s, e2),
        (&state.e, params.s, 1.0),
        (&state.b, params.s, 1.0),
    ];
    let (mut lo, mut hi) = (0.0, 0.0);
    for (f, s, w) in parts {
        let b = block_energies(f);
        lo += w * dyadic_sum_sq(&b, s, None, -1, k0);
        hi += w * dyadic_sum_sq(&b, s, None, k0 + 1, i32::MAX);
    }
    let total = lo + hi;
    Ok(if total == 0.0 { 0.0 } else { hi / total })
}

/// `(E_diff, D_diff)` between two bulk states: `||du||^2_{H^{s'}} + ||dE||^2_{H^s}
/// + ||dB||^2_{H^s}` and `mu ||grad du||^2_{H^{s'}} + ||dj||^2_{H^s} / sigma`.
pub fn diff_functionals(a: &PlasmaState, b: &PlasmaState, params: &Params) -> Result<(f64, f64)> {
    a.grid().same_as(b.grid())?;
    let (s, sp) = (params.s, params.s_prime);
    let du = &a.u - &b.u;
    let dj = &a.j - &b.j;
    let e = hs_sq(&du, sp, None) + hs_sq(&(&a.e - &b.e), s, None) + hs_sq(&(&a.b - &b.b), s, None);
    let d = params.mu * grad_hs_sq(&du, sp, None) + hs_sq(&dj, s, None) / params.sigma;
    Ok((e, d))
}

/// `max_n |(E_{n+1} - E_n)/dt_n + (D_n + D_{n+1})/2| / E_0` along the run.
pub fn l2_energy_residual(traj: &Trajectory) -> Result<f64> {
    if traj.times.len() < 2 {
        return Err(Error::MissingData("energy residual needs at least two steps".into()));
    }
    let e0 = traj.e_l2[0];
    if e0 == 0.0 {
        return Ok(0.0);
    }
    let worst = (1..traj.times.len())
        .map(|n| step_residual(traj.times[n] - traj.times[n - 1], &traj.e_l2[n - 1..=n], &traj.d_l2[n - 1..=n]).abs())
        .fold(0.0, f64::max);
    Ok(worst / e0)
}

/// Trapezoid defect of `dE/dt = -D` across one step.
pub(crate) fn step_residual(dt: f64, e: &[f64], d: &[f64]) -> f64 {
    (e[1] - e[0]) / dt + 0.5 * (d[0] + d[1])
}

/// `int ||eps^2 dj/dt||^2_{H^s_{<=k0}} dt` by the trapezoid rule over the
/// recorded tendencies.
pub fn dtj_lowfreq_integral(traj: &Trajectory, k0: i32, params: &Params) -> Result<f64> {
    if traj.dtj_blocks.len() != traj.times.len() || traj.dtj_blocks.is_empty() {
        return Err(Error::MissingData(
            "trajectory carries no current-tendency records".into(),
        ));
    }
    let vals: Vec<f64> = traj
        .dtj_blocks
        .iter()
        .map(|b| dyadic_sum_sq(b, params.s, None, -1, k0))
        .collect();
    Ok(trapezoid(&traj.times, &vals))
}

pub(crate) fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

fn full_norm(state: &PlasmaState) -> f64 {
    state.l2_norm()
}

/// Ohm's-law defect `||j - sigma(c E + P(u x B))||_{H^s} / (1 + ||(u, j, E, B)||_{L^2})`.
pub fn nsmo_residual(state: &PlasmaState, params: &Params) -> Result<f64> {
    let ohm = nsmo_ohm(&state.u, &state.e, &state.b, params)?;
    Ok(hs_sq(&(&state.j - &ohm), params.s, None).sqrt() / (1.0 + full_norm(state)))
}

/// [`nsmo_residual`] with a precomputed `P(u x B)`.
pub(crate) fn nsmo_residual_with(state: &PlasmaState, params: &Params, uxb: &VectorField) -> f64 {
    let mut ohm = state.e.scaled(params.c);
    ohm.axpy(1.0, uxb);
    let ohm = ohm.scaled(params.sigma);
    hs_sq(&(&state.j - &ohm), params.s, None).sqrt() / (1.0 + full_norm(state))
}
