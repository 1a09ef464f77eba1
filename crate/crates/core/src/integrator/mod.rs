//! Time integration of the Friedrichs-truncated systems.
//!
//! The per-mode linear block is propagated exactly (matrix exponentials and
//! phi-functions, cached per step size); the projected quadratic terms are
//! explicit. Step sizes live on a dyadic ladder `dt_max / 2^k` so that
//! propagators are reused and every output time is hit exactly.

pub mod expm;
mod propagator;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::besov::{block_energies, sup_norm};
use crate::diagnostics::{l2_dissipation, l2_energy, EnergyReport, ReportBuilder, ReportConfig};
use crate::error::{Error, Result};
use crate::spectral::{leray_project, relative_divergence, SpectralField, VectorField};
use crate::systems::{eqnsm_nonlinear, nsmo_nonlinear, Params, SystemKind, SystemState};

pub(crate) use propagator::LinearPart;
use propagator::{ModeTable, Op, Propagator};

/// Finest dyadic level below `dt_max`.
const MAX_LEVEL: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Second-order exponential Runge-Kutta (Cox-Matthews).
    #[serde(rename = "etd2")]
    Etd2,
    /// Half linear step, explicit midpoint for the quadratic terms, half linear step.
    #[serde(rename = "strang-exp")]
    StrangExp,
}

/// Which terms are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    Full,
    /// Linear block only.
    Linear,
    /// `E`, `B` rotation only; `u` and `j` frozen.
    MaxwellOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    /// Largest step.
    pub dt: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    /// Friedrichs radius; defaults to the dealiased radius `n/2 - 1`.
    pub m: Option<f64>,
    /// First step of the graded start `dt <= dt0 + t / layer_steps`.
    pub layer_dt0: Option<f64>,
    pub layer_steps: usize,
    pub dynamics: Dynamics,
    /// Abort when the L2 energy exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Snapshot interval (rounded to a multiple of the largest step).
    pub record_every: Option<f64>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: 1e-3,
            scheme: Scheme::Etd2,
            cfl_safety: 0.5,
            m: None,
            layer_dt0: None,
            layer_steps: 16,
            dynamics: Dynamics::Full,
            blowup_factor: 10.0,
            record_every: None,
        }
    }
}

impl StepperConfig {
    pub fn radius(&self, grid: &crate::spectral::Grid) -> f64 {
        self.m.unwrap_or_else(|| grid.dealiased_radius())
    }

    pub fn validate(&self, grid: &crate::spectral::Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::config("cfl_safety", format!("must lie in (0, 1), got {}", self.cfl_safety)));
        }
        let m = self.radius(grid);
        if !(m > 0.0 && m <= (grid.n() / 2) as f64) {
            return Err(Error::config(
                "m",
                format!("Friedrichs radius {m} must lie in (0, n/2 = {}]", grid.n() / 2),
            ));
        }
        if let Some(d0) = self.layer_dt0 {
            if !(d0 > 0.0) {
                return Err(Error::config("layer_dt0", format!("must be positive, got {d0}")));
            }
            if self.layer_steps == 0 {
                return Err(Error::config("layer_steps", "must be at least 1"));
            }
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::config("blowup_factor", "must exceed 1"));
        }
        Ok(())
    }
}

/// Advective step limit `cfl / (m (||u||_inf + eps ||j||_inf))`, capped at `dt`.
/// The stiff linear rates do not enter: they are integrated exactly.
pub fn stable_dt(state: &SystemState, params: &Params, config: &StepperConfig) -> Result<f64> {
    let m = config.radius(state.grid());
    let mut speed = sup_norm(state.u())?;
    if let SystemState::Plasma(p) = state {
        speed += params.eps * sup_norm(&p.j)?;
    }
    let rate = m * speed;
    if rate <= 0.0 {
        return Ok(config.dt);
    }
    Ok(config.dt.min(config.cfl_safety / rate))
}

/// Shared time axis: dyadic steps below `dt_max`, graded start, exact hits
/// of the end time and of every record time.
#[derive(Clone, Debug)]
pub struct Schedule {
    dt_max: f64,
    ticks: u64,
    end: u64,
    record: Option<u64>,
    layer: Option<(f64, usize)>,
}

impl Schedule {
    /// `dt_max` is shrunk so that `t_end` is a whole number of largest steps.
    pub fn new(t_end: f64, config: &StepperConfig) -> Result<Self> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be nonnegative, got {t_end}")));
        }
        let steps = (t_end / config.dt).ceil().max(1.0);
        let dt_max = if t_end > 0.0 { t_end / steps } else { config.dt };
        let unit = 1u64 << MAX_LEVEL;
        let record = config
            .record_every
            .map(|r| ((r / dt_max).round().max(1.0) as u64) * unit);
        Ok(Schedule {
            dt_max,
            ticks: 0,
            end: if t_end > 0.0 { steps as u64 * unit } else { 0 },
            record,
            layer: config.layer_dt0.map(|d| (d, config.layer_steps)),
        })
    }

    pub fn t(&self) -> f64 {
        self.ticks as f64 / (1u64 << MAX_LEVEL) as f64 * self.dt_max
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    pub fn done(&self) -> bool {
        self.ticks >= self.end
    }

    /// True at `t = 0`, at every record time and at the end.
    pub fn at_record(&self) -> bool {
        self.ticks == 0 || self.done() || self.record.is_some_and(|r| self.ticks % r == 0)
    }

    /// Next step: the largest dyadic step not above `limit` or the graded
    /// cap, aligned with the current time and not overshooting any record
    /// time. Returns the step length in ticks.
    pub fn next_step(&self, limit: f64) -> u64 {
        let mut cap = limit.min(self.dt_max);
        if let Some((d0, steps)) = self.layer {
            cap = cap.min(d0 + self.t() / steps as f64);
        }
        let mut level = 0;
        while level < MAX_LEVEL && self.dt_max / f64::powi(2.0, level as i32) > cap {
            level += 1;
        }
        let mut len = 1u64 << (MAX_LEVEL - level);
        while self.ticks % len != 0 {
            len >>= 1;
        }
        len.min(self.end - self.ticks)
    }

    pub fn ticks_to_dt(&self, len: u64) -> f64 {
        len as f64 / (1u64 << MAX_LEVEL) as f64 * self.dt_max
    }

    pub fn advance(&mut self, len: u64) {
        self.ticks += len;
    }
}

/// Per-step data handed to observers.
pub struct StepView<'a> {
    pub index: usize,
    pub t: f64,
    /// Length of the step that reached `t` (0 at the start).
    pub dt: f64,
    pub state: &'a SystemState,
    pub params: &'a Params,
    /// `P(u x B)` at this state.
    pub uxb: &'a VectorField,
    /// `eps^2 dj/dt` from the right-hand side, bulk system only.
    pub eps2_dj: Option<&'a VectorField>,
}

pub trait Observer {
    fn observe(&mut self, view: &StepView) -> Result<()>;
}

struct Eval {
    /// Nonlinear tendency in state order, truncated to the ball.
    n: Vec<VectorField>,
    uxb: VectorField,
}

/// Evolves one state along a [`Schedule`].
pub struct Stepper {
    params: Params,
    config: StepperConfig,
    table: Arc<ModeTable>,
    cache: HashMap<u64, Propagator>,
    state: SystemState,
    eval: Option<Eval>,
    eps2_dj: Option<VectorField>,
}

impl Stepper {
    /// Validates the data, truncates it to the Friedrichs ball.
    pub fn new(state: SystemState, params: &Params, config: &StepperConfig) -> Result<Self> {
        params.validate()?;
        config.validate(state.grid())?;
        state.validate()?;
        let table = Arc::new(ModeTable::new(state.grid(), config.radius(state.grid())));
        let kind = state.kind();
        let t = state.t();
        let fields = state
            .fields()
            .into_iter()
            .map(|f| {
                let mut f = f.clone();
                table.truncate(&mut f);
                f
            })
            .collect();
        Ok(Stepper {
            params: *params,
            config: config.clone(),
            table,
            cache: HashMap::new(),
            state: SystemState::from_fields(kind, fields, t)?,
            eval: None,
            eps2_dj: None,
        })
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn into_state(self) -> SystemState {
        self.state
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn stable_dt(&self) -> Result<f64> {
        stable_dt(&self.state, &self.params, &self.config)
    }

    fn nonlinear(&self, fields: &[&VectorField]) -> Result<Eval> {
        let grid = fields[0].grid();
        let zero = VectorField::zeros(grid);
        let p = &self.params;
        let (mut n, uxb) = match self.state.kind() {
            SystemKind::Eqnsm => {
                let [nu, nj, uxb] = eqnsm_nonlinear(fields[0], fields[1], fields[3], p.eps)?;
                (vec![nu, nj, zero.clone(), zero], uxb)
            }
            SystemKind::Nsmo => {
                let [nu, ne, uxb] = nsmo_nonlinear(fields[0], fields[1], fields[2], p)?;
                (vec![nu, ne, zero], uxb)
            }
        };
        if self.config.dynamics != Dynamics::Full {
            n.iter_mut().for_each(|f| *f = VectorField::zeros(grid));
        }
        for f in &mut n {
            self.table.truncate(f);
        }
        Ok(Eval { n, uxb })
    }

    fn ensure_eval(&mut self) -> Result<()> {
        if self.eval.is_none() {
            let e = self.nonlinear(&self.state.fields())?;
            self.eval = Some(e);
        }
        Ok(())
    }

    /// `P(u x B)` at the current state.
    pub fn uxb(&mut self) -> Result<&VectorField> {
        self.ensure_eval()?;
        Ok(&self.eval.as_ref().expect("evaluated").uxb)
    }

    /// `eps^2 dj/dt` at the current state (bulk system only): the current
    /// equation's tendency multiplied back by `eps^2` term by term.
    pub fn eps2_dj(&mut self) -> Result<Option<&VectorField>> {
        let SystemState::Plasma(p) = &self.state else { return Ok(None) };
        if self.eps2_dj.is_none() {
            let p = p.clone();
            self.ensure_eval()?;
            let ev = self.eval.as_ref().expect("evaluated");
            let prm = &self.params;
            let e2 = prm.eps * prm.eps;
            let ksq = p.j.grid().ksq().to_vec();
            let mut out = ev.n[1].scaled(e2);
            out.axpy(prm.c, &p.e);
            out.axpy(1.0, &p.j.apply_multiplier(|idx| -1.0 / prm.sigma - e2 * prm.mu * ksq[idx]));
            if self.config.dynamics == Dynamics::MaxwellOnly {
                out = VectorField::zeros(p.j.grid());
            }
            self.table.truncate(&mut out);
            self.eps2_dj = Some(out);
        }
        Ok(self.eps2_dj.as_ref())
    }

    fn propagator(&mut self, h: f64) -> &Propagator {
        let part = match self.config.dynamics {
            Dynamics::MaxwellOnly => LinearPart::MaxwellOnly,
            _ => LinearPart::Full,
        };
        let kind = self.state.kind();
        let (table, params) = (&self.table, &self.params);
        self.cache
            .entry(h.to_bits())
            .or_insert_with(|| Propagator::new(table, h, params, kind, part))
    }

    /// One step of length `h`.
    pub fn step(&mut self, h: f64) -> Result<()> {
        if h <= 0.0 {
            return Ok(());
        }
        self.ensure_eval()?;
        let kind = self.state.kind();
        let t = self.state.t();
        let x: Vec<VectorField> = self.state.fields().into_iter().cloned().collect();
        let nx = self.eval.take().expect("evaluated").n;
        let xr: Vec<&VectorField> = x.iter().collect();
        let nxr: Vec<&VectorField> = nx.iter().collect();
        let mut next = match self.config.scheme {
            Scheme::Etd2 => {
                let table = self.table.clone();
                let prop = self.propagator(h);
                let a = prop.combine(&table, &[(Op::Exp, 1.0, &xr), (Op::Phi1, h, &nxr)]);
                let ar: Vec<&VectorField> = a.iter().collect();
                let na = self.nonlinear(&ar)?.n;
                let nar: Vec<&VectorField> = na.iter().collect();
                let prop = self.propagator(h);
                prop.combine(&table, &[(Op::Exp, 1.0, &xr), (Op::Phi1m2, h, &nxr), (Op::Phi2, h, &nar)])
            }
            Scheme::StrangExp => {
                let table = self.table.clone();
                let half = self.propagator(0.5 * h);
                let xh = half.combine(&table, &[(Op::Exp, 1.0, &xr)]);
                let xhr: Vec<&VectorField> = xh.iter().collect();
                let n1 = self.nonlinear(&xhr)?.n;
                let mid: Vec<VectorField> = xh
                    .iter()
                    .zip(&n1)
                    .map(|(a, b)| {
                        let mut m = a.clone();
                        m.axpy(0.5 * h, b);
                        m
                    })
                    .collect();
                let midr: Vec<&VectorField> = mid.iter().collect();
                let n2 = self.nonlinear(&midr)?.n;
                let z: Vec<VectorField> = xh
                    .iter()
                    .zip(&n2)
                    .map(|(a, b)| {
                        let mut m = a.clone();
                        m.axpy(h, b);
                        m
                    })
                    .collect();
                let zr: Vec<&VectorField> = z.iter().collect();
                let half = self.propagator(0.5 * h);
                half.combine(&table, &[(Op::Exp, 1.0, &zr)])
            }
        };
        for f in &mut next {
            f.symmetrize();
            *f = leray_project(f);
        }
        if !next.iter().all(|f| f.is_finite()) {
            return Err(Error::NonFinite {
                time: t + h,
                context: "state after step".into(),
            });
        }
        self.state = SystemState::from_fields(kind, next, t + h)?;
        self.eval = None;
        self.eps2_dj = None;
        Ok(())
    }

    /// Overrides the state's time, e.g. to pin it to an exact schedule time.
    pub fn set_time(&mut self, t: f64) {
        self.state.set_t(t);
    }

    /// Snapshot of the per-step view data for observers.
    pub fn observe(&mut self, index: usize, dt: f64, observers: &mut [&mut dyn Observer]) -> Result<()> {
        self.ensure_eval()?;
        self.eps2_dj()?;
        let view = StepView {
            index,
            t: self.state.t(),
            dt,
            state: &self.state,
            params: &self.params,
            uxb: &self.eval.as_ref().expect("evaluated").uxb,
            eps2_dj: self.eps2_dj.as_ref(),
        };
        for o in observers.iter_mut() {
            o.observe(&view)?;
        }
        Ok(())
    }
}

/// Step-by-step record of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: SystemKind,
    pub params: Params,
    /// Every step time, starting at the initial time.
    pub times: Vec<f64>,
    /// Quadratic L2 energy at every step.
    pub e_l2: Vec<f64>,
    /// Its dissipation rate at every step.
    pub d_l2: Vec<f64>,
    /// Squared dyadic block norms of `eps^2 dj/dt` at every step (bulk system).
    pub dtj_blocks: Vec<Vec<f64>>,
    /// States at the record times.
    pub snapshots: Vec<SystemState>,
    /// Largest relative divergence met along the run.
    pub max_divergence: f64,
}

impl Trajectory {
    fn new(kind: SystemKind, params: Params) -> Self {
        Trajectory {
            kind,
            params,
            times: Vec::new(),
            e_l2: Vec::new(),
            d_l2: Vec::new(),
            dtj_blocks: Vec::new(),
            snapshots: Vec::new(),
            max_divergence: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.snapshots.last()
    }
}

struct TrajectoryRecorder<'a> {
    traj: &'a mut Trajectory,
    record: bool,
}

impl Observer for TrajectoryRecorder<'_> {
    fn observe(&mut self, v: &StepView) -> Result<()> {
        let t = &mut *self.traj;
        t.times.push(v.t);
        t.e_l2.push(l2_energy(v.state, v.params));
        t.d_l2.push(l2_dissipation(v.state, v.params, v.uxb));
        if let Some(dj) = v.eps2_dj {
            t.dtj_blocks.push(block_energies(dj));
        }
        for f in v.state.fields() {
            t.max_divergence = t.max_divergence.max(relative_divergence(f));
        }
        if self.record {
            t.snapshots.push(v.state.clone());
        }
        Ok(())
    }
}

/// Runs to `t_end` (from the state's own time), calling every observer at
/// each step including the first, and assembles the trajectory and report.
pub fn integrate(
    state0: SystemState,
    t_end: f64,
    params: &Params,
    config: &StepperConfig,
    report: &ReportConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, EnergyReport)> {
    let mut stepper = Stepper::new(state0, params, config)?;
    let t0 = stepper.state().t();
    let mut schedule = Schedule::new(t_end - t0, config)?;
    let mut traj = Trajectory::new(stepper.state().kind(), *params);
    let mut builder = ReportBuilder::new(report.clone(), *params, stepper.state())?;
    let mut index = 0;
    let mut dt = 0.0;
    loop {
        {
            let mut rec = TrajectoryRecorder {
                traj: &mut traj,
                record: schedule.at_record(),
            };
            let mut all: Vec<&mut dyn Observer> = vec![&mut rec, &mut builder];
            for o in observers.iter_mut() {
                all.push(&mut **o);
            }
            stepper.observe(index, dt, &mut all)?;
        }
        let e0 = traj.e_l2[0];
        let e = *traj.e_l2.last().expect("recorded");
        if e0 > 0.0 && e > config.blowup_factor * e0 {
            return Err(Error::BlowUp {
                time: stepper.state().t(),
                ratio: e / e0,
            });
        }
        if schedule.done() {
            break;
        }
        let len = schedule.next_step(stepper.stable_dt()?);
        dt = schedule.ticks_to_dt(len);
        stepper.step(dt)?;
        schedule.advance(len);
        stepper.set_time(t0 + schedule.t());
        index += 1;
    }
    Ok((traj, builder.finish()))
}
