//! Lockstep epsilon sweeps.
//!
//! Every ladder member (and optionally the limit system) starts from the
//! same `(u, E, B)` and advances on one shared schedule whose step is the
//! smallest stable step of all members. Pairwise difference functionals are
//! evaluated at every step, so suprema and time integrals resolve the
//! initial layers without storing trajectories.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunSpec;
use super::run::{initial_envelope, write_provenance, VERSION};
use crate::diagnostics::{diff_functionals, l2_energy, EnergyReport, ReportBuilder, ReportConfig, ReportSummary};
use crate::error::{Error, Result};
use crate::initial::CurrentInit;
use crate::integrator::{Schedule, Stepper};
use crate::spectral::SpectralField;
use crate::systems::{LimitState, Params, PlasmaState, SystemState};

/// Sup and time integral of one difference pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub sup_e: f64,
    pub int_d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub eps: f64,
    pub report: ReportSummary,
    pub nsmo_residual_final: f64,
    /// Difference to the directly integrated limit system.
    pub gap_to_limit: Option<PairStat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyVerdict {
    /// `sup_t E_diff` of consecutive ladder pairs.
    pub consecutive_sup: Vec<f64>,
    /// `int D_diff dt` of consecutive ladder pairs.
    pub consecutive_int: Vec<f64>,
    pub sup_decreasing: bool,
    pub int_decreasing: bool,
    /// Terminal Ohm's-law residual of the smallest eps over that of the largest.
    pub residual_ratio: f64,
    pub gaps_decreasing: Option<bool>,
    /// Both consecutive sequences strictly decrease.
    pub cauchy: bool,
    /// Empirical log-log slope of the consecutive `sup` differences in eps.
    pub empirical_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub eps: Vec<f64>,
    pub params: Params,
    pub t_end: f64,
    pub steps: usize,
    pub min_dt: f64,
    pub members: Vec<MemberSummary>,
    pub limit: Option<ReportSummary>,
    /// Symmetric, zero diagonal.
    pub sup_e: Vec<Vec<f64>>,
    pub int_d: Vec<Vec<f64>>,
    pub verdict: CauchyVerdict,
}

/// Sweep report plus the full per-run time series.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub report: SweepReport,
    pub member_reports: Vec<EnergyReport>,
    pub limit_report: Option<EnergyReport>,
}

struct Member {
    stepper: Stepper,
    builder: ReportBuilder,
    e0: f64,
}

impl Member {
    fn new(state: SystemState, params: &Params, spec: &RunSpec, rc: &ReportConfig) -> Result<Self> {
        let stepper = Stepper::new(state, params, &spec.stepper)?;
        let builder = ReportBuilder::new(rc.clone(), *params, stepper.state())?;
        let e0 = l2_energy(stepper.state(), params);
        Ok(Member { stepper, builder, e0 })
    }

    fn observe(&mut self, index: usize, dt: f64) -> Result<()> {
        self.stepper.observe(index, dt, &mut [&mut self.builder])?;
        let e = self.builder.last_row().map_or(0.0, |r| r.e_l2);
        if self.e0 > 0.0 && e > self.stepper.config().blowup_factor * self.e0 {
            return Err(Error::BlowUp {
                time: self.stepper.state().t(),
                ratio: e / self.e0,
            });
        }
        Ok(())
    }

    /// Bulk view: the limit member carries its Ohm's-law current.
    fn plasma(&mut self) -> Result<PlasmaState> {
        let params = *self.stepper.params();
        match self.stepper.state().clone() {
            SystemState::Plasma(p) => Ok(p),
            SystemState::Limit(l) => {
                let uxb = self.stepper.uxb()?.clone();
                let mut j = l.e.scaled(params.c);
                j.axpy(1.0, &uxb);
                Ok(PlasmaState {
                    j: j.scaled(params.sigma),
                    u: l.u,
                    e: l.e,
                    b: l.b,
                    t: l.t,
                })
            }
        }
    }
}

fn accumulate(stat: &mut PairStat, prev_d: &mut Option<f64>, e: f64, d: f64, dt: f64) {
    stat.sup_e = stat.sup_e.max(e);
    if let Some(p) = *prev_d {
        stat.int_d += 0.5 * dt * (p + d);
    }
    *prev_d = Some(d);
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Validates the ladder and runs [`sweep_members`].
pub fn run_sweep(spec: &RunSpec) -> Result<SweepResult> {
    spec.validate()?;
    let ladder = spec
        .ladder
        .as_ref()
        .ok_or_else(|| Error::config("ladder", "a sweep needs a [ladder] table"))?;
    if ladder.eps.len() < 3 {
        return Err(Error::config(
            "ladder.eps",
            format!("a Cauchy verdict needs at least 3 members, got {}", ladder.eps.len()),
        ));
    }
    sweep_members(spec, &ladder.eps, ladder.direct_limit)
}

/// Runs the given eps values in lockstep from the shared initial data of `spec`.
///
/// No ordering is imposed on `eps`; the verdict compares neighbours in the
/// order given.
pub fn sweep_members(spec: &RunSpec, eps: &[f64], direct_limit: bool) -> Result<SweepResult> {
    if eps.is_empty() {
        return Err(Error::config("ladder.eps", "must not be empty"));
    }
    let grid = spec.grid()?;
    let base = spec.params;
    let [u, e, b] = spec.initial.fields(&grid, &base)?;
    let shared = SystemState::Limit(LimitState {
        u: u.clone(),
        e: e.clone(),
        b: b.clone(),
        t: 0.0,
    });
    let weight = if spec.diagnostics.weight {
        Some(initial_envelope(&shared, spec)?)
    } else {
        None
    };
    let rc = ReportConfig {
        k0s: spec.diagnostics.k0s.clone(),
        weight,
    };
    let mut members = eps
        .iter()
        .map(|&ep| {
            let p = base.with_eps(ep);
            let j = match spec.initial.current {
                CurrentInit::Zero => crate::spectral::VectorField::zeros(&grid),
                CurrentInit::Ohm => crate::systems::nsmo_ohm(&u, &e, &b, &p)?,
            };
            let state = SystemState::Plasma(PlasmaState {
                u: u.clone(),
                j,
                e: e.clone(),
                b: b.clone(),
                t: 0.0,
            });
            Member::new(state, &p, spec, &rc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut limit = if direct_limit {
        Some(Member::new(shared, &base, spec, &rc)?)
    } else {
        None
    };

    let m = eps.len();
    let mut pairs = vec![vec![PairStat::default(); m]; m];
    let mut prev_pair: Vec<Vec<Option<f64>>> = vec![vec![None; m]; m];
    let mut gaps = vec![PairStat::default(); m];
    let mut prev_gap: Vec<Option<f64>> = vec![None; m];

    let mut schedule = Schedule::new(spec.t_end, &spec.stepper)?;
    let (mut index, mut dt, mut min_dt) = (0usize, 0.0, f64::INFINITY);
    loop {
        members
            .par_iter_mut()
            .chain(limit.par_iter_mut())
            .try_for_each(|mb| mb.observe(index, dt))?;
        let states = members.iter_mut().map(|mb| mb.plasma()).collect::<Result<Vec<_>>>()?;
        for i in 0..m {
            for k in i + 1..m {
                let (de, dd) = diff_functionals(&states[i], &states[k], &base)?;
                accumulate(&mut pairs[i][k], &mut prev_pair[i][k], de, dd, dt);
            }
        }
        if let Some(l) = limit.as_mut() {
            let ls = l.plasma()?;
            for i in 0..m {
                let (de, dd) = diff_functionals(&states[i], &ls, &base)?;
                accumulate(&mut gaps[i], &mut prev_gap[i], de, dd, dt);
            }
        }
        if schedule.done() {
            break;
        }
        let mut limit_dt = f64::INFINITY;
        for mb in members.iter().chain(limit.iter()) {
            limit_dt = limit_dt.min(mb.stepper.stable_dt()?);
        }
        let len = schedule.next_step(limit_dt);
        dt = schedule.ticks_to_dt(len);
        min_dt = min_dt.min(dt);
        schedule.advance(len);
        let t = schedule.t();
        members
            .par_iter_mut()
            .chain(limit.par_iter_mut())
            .try_for_each(|mb| -> Result<()> {
                mb.stepper.step(dt)?;
                mb.stepper.set_time(t);
                Ok(())
            })?;
        index += 1;
    }

    for i in 0..m {
        for k in i + 1..m {
            pairs[k][i] = pairs[i][k];
        }
    }
    let member_reports: Vec<EnergyReport> = members.into_iter().map(|mb| mb.builder.finish()).collect();
    let limit_report = limit.map(|l| l.builder.finish());
    let mut summaries = Vec::with_capacity(m);
    for (i, r) in member_reports.iter().enumerate() {
        let s = r.summary()?;
        summaries.push(MemberSummary {
            eps: eps[i],
            nsmo_residual_final: s.nsmo_residual_final.unwrap_or(0.0),
            report: s,
            gap_to_limit: limit_report.as_ref().map(|_| gaps[i]),
        });
    }
    let consecutive_sup: Vec<f64> = (1..m).map(|i| pairs[i - 1][i].sup_e).collect();
    let consecutive_int: Vec<f64> = (1..m).map(|i| pairs[i - 1][i].int_d).collect();
    let sup_decreasing = strictly_decreasing(&consecutive_sup);
    let int_decreasing = strictly_decreasing(&consecutive_int);
    let r_first = summaries[0].nsmo_residual_final;
    let r_last = summaries[m - 1].nsmo_residual_final;
    let verdict = CauchyVerdict {
        empirical_rate: loglog_slope(&eps[1..], &consecutive_sup),
        residual_ratio: if r_first > 0.0 { r_last / r_first } else { 0.0 },
        gaps_decreasing: limit_report
            .as_ref()
            .map(|_| strictly_decreasing(&gaps.iter().map(|g| g.sup_e).collect::<Vec<_>>())),
        cauchy: m >= 2 && sup_decreasing && int_decreasing,
        consecutive_sup,
        consecutive_int,
        sup_decreasing,
        int_decreasing,
    };
    let report = SweepReport {
        version: VERSION.to_string(),
        eps: eps.to_vec(),
        params: base,
        t_end: spec.t_end,
        steps: index,
        min_dt: if min_dt.is_finite() { min_dt } else { 0.0 },
        members: summaries,
        limit: limit_report.as_ref().map(|r| r.summary()).transpose()?,
        sup_e: pairs.iter().map(|r| r.iter().map(|p| p.sup_e).collect()).collect(),
        int_d: pairs.iter().map(|r| r.iter().map(|p| p.int_d).collect()).collect(),
        verdict,
    };
    Ok(SweepResult {
        report,
        member_reports,
        limit_report,
    })
}

impl SweepResult {
    /// Writes `sweep.json`, the two difference matrices and one report CSV
    /// per member into `out`.
    pub fn save(&self, spec: &RunSpec, out: &Path) -> Result<Vec<PathBuf>> {
        let mut files = write_provenance(spec, out)?;
        let js = out.join("sweep.json");
        fs::write(&js, serde_json::to_string_pretty(&self.report)? + "\n")?;
        files.push(js);
        for (name, mat) in [("sup_e.csv", &self.report.sup_e), ("int_d.csv", &self.report.int_d)] {
            let p = out.join(name);
            let mut w = csv::Writer::from_path(&p)?;
            let mut head = vec!["eps".to_string()];
            head.extend(self.report.eps.iter().map(|e| e.to_string()));
            w.write_record(&head)?;
            for (e, row) in self.report.eps.iter().zip(mat) {
                let mut rec = vec![e.to_string()];
                rec.extend(row.iter().map(|v| format!("{v:e}")));
                w.write_record(&rec)?;
            }
            w.flush()?;
            files.push(p);
        }
        for (e, r) in self.report.eps.iter().zip(&self.member_reports) {
            let p = out.join(format!("report_eps{e}.csv"));
            r.save_csv(&p)?;
            files.push(p);
        }
        if let Some(r) = &self.limit_report {
            let p = out.join("report_limit.csv");
            r.save_csv(&p)?;
            files.push(p);
        }
        Ok(files)
    }

    /// Current-tendency integrals per member and split index.
    pub fn dtj_study(&self) -> DtjStudy {
        let k0s = self.member_reports.first().map(|r| r.k0s.clone()).unwrap_or_default();
        let t_end = self.report.t_end;
        let mut integrals = Vec::new();
        let mut last_tenth = Vec::new();
        for r in &self.member_reports {
            let last = r.rows.last();
            let total: Vec<f64> = last.map(|l| l.dtj_integral.clone()).unwrap_or_default();
            let at = r
                .rows
                .iter()
                .find(|row| row.t >= 0.9 * t_end)
                .map(|row| row.dtj_integral.clone())
                .unwrap_or_else(|| total.clone());
            last_tenth.push(
                total
                    .iter()
                    .zip(&at)
                    .map(|(tot, a)| if *tot > 0.0 { (tot - a) / tot } else { 0.0 })
                    .collect(),
            );
            integrals.push(total);
        }
        DtjStudy {
            eps: self.report.eps.clone(),
            k0s,
            integrals,
            last_tenth_share: last_tenth,
        }
    }
}

/// `int ||eps^2 dj/dt||^2_{H^s_{<=k0}} dt` across a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtjStudy {
    pub eps: Vec<f64>,
    pub k0s: Vec<i32>,
    /// `integrals[member][k0 index]`.
    pub integrals: Vec<Vec<f64>>,
    /// Share of each integral collected on the last tenth of `[0, T]`.
    pub last_tenth_share: Vec<Vec<f64>>,
}

impl DtjStudy {
    /// `I(eps_i, k0) / I(eps_{i+1}, k0)` for consecutive members.
    pub fn eps_ratios(&self, k: usize) -> Vec<f64> {
        self.integrals.windows(2).map(|w| w[0][k] / w[1][k]).collect()
    }

    /// `I(eps, k0') / I(eps, k0)` for the split indices at positions `a`, `b`.
    pub fn k0_ratio(&self, member: usize, a: usize, b: usize) -> f64 {
        self.integrals[member][b] / self.integrals[member][a]
    }

    /// Empirical exponent `p` in `I ~ eps^p` at split index position `k`.
    pub fn eps_exponent(&self, k: usize) -> Option<f64> {
        let y: Vec<f64> = self.integrals.iter().map(|r| r[k]).collect();
        loglog_slope(&self.eps, &y)
    }
}
