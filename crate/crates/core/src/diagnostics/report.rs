use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{energy_pair, l2_dissipation, l2_energy, nsmo_residual_with, step_residual};
use crate::besov::{block_energies, dyadic_sum_sq, FrequencyWeight};
use crate::error::{Error, Result};
use crate::integrator::{Observer, StepView};
use crate::systems::{Params, SystemKind, SystemState};

/// What a report tracks besides the fixed columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Split indices for the tail and current-tendency columns.
    pub k0s: Vec<i32>,
    /// Weight for the weighted energy columns.
    pub weight: Option<FrequencyWeight>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub e_l2: f64,
    pub d_l2: f64,
    /// `((E_n - E_{n-1})/dt + (D_{n-1} + D_n)/2) / E_0`; 0 on the first row.
    pub energy_residual: f64,
    pub e_cal: f64,
    pub d_cal: f64,
    pub e_cal_w: Option<f64>,
    pub d_cal_w: Option<f64>,
    /// Tail fraction per configured `k0`.
    pub tails: Vec<f64>,
    /// Running `int ||eps^2 dj/dt||^2_{H^s_{<=k0}}` per configured `k0`.
    pub dtj_integral: Vec<f64>,
    pub nsmo_residual: Option<f64>,
}

/// Time series of every tracked functional, one row per step.
///
/// CSV column order: `step, t, dt, e_l2, d_l2, energy_residual, e_cal,
/// d_cal, e_cal_w, d_cal_w`, then `tail_k{k0}` for each `k0`, then
/// `dtj_int_k{k0}` for each `k0`, then `nsmo_residual`. Inapplicable cells
/// are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub system: SystemKind,
    pub params: Params,
    pub k0s: Vec<i32>,
    pub rows: Vec<ReportRow>,
}

/// Final and extremal values of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub system: SystemKind,
    pub steps: usize,
    pub t_final: f64,
    pub e_l2_initial: f64,
    pub e_l2_final: f64,
    /// Largest `|energy_residual|`.
    pub max_energy_residual: f64,
    pub e_cal_initial: f64,
    pub e_cal_final: f64,
    pub e_cal_sup: f64,
    /// Largest single-step increase of `E_cal`, relative to its initial value.
    pub e_cal_max_increase: f64,
    pub d_cal_integral: f64,
    pub e_cal_w_initial: Option<f64>,
    pub e_cal_w_sup: Option<f64>,
    pub dtj_integral: Vec<(i32, f64)>,
    pub nsmo_residual_initial: Option<f64>,
    pub nsmo_residual_final: Option<f64>,
}

impl EnergyReport {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "step",
            "t",
            "dt",
            "e_l2",
            "d_l2",
            "energy_residual",
            "e_cal",
            "d_cal",
            "e_cal_w",
            "d_cal_w",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(self.k0s.iter().map(|k| format!("tail_k{k}")));
        h.extend(self.k0s.iter().map(|k| format!("dtj_int_k{k}")));
        h.push("nsmo_residual".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.step.to_string(),
                format!("{:e}", r.t),
                format!("{:e}", r.dt),
                format!("{:e}", r.e_l2),
                format!("{:e}", r.d_l2),
                format!("{:e}", r.energy_residual),
                format!("{:e}", r.e_cal),
                format!("{:e}", r.d_cal),
                opt(r.e_cal_w),
                opt(r.d_cal_w),
            ];
            rec.extend(r.tails.iter().map(|v| format!("{v:e}")));
            rec.extend(r.dtj_integral.iter().map(|v| format!("{v:e}")));
            rec.push(opt(r.nsmo_residual));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn column(&self, f: impl Fn(&ReportRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn summary(&self) -> Result<ReportSummary> {
        let first = self
            .rows
            .first()
            .ok_or_else(|| Error::MissingData("empty energy report".into()))?;
        let last = self.rows.last().expect("nonempty");
        let times = self.column(|r| r.t);
        let e0 = first.e_cal;
        let inc = self
            .rows
            .windows(2)
            .map(|w| w[1].e_cal - w[0].e_cal)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(ReportSummary {
            system: self.system,
            steps: self.rows.len() - 1,
            t_final: last.t,
            e_l2_initial: first.e_l2,
            e_l2_final: last.e_l2,
            max_energy_residual: self.rows.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max),
            e_cal_initial: e0,
            e_cal_final: last.e_cal,
            e_cal_sup: self.rows.iter().map(|r| r.e_cal).fold(0.0, f64::max),
            e_cal_max_increase: if e0 > 0.0 && inc.is_finite() { inc / e0 } else { 0.0 },
            d_cal_integral: super::trapezoid(&times, &self.column(|r| r.d_cal)),
            e_cal_w_initial: first.e_cal_w,
            e_cal_w_sup: first
                .e_cal_w
                .map(|_| self.rows.iter().filter_map(|r| r.e_cal_w).fold(0.0, f64::max)),
            dtj_integral: self
                .k0s
                .iter()
                .zip(&last.dtj_integral)
                .map(|(&k, &v)| (k, v))
                .collect(),
            nsmo_residual_initial: first.nsmo_residual,
            nsmo_residual_final: last.nsmo_residual,
        })
    }

    pub fn save_summary(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.summary()?)?;
        std::fs::write(path, s + "\n")?;
        Ok(())
    }
}

/// Observer assembling an [`EnergyReport`].
pub struct ReportBuilder {
    config: ReportConfig,
    report: EnergyReport,
    /// Previous step's current-tendency H^s_{<=k0} integrand per k0.
    prev_dtj: Option<Vec<f64>>,
}

fn tails_of(state: &SystemState, k0s: &[i32], params: &Params) -> Vec<f64> {
    let e2 = params.eps * params.eps;
    let mut parts = vec![(state.u(), params.s_prime, 1.0)];
    if let SystemState::Plasma(p) = state {
        parts.push((&p.j, params.s, e2));
    }
    parts.push((state.e(), params.s, 1.0));
    parts.push((state.b(), params.s, 1.0));
    let blocks: Vec<_> = parts.iter().map(|(f, s, w)| (block_energies(*f), *s, *w)).collect();
    k0s.iter()
        .map(|&k0| {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (b, s, w) in &blocks {
                lo += w * dyadic_sum_sq(b, *s, None, -1, k0);
                hi += w * dyadic_sum_sq(b, *s, None, k0 + 1, i32::MAX);
            }
            if lo + hi == 0.0 {
                0.0
            } else {
                hi / (lo + hi)
            }
        })
        .collect()
}

impl ReportBuilder {
    pub fn new(config: ReportConfig, params: Params, state0: &SystemState) -> Result<Self> {
        if let Some(w) = &config.weight {
            let top = state0.grid().profile().top();
            if w.top() < top {
                return Err(Error::InvalidArgument(format!(
                    "weight covers blocks up to {} but the grid reaches block {top}",
                    w.top()
                )));
            }
        }
        if let Some(k) = config.k0s.iter().find(|&&k| k < -1) {
            return Err(Error::InvalidArgument(format!("split index {k} < -1")));
        }
        Ok(ReportBuilder {
            report: EnergyReport {
                system: state0.kind(),
                params,
                k0s: config.k0s.clone(),
                rows: Vec::new(),
            },
            config,
            prev_dtj: None,
        })
    }

    pub fn last_row(&self) -> Option<&ReportRow> {
        self.report.rows.last()
    }

    pub fn finish(self) -> EnergyReport {
        self.report
    }
}

impl Observer for ReportBuilder {
    fn observe(&mut self, v: &StepView) -> Result<()> {
        let p = v.params;
        let e_l2 = l2_energy(v.state, p);
        let d_l2 = l2_dissipation(v.state, p, v.uxb);
        let (e_cal, d_cal) = energy_pair(v.state, p, None, v.uxb);
        let weighted = self
            .config
            .weight
            .as_ref()
            .map(|w| energy_pair(v.state, p, Some(w), v.uxb));
        let rows = &self.report.rows;
        let energy_residual = match rows.last() {
            Some(prev) if rows[0].e_l2 > 0.0 => {
                step_residual(v.dt, &[prev.e_l2, e_l2], &[prev.d_l2, d_l2]) / rows[0].e_l2
            }
            _ => 0.0,
        };
        let dtj_now: Option<Vec<f64>> = v.eps2_dj.map(|dj| {
            let b = block_energies(dj);
            self.config
                .k0s
                .iter()
                .map(|&k0| dyadic_sum_sq(&b, p.s, None, -1, k0))
                .collect()
        });
        let dtj_integral = match (&dtj_now, &self.prev_dtj, rows.last()) {
            (Some(now), Some(prev), Some(last)) => last
                .dtj_integral
                .iter()
                .zip(now.iter().zip(prev))
                .map(|(acc, (a, b))| acc + 0.5 * v.dt * (a + b))
                .collect(),
            _ => vec![0.0; self.config.k0s.len()],
        };
        self.prev_dtj = dtj_now;
        let nsmo_residual = match v.state {
            SystemState::Plasma(ps) => Some(nsmo_residual_with(ps, p, v.uxb)),
            SystemState::Limit(_) => None,
        };
        let row = ReportRow {
            step: v.index,
            t: v.t,
            dt: v.dt,
            e_l2,
            d_l2,
            energy_residual,
            e_cal,
            d_cal,
            e_cal_w: weighted.map(|w| w.0),
            d_cal_w: weighted.map(|w| w.1),
            tails: tails_of(v.state, &self.config.k0s, p),
            dtj_integral,
            nsmo_residual,
        };
        self.report.rows.push(row);
        Ok(())
    }
}
