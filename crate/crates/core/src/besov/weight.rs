use serde::{Deserialize, Serialize};

use super::block_energies;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Non-decreasing dyadic weight `omega_{-1}, omega_0, ..., omega_K` with
/// `1 <= omega_k <= omega_{k+1} <= 2^delta omega_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyWeight {
    omega: Vec<f64>,
    delta: f64,
}

impl FrequencyWeight {
    /// Validates the acceptable-weight axioms; `omega[0]` is block `-1`.
    pub fn new(omega: Vec<f64>, delta: f64) -> Result<Self> {
        let w = FrequencyWeight { omega, delta };
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("weight growth exponent {delta} must be positive")));
        }
        if w.omega.is_empty() {
            return Err(Error::InvalidArgument("empty frequency weight".into()));
        }
        if let Some(k) = w.axiom_violation() {
            return Err(Error::InvalidArgument(format!(
                "weight violates the acceptable-weight axioms at block {k}"
            )));
        }
        Ok(w)
    }

    /// Unit weight over blocks `-1..=top`.
    pub fn unit(top: i32) -> Self {
        FrequencyWeight {
            omega: vec![1.0; (top + 2) as usize],
            delta: 1.0,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Weights in block order starting at `k = -1`.
    pub fn values(&self) -> &[f64] {
        &self.omega
    }

    /// Highest block index covered.
    pub fn top(&self) -> i32 {
        self.omega.len() as i32 - 2
    }

    /// `omega_k`, `k >= -1`.
    pub fn get(&self, k: i32) -> Option<f64> {
        if k < -1 {
            return None;
        }
        self.omega.get((k + 1) as usize).copied()
    }

    /// First block index where an axiom fails, if any.
    pub fn axiom_violation(&self) -> Option<i32> {
        let growth = f64::powf(2.0, self.delta);
        if self.omega[0] < 1.0 {
            return Some(-1);
        }
        self.omega
            .windows(2)
            .position(|w| !(w[0] <= w[1] && w[1] <= growth * w[0]))
            .map(|i| i as i32)
    }

    pub fn satisfies_axioms(&self) -> bool {
        self.axiom_violation().is_none()
    }
}

/// Frequency envelope of a family of fields in `H^s`.
///
/// With `T(k) = sup_n sum_{k' >= k} 2^{2k's} ||Delta_{k'} f^n||^2`, the
/// breakpoints are the minimal strictly increasing indices `N_m` with
/// `T(N_m) <= 2^{-2m}`; beyond the grid `T = 0`, so past the last active
/// block the breakpoints advance by one per step. The weight is 1 below
/// `N_1` and `2^{m/2}` on `[N_m, N_{m+1})`, giving `delta = 1/2`.
pub fn build_frequency_envelope<F: SpectralField>(family: &[F], s: f64) -> Result<FrequencyWeight> {
    let first = family
        .first()
        .ok_or_else(|| Error::InvalidArgument("frequency envelope of an empty family".into()))?;
    let grid = first.grid().clone();
    for f in family {
        grid.same_as(f.grid())?;
    }
    let top = grid.profile().top();
    let nblocks = (top + 2) as usize;

    // tails[i] is T(i - 1); tails[nblocks] = T(top + 1) = 0
    let mut tails = vec![0.0f64; nblocks + 1];
    for f in family {
        let e = block_energies(f);
        let mut acc = 0.0;
        for i in (0..nblocks).rev() {
            let k = i as i32 - 1;
            acc += f64::powf(2.0, 2.0 * k as f64 * s) * e[i];
            tails[i] = tails[i].max(acc);
        }
    }
    let tail = |k: i32| -> f64 {
        let i = (k + 1) as usize;
        if i < tails.len() {
            tails[i]
        } else {
            0.0
        }
    };

    let mut breakpoints: Vec<i32> = Vec::new();
    let mut prev = -2;
    let mut m = 1;
    while prev <= top {
        let bound = f64::powi(2.0, -2 * m);
        let mut k = prev + 1;
        while tail(k) > bound {
            k += 1;
        }
        breakpoints.push(k);
        prev = k;
        m += 1;
    }

    let omega = (-1..=top)
        .map(|k| {
            let level = breakpoints.iter().take_while(|&&nm| nm <= k).count();
            f64::powf(2.0, level as f64 / 2.0)
        })
        .collect();
    FrequencyWeight::new(omega, 0.5)
}
