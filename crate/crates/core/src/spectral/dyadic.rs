//! Littlewood-Paley profile and its tabulation on the lattice.
//!
//! The profile is built from the smooth step
//!
//! ```text
//! psi(t)   = exp(-1/t) for t > 0, 0 otherwise
//! theta(t) = psi(t) / (psi(t) + psi(1 - t))
//! chi(r)   = theta((4/3 - r) / (7/12))          // 1 on r <= 3/4, 0 on r >= 4/3
//! phi(r)   = chi(r / 2) - chi(r)                // supported in 3/4 <= r <= 8/3
//! ```
//!
//! so `chi(r) + sum_{k=0}^{K} phi(r / 2^k) = chi(r / 2^{K+1})` telescopes to
//! exactly 1 once `r / 2^{K+1} <= 3/4`. Block `-1` is `chi(D)`, block
//! `k >= 0` is `phi(2^{-k} D)`.

/// Inner radius of the annulus carrying `phi`.
pub const ANNULUS_INNER: f64 = 3.0 / 4.0;
/// Outer radius of the annulus carrying `phi`.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
/// Radius beyond which `chi` vanishes.
pub const BALL_OUTER: f64 = 4.0 / 3.0;

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Low-frequency cutoff `chi` as a function of `|xi|`.
pub fn chi(r: f64) -> f64 {
    smooth_step((BALL_OUTER - r) / (BALL_OUTER - ANNULUS_INNER))
}

/// Annular bump `phi` as a function of `|xi|`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Multiplier of block `k` (`k >= -1`) at radius `r`.
pub fn block_multiplier(k: i32, r: f64) -> f64 {
    match k {
        k if k < -1 => 0.0,
        -1 => chi(r),
        k => phi(r / f64::powi(2.0, k)),
    }
}

/// Largest block index with nonzero multiplier somewhere on `[0, r_max]`.
pub fn top_block(r_max: f64) -> i32 {
    let mut k = -1;
    while ANNULUS_INNER * f64::powi(2.0, k + 1) < r_max {
        k += 1;
    }
    k
}

/// Per-point block membership. Every lattice radius meets at most two
/// consecutive blocks: `lo` and `lo + 1`.
#[derive(Clone, Debug)]
pub struct DyadicProfile {
    lo: Vec<i32>,
    w_lo: Vec<f64>,
    w_hi: Vec<f64>,
    top: i32,
}

impl DyadicProfile {
    pub(crate) fn tabulate(radii: &[f64], r_max: f64) -> Self {
        let top = top_block(r_max);
        let mut lo = Vec::with_capacity(radii.len());
        let mut w_lo = Vec::with_capacity(radii.len());
        let mut w_hi = Vec::with_capacity(radii.len());
        for &r in radii {
            let first = (-1..=top)
                .find(|&k| block_multiplier(k, r) > 0.0)
                .unwrap_or(top);
            let a = block_multiplier(first, r);
            let b = block_multiplier(first + 1, r);
            debug_assert!(block_multiplier(first + 2, r) == 0.0);
            lo.push(first);
            w_lo.push(a);
            w_hi.push(b);
        }
        DyadicProfile { lo, w_lo, w_hi, top }
    }

    /// Highest block index active on the grid.
    pub fn top(&self) -> i32 {
        self.top
    }

    /// Number of active blocks, `-1..=top`.
    pub fn block_count(&self) -> usize {
        (self.top + 2) as usize
    }

    /// Multiplier of block `k` at lattice point `idx`.
    #[inline]
    pub fn weight(&self, k: i32, idx: usize) -> f64 {
        let lo = self.lo[idx];
        if k == lo {
            self.w_lo[idx]
        } else if k == lo + 1 {
            self.w_hi[idx]
        } else {
            0.0
        }
    }

    /// `(k, m_k, m_{k+1})` for lattice point `idx`.
    #[inline]
    pub fn entry(&self, idx: usize) -> (i32, f64, f64) {
        (self.lo[idx], self.w_lo[idx], self.w_hi[idx])
    }
}
