//! Multi-dimensional complex FFT on a cubic lattice, built from 1-D rustfft
//! plans. Each pass transforms the contiguous axis and then rotates the axes
//! with a transpose, so `d` passes visit every axis and restore the layout.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct FftNd {
    dim: usize,
    m: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftNd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftNd")
            .field("dim", &self.dim)
            .field("m", &self.m)
            .finish()
    }
}

impl FftNd {
    pub(crate) fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            dim,
            m,
            len: m.pow(dim as u32),
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Unnormalized forward transform, `sum_x f(x) e^{-i xi.x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.process(data, &self.forward);
    }

    /// Unnormalized inverse transform, `sum_xi f(xi) e^{+i xi.x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, &self.inverse);
    }

    fn process(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let rows = self.len / self.m;
        for _ in 0..self.dim {
            plan.process_with_scratch(data, &mut scratch);
            transpose(data, &mut buf, rows, self.m);
            data.copy_from_slice(&buf);
        }
    }
}

/// `dst[c * rows + r] = src[r * cols + c]`, blocked for cache reuse.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 16;
    for r0 in (0..rows).step_by(BLOCK) {
        let r1 = (r0 + BLOCK).min(rows);
        for c0 in (0..cols).step_by(BLOCK) {
            let c1 = (c0 + BLOCK).min(cols);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
