//! Batched one-dimensional transforms along a single axis of a dense
//! row-major array.
//!
//! The kernel is the centered one: for a grid `x_j = (j - N/2) Δ` and its
//! dual `ζ_k = (k - N/2) 2π/(NΔ)` the phase `e^{∓i x_j ζ_k}` factors into
//! `(-1)^j (-1)^k e^{∓2πi jk/N}` whenever `4 | N`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

pub(crate) struct CenteredFft {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl CenteredFft {
    pub(crate) fn new(len: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fft: planner.plan_fft(len, direction),
            len,
        }
    }

    fn process_lane(&self, lane: &mut [Complex64], scratch: &mut [Complex64], scale: f64) {
        for v in lane.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        self.fft.process_with_scratch(lane, scratch);
        for (k, v) in lane.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { scale } else { -scale };
        }
    }

    /// Applies the scaled centered transform along `axis` of an array with
    /// shape `dims` (last axis fastest).
    pub(crate) fn apply(&self, values: &mut [Complex64], dims: &[usize], axis: usize, scale: f64) {
        let n = self.len;
        debug_assert_eq!(dims[axis], n);
        debug_assert_eq!(values.len(), dims.iter().product::<usize>());
        let stride: usize = dims[axis + 1..].iter().product();
        let scratch_len = self.fft.get_inplace_scratch_len();

        if stride == 1 {
            values.par_chunks_mut(n).for_each_init(
                || vec![Complex64::default(); scratch_len],
                |scratch, lane| self.process_lane(lane, scratch, scale),
            );
            return;
        }

        // Strided axis: gather lanes into a contiguous buffer, transform, scatter.
        let block = n * stride;
        let mut lanes = vec![Complex64::default(); values.len()];
        {
            let src: &[Complex64] = values;
            lanes.par_chunks_mut(n).enumerate().for_each_init(
                || vec![Complex64::default(); scratch_len],
                |scratch, (lane_id, lane)| {
                    let (outer, inner) = (lane_id / stride, lane_id % stride);
                    let base = outer * block + inner;
                    for (a, v) in lane.iter_mut().enumerate() {
                        *v = src[base + a * stride];
                    }
                    self.process_lane(lane, scratch, scale);
                },
            );
        }
        let lanes = &lanes;
        values.par_chunks_mut(stride).enumerate().for_each(|(row, chunk)| {
            let (outer, a) = (row / n, row % n);
            for (inner, v) in chunk.iter_mut().enumerate() {
                *v = lanes[(outer * stride + inner) * n + a];
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Direct O(N²) evaluation of Σ_j f_j e^{-i x_j ζ_k} on the centered grids.
    fn naive(f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len() as f64;
        let half = f.len() as f64 / 2.0;
        (0..f.len())
            .map(|k| {
                f.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let phase = -2.0 * PI * (j as f64 - half) * (k as f64 - half) / n;
                        v * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn centered_kernel_matches_direct_sum() {
        let f: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let mut g = f.clone();
        CenteredFft::new(32, FftDirection::Forward).apply(&mut g, &[32], 0, 1.0);
        for (a, b) in g.iter().zip(naive(&f)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn strided_axis_matches_contiguous() {
        let (r, c) = (8, 16);
        let data: Vec<Complex64> = (0..r * c)
            .map(|i| Complex64::new((i as f64).sqrt(), (i as f64 * 0.3).sin()))
            .collect();
        let mut by_axis0 = data.clone();
        CenteredFft::new(r, FftDirection::Forward).apply(&mut by_axis0, &[r, c], 0, 0.5);
        // transpose, transform rows, transpose back
        let mut t: Vec<Complex64> = (0..r * c).map(|i| data[(i % r) * c + i / r]).collect();
        CenteredFft::new(r, FftDirection::Forward).apply(&mut t, &[c, r], 1, 0.5);
        for i in 0..r {
            for j in 0..c {
                assert!((by_axis0[i * c + j] - t[j * r + i]).norm() < 1e-13);
            }
        }
    }
}
