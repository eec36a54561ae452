//! Batched FFTs along the axes of the flat x-fastest layout.
//!
//! Convention: forward transforms are unnormalized, inverse transforms carry
//! the 1/N factor per axis, so `inverse(forward(f)) = f`. Axis 0 lines are
//! contiguous and transformed in place; other axes gather their lines into a
//! caller-provided scratch buffer, transform, and scatter back. Both passes
//! split the work over disjoint contiguous chunks, so they parallelize
//! without aliasing.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex};

use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap();
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

/// Transform every line of `data` along `axis`. `sizes` is the per-axis
/// shape; `data.len()` must equal the product. `scratch` is resized to
/// `data.len()` when a strided axis needs it.
pub(crate) fn transform_axis(
    data: &mut [Complex64],
    sizes: &[usize],
    axis: usize,
    dir: Direction,
    scratch: &mut Vec<Complex64>,
) {
    let n = sizes[axis];
    let inner: usize = sizes[..axis].iter().product();
    debug_assert_eq!(data.len() % (n * inner), 0);
    let fft = plan(n, dir);
    let scale = match dir {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / n as f64,
    };
    let scratch_len = fft.get_inplace_scratch_len();

    if inner == 1 {
        // Contiguous lines: transform in place.
        par::for_each_chunk_mut_with(
            data,
            n,
            || vec![Complex64::default(); scratch_len],
            |fft_scratch, _, line| {
                fft.process_with_scratch(line, fft_scratch);
                if scale != 1.0 {
                    for v in line.iter_mut() {
                        *v *= scale;
                    }
                }
            },
        );
        return;
    }

    // Strided lines: line m (m = o*inner + in) has elements
    // data[in + inner*(i + n*o)], i = 0..n.
    scratch.resize(data.len(), Complex64::default());
    {
        let src: &[Complex64] = data;
        par::for_each_chunk_mut_with(
            &mut scratch[..],
            n,
            || vec![Complex64::default(); scratch_len],
            |fft_scratch, m, row| {
                let o = m / inner;
                let i0 = m % inner;
                let base = o * n * inner + i0;
                for (i, v) in row.iter_mut().enumerate() {
                    *v = src[base + i * inner];
                }
                fft.process_with_scratch(row, fft_scratch);
                if scale != 1.0 {
                    for v in row.iter_mut() {
                        *v *= scale;
                    }
                }
            },
        );
    }
    // Scatter: data chunk c = o*n + i holds positions in = 0..inner.
    let rows: &[Complex64] = scratch;
    par::for_each_chunk_mut(data, inner, |c, chunk| {
        let o = c / n;
        let i = c % n;
        for (i0, v) in chunk.iter_mut().enumerate() {
            *v = rows[(o * inner + i0) * n + i];
        }
    });
}

/// Forward transform along all axes.
pub(crate) fn forward_all(data: &mut [Complex64], sizes: &[usize], scratch: &mut Vec<Complex64>) {
    for axis in 0..sizes.len() {
        transform_axis(data, sizes, axis, Direction::Forward, scratch);
    }
}

/// Inverse transform along all axes (applies the full 1/ΠN scaling).
pub(crate) fn inverse_all(data: &mut [Complex64], sizes: &[usize], scratch: &mut Vec<Complex64>) {
    for axis in 0..sizes.len() {
        transform_axis(data, sizes, axis, Direction::Inverse, scratch);
    }
}
