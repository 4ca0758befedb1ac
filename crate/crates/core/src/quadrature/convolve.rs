//! Whole-grid kernel sums by zero-padded 2-D FFT convolution.
//!
//! For cell-center targets every kernel depends only on the lattice offset,
//! so `out_i = sum_j a_j K(c_j - c_i)` is a discrete convolution. The
//! padded grid is `2n x 2n`, which removes wrap-around. Row transforms run
//! in parallel; each row is independent so the result does not depend on
//! the thread count.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::region::Region;
use crate::scalar::{Real, C};

/// Evaluates `sum_j a_j K(c_j - c_i)` for every filled cell `i`, where
/// `kernel(dr, dc)` gives `K` at lattice offset `(dr, dc)` (rows, cols),
/// including the diagonal term at `(0, 0)`.
pub fn convolve_filled<T, K>(region: &Region<T>, amplitudes: &[C<T>], kernel: K) -> Vec<C<T>>
where
    T: Real,
    K: Fn(i64, i64) -> C<T> + Sync,
{
    let n = region.resolution();
    let m = 2 * n;
    let zero = C::new(T::zero(), T::zero());

    let mut data = vec![zero; m * m];
    for (i, cell) in region.cells().enumerate() {
        data[cell.row * m + cell.col] = amplitudes[i];
    }
    let mut kern = vec![zero; m * m];
    kern.par_chunks_mut(m).enumerate().for_each(|(r, row)| {
        let dr = if r < n { r as i64 } else { r as i64 - m as i64 };
        for (cidx, slot) in row.iter_mut().enumerate() {
            let dc = if cidx < n { cidx as i64 } else { cidx as i64 - m as i64 };
            if dr.unsigned_abs() as usize >= n || dc.unsigned_abs() as usize >= n {
                continue;
            }
            // out_i = sum_j a_j K(j - i) = correlation; convolving with K(-d) gives it
            *slot = kernel(-dr, -dc);
        }
    });

    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    fft2(&mut data, m, &fwd);
    fft2(&mut kern, m, &fwd);
    data.par_iter_mut().zip(kern.par_iter()).for_each(|(a, b)| *a = *a * *b);
    fft2(&mut data, m, &inv);
    let scale = T::one() / T::from_usize_lossy(m * m);
    region
        .cells()
        .map(|cell| data[cell.row * m + cell.col] * scale)
        .collect()
}

fn fft2<T: Real>(buf: &mut [C<T>], m: usize, plan: &Arc<dyn Fft<T>>) {
    buf.par_chunks_mut(m).for_each(|row| plan.process(row));
    let mut t = transpose(buf, m);
    t.par_chunks_mut(m).for_each(|row| plan.process(row));
    let back = transpose(&t, m);
    buf.copy_from_slice(&back);
}

fn transpose<T: Copy + Send + Sync>(buf: &[T], m: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(m * m);
    for c in 0..m {
        for r in 0..m {
            out.push(buf[r * m + c]);
        }
    }
    out
}
