//! Singular-cell rules for kernels `|z - x|^{-q}` and `1 / (z - x)`.
//!
//! The cells whose closed squares contain `x` are removed from the midpoint
//! sum and replaced by a single term `w_s * sigma * h^{2-q}`, with `w_s`
//! the mean weight over the removed cells. Two choices of `sigma`:
//!
//! * [`SingularRule::EqualAreaDisk`]: the removed cells become a disk of
//!   equal area centered at `x`; the `|.|^{-q}` kernel integrates to
//!   `2 pi r^{2-q} / (2-q)` over it and the Cauchy kernel to 0.
//! * [`SingularRule::LatticeCorrected`]: `sigma` is the lattice constant
//!   making the midpoint rule exact for a constant weight on the whole
//!   plane, computed with a smooth radial cutoff `phi` of radius
//!   [`CUTOFF_CELLS`]: `sigma = int phi K - sum_{u != singular} phi(u) K(u)`
//!   in cell units. The remainder `(1 - phi) K` is smooth, so the lattice
//!   sum of it matches its integral to high order. Without the correction
//!   the midpoint error near `x` is of size `h^{2-q}`.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::sum::{ComplexSum, NeumaierSum};

/// Cutoff radius of `phi`, in cell widths.
pub const CUTOFF_CELLS: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularRule {
    EqualAreaDisk,
    #[default]
    LatticeCorrected,
}

/// `int_{B(x, r)} |z - x|^{-q} dA = 2 pi r^{2-q} / (2 - q)`.
pub fn singular_cell_integral<T: Real>(q: T, r: T) -> Result<T> {
    if !(q < T::lit(2.0)) {
        return Err(Error::DivergentIntegral(q.as_f64()));
    }
    if !(q > T::zero()) {
        return Err(Error::InvalidArgument(format!("kernel exponent must be positive, got {q}")));
    }
    if r < T::zero() {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {r}")));
    }
    if r == T::zero() {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    Ok(two * T::PI() * r.powf(two - q) / (two - q))
}

/// Smooth cutoff: 1 on `[0, L/2]`, 0 beyond `L`, C-infinity in between.
fn cutoff(r: f64, l: f64) -> f64 {
    let half = 0.5 * l;
    if r <= half {
        return 1.0;
    }
    if r >= l {
        return 0.0;
    }
    let s = (r - half) / half;
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    b / (a + b)
}

/// `2 pi int_0^L phi(r) r^{1-q} dr`: exact on `[0, L/2]`, composite
/// Simpson on the smooth transition.
fn radial_cutoff_integral(q: f64, l: f64) -> f64 {
    let half = 0.5 * l;
    let inner = half.powf(2.0 - q) / (2.0 - q);
    let m = 4000usize;
    let step = half / m as f64;
    let g = |r: f64| cutoff(r, l) * r.powf(1.0 - q);
    let mut acc = g(half) + g(l);
    for k in 1..m {
        let r = half + k as f64 * step;
        acc += if k % 2 == 1 { 4.0 * g(r) } else { 2.0 * g(r) };
    }
    std::f64::consts::TAU * (inner + acc * step / 3.0)
}

/// Offset of `x` within the lattice, in cell units, and the singular cells.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    /// `(x - origin) / h`.
    pub u: f64,
    pub v: f64,
    /// Lattice `(row, col)` of every cell whose closed square holds `x`.
    pub singular: Vec<(i64, i64)>,
}

impl LocalFrame {
    pub fn new(u: f64, v: f64) -> Self {
        let eps = 1e-9;
        let pick = |s: f64| {
            let fl = s.floor();
            let frac = s - fl;
            let b = fl as i64;
            if frac < eps {
                vec![b - 1, b]
            } else if 1.0 - frac < eps {
                vec![b, b + 1]
            } else {
                vec![b]
            }
        };
        let cols = pick(u);
        let rows = pick(v);
        let mut singular = Vec::new();
        for &r in &rows {
            for &c in &cols {
                singular.push((r, c));
            }
        }
        Self { u, v, singular }
    }

    fn is_singular(&self, row: i64, col: i64) -> bool {
        self.singular.iter().any(|&(r, c)| r == row && c == col)
    }
}

/// Singular-cell coefficient in cell units for `|.|^{-q}`: the replacement
/// term is `sigma * h^{2-q}` times the frozen weight.
pub fn power_sigma(rule: SingularRule, q: f64, frame: &LocalFrame) -> f64 {
    let count = frame.singular.len() as f64;
    match rule {
        SingularRule::EqualAreaDisk => {
            let r = (count / std::f64::consts::PI).sqrt();
            std::f64::consts::TAU * r.powf(2.0 - q) / (2.0 - q)
        }
        SingularRule::LatticeCorrected => {
            let l = CUTOFF_CELLS;
            let mut acc = NeumaierSum::<f64>::new();
            for_lattice_near(frame, l, |row, col, du, dv| {
                if frame.is_singular(row, col) {
                    return;
                }
                let r = du.hypot(dv);
                acc.add(cutoff(r, l) * r.powf(-q));
            });
            radial_cutoff_integral(q, l) - acc.value()
        }
    }
}

/// Singular-cell coefficient for the Cauchy kernel `1 / (z - x)`, in cell
/// units: the replacement term is `sigma * h` times the frozen weight.
pub fn cauchy_sigma(rule: SingularRule, frame: &LocalFrame) -> C<f64> {
    match rule {
        SingularRule::EqualAreaDisk => C::new(0.0, 0.0),
        SingularRule::LatticeCorrected => {
            // the cutoff integral of an odd kernel vanishes
            let l = CUTOFF_CELLS;
            let mut acc = ComplexSum::<f64>::new();
            for_lattice_near(frame, l, |row, col, du, dv| {
                if frame.is_singular(row, col) {
                    return;
                }
                let phi = cutoff(du.hypot(dv), l);
                if phi > 0.0 {
                    acc.add(C::new(du, dv).inv() * phi);
                }
            });
            -acc.value()
        }
    }
}

fn for_lattice_near(frame: &LocalFrame, l: f64, mut f: impl FnMut(i64, i64, f64, f64)) {
    let span = l.ceil() as i64 + 1;
    let r0 = frame.v.floor() as i64;
    let c0 = frame.u.floor() as i64;
    for row in r0 - span..=r0 + span {
        for col in c0 - span..=c0 + span {
            let du = col as f64 + 0.5 - frame.u;
            let dv = row as f64 + 0.5 - frame.v;
            if du.hypot(dv) < l {
                f(row, col, du, dv);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        assert!((singular_cell_integral(1.5f64, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((singular_cell_integral(1.0f64, 1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(singular_cell_integral(1.5f64, 0.0).unwrap(), 0.0);
        assert!(matches!(singular_cell_integral(2.0f64, 1.0), Err(Error::DivergentIntegral(_))));
        assert!(singular_cell_integral(2.5f64, 1.0).is_err());
    }

    #[test]
    fn frames_pick_touching_cells() {
        assert_eq!(LocalFrame::new(3.5, 7.5).singular, vec![(7, 3)]);
        assert_eq!(LocalFrame::new(3.0, 7.0).singular.len(), 4);
        assert_eq!(LocalFrame::new(3.0, 7.25).singular.len(), 2);
    }

    #[test]
    fn cauchy_sigma_vanishes_at_symmetric_points() {
        for (u, v) in [(3.5, 7.5), (3.0, 7.0)] {
            let s = cauchy_sigma(SingularRule::LatticeCorrected, &LocalFrame::new(u, v));
            assert!(s.norm() < 1e-12, "{s}");
        }
        let s = cauchy_sigma(SingularRule::LatticeCorrected, &LocalFrame::new(3.2, 7.5));
        assert!(s.norm() > 1e-3);
    }

    #[test]
    fn corrected_sigma_reproduces_a_large_disk() {
        // midpoint sum over a lattice disk of radius R cells plus the
        // correction should match 2 pi R^{2-q}/(2-q) up to the boundary error
        let q = 1.5;
        let frame = LocalFrame::new(0.5, 0.5);
        let sigma = power_sigma(SingularRule::LatticeCorrected, q, &frame);
        let big = 400i64;
        let mut acc = NeumaierSum::<f64>::new();
        for row in -big..=big {
            for col in -big..=big {
                if row == 0 && col == 0 {
                    continue;
                }
                let r = (row as f64).hypot(col as f64);
                if r <= big as f64 {
                    acc.add(r.powf(-q));
                }
            }
        }
        let exact = 2.0 * PI * (big as f64).powf(2.0 - q) / (2.0 - q);
        let corrected = acc.value() + sigma;
        let plain = acc.value() + power_sigma(SingularRule::EqualAreaDisk, q, &frame);
        assert!((corrected - exact).abs() < 1e-3 * exact, "{corrected} vs {exact}");
        assert!((corrected - exact).abs() < (plain - exact).abs());
    }
}
