//! `L^p` best approximation by combinations of a rational basis, and the
//! approximating sequences `f_j` with their Taylor-corrected `g_j`.
//!
//! Least squares is solved by Householder QR on the cell-sampled design
//! matrix with rows scaled by `sqrt(|cell| w)`. All inner products are
//! compensated sums in cell order.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{apply_functional, PointFunctional};
use crate::rational::{lp_norm_of_samples, Evaluable, RationalFunction, DEFAULT_POLE_GUARD_CELLS};
use crate::region::Region;
use crate::scalar::{Real, C};
use crate::sum::{sum_real, ComplexSum};

/// Largest admitted `(max |r_ii| / min |r_ii|)^2`.
pub const CONDITION_THRESHOLD: f64 = 1e12;
pub const IRLS_DAMPING: f64 = 0.5;
pub const IRLS_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Basis<T> {
    elements: Vec<RationalFunction<T>>,
    labels: Vec<String>,
}

impl<T: Real> Basis<T> {
    pub fn new(elements: Vec<RationalFunction<T>>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidArgument("basis must not be empty".into()));
        }
        if elements.len() != labels.len() {
            return Err(Error::InvalidArgument("one label per basis element".into()));
        }
        Ok(Self { elements, labels })
    }

    /// `{1, z, ..., z^degree}`.
    pub fn polynomial(degree: usize) -> Self {
        Self {
            elements: (0..=degree).map(RationalFunction::monomial).collect(),
            labels: (0..=degree).map(|k| format!("z^{k}")).collect(),
        }
    }

    pub fn elements(&self) -> &[RationalFunction<T>] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `true` when `self` starts with every element of `smaller`.
    pub fn extends(&self, smaller: &Basis<T>) -> bool {
        smaller.len() <= self.len() && self.elements[..smaller.len()] == smaller.elements[..]
    }

    /// `sum_k c_k b_k` as a single rational function.
    pub fn combine(&self, coeffs: &[C<T>]) -> RationalFunction<T> {
        let mut out = RationalFunction::zero();
        for (b, &cv) in self.elements.iter().zip(coeffs) {
            if cv.re != T::zero() || cv.im != T::zero() {
                out = &out + &b.scale(cv);
            }
        }
        out
    }

    fn sample(&self, region: &Region<T>) -> Result<Vec<Vec<C<T>>>> {
        self.elements
            .iter()
            .map(|b| {
                b.check_poles_off(region, DEFAULT_POLE_GUARD_CELLS)?;
                b.sample(region)
            })
            .collect()
    }
}

fn sample_target<T: Real, F: Evaluable<T> + ?Sized>(f: &F, region: &Region<T>) -> Result<Vec<C<T>>> {
    (0..region.filled_count())
        .into_par_iter()
        .map(|i| f.evaluate(region.cell(i).center))
        .collect()
}

/// Householder least squares `min ||diag(s) (A c - b)||` with column-major `A`.
fn weighted_lstsq<T: Real>(cols: &[Vec<C<T>>], b: &[C<T>], scale: &[T]) -> Result<Vec<C<T>>> {
    let k = cols.len();
    let n = b.len();
    if n < k {
        return Err(Error::Conditioning { estimate: f64::INFINITY, threshold: CONDITION_THRESHOLD });
    }
    let mut a: Vec<Vec<C<T>>> = cols
        .iter()
        .map(|col| col.iter().zip(scale).map(|(&v, &s)| v * s).collect())
        .collect();
    let mut rhs: Vec<C<T>> = b.iter().zip(scale).map(|(&v, &s)| v * s).collect();
    let zero = C::new(T::zero(), T::zero());
    let mut diag = Vec::with_capacity(k);
    for j in 0..k {
        let norm = sum_real(a[j][j..].iter().map(|v| v.norm_sqr())).sqrt();
        if norm == T::zero() {
            return Err(Error::Conditioning { estimate: f64::INFINITY, threshold: CONDITION_THRESHOLD });
        }
        let x0 = a[j][j];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { C::new(T::one(), T::zero()) };
        let alpha = -phase * norm;
        let mut v: Vec<C<T>> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm = sum_real(v.iter().map(|z| z.norm_sqr())).sqrt();
        diag.push(alpha);
        if vnorm > T::zero() {
            for z in v.iter_mut() {
                *z = *z / vnorm;
            }
            let reflect = |col: &mut [C<T>]| {
                let mut dot = ComplexSum::new();
                for (vi, ci) in v.iter().zip(col.iter()) {
                    dot.add(vi.conj() * *ci);
                }
                let d = dot.value() * T::lit(2.0);
                for (vi, ci) in v.iter().zip(col.iter_mut()) {
                    *ci = *ci - *vi * d;
                }
            };
            a.par_iter_mut().skip(j).for_each(|col| reflect(&mut col[j..]));
            reflect(&mut rhs[j..]);
        }
        a[j][j] = alpha;
        for z in a[j][j + 1..].iter_mut() {
            *z = zero;
        }
    }
    let big = diag.iter().map(|d| d.norm()).fold(T::zero(), T::max);
    let small = diag.iter().map(|d| d.norm()).fold(T::infinity(), T::min);
    let estimate = (big / small).powi(2).as_f64();
    if !(estimate <= CONDITION_THRESHOLD) {
        return Err(Error::Conditioning { estimate, threshold: CONDITION_THRESHOLD });
    }
    let mut coeffs = vec![zero; k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for j in i + 1..k {
            acc = acc - a[j][i] * coeffs[j];
        }
        coeffs[i] = acc / a[i][i];
    }
    Ok(coeffs)
}

fn residual<T: Real>(cols: &[Vec<C<T>>], b: &[C<T>], coeffs: &[C<T>]) -> Vec<C<T>> {
    (0..b.len())
        .into_par_iter()
        .map(|i| {
            let mut fit = C::new(T::zero(), T::zero());
            for (col, &cv) in cols.iter().zip(coeffs) {
                fit = fit + col[i] * cv;
            }
            b[i] - fit
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub coefficients: Vec<C<T>>,
    pub residual_norm: T,
}

/// Discrete `L^2(dA)` projection of `target` onto `span(basis)`.
pub fn project_l2<T: Real, F: Evaluable<T> + ?Sized>(target: &F, basis: &Basis<T>, region: &Region<T>) -> Result<Projection<T>> {
    let cols = basis.sample(region)?;
    let b = sample_target(target, region)?;
    let s = vec![region.cell_area().sqrt(); b.len()];
    let coefficients = weighted_lstsq(&cols, &b, &s)?;
    let r = residual(&cols, &b, &coefficients);
    Ok(Projection { residual_norm: lp_norm_of_samples(&r, region.cell_area(), T::lit(2.0)), coefficients })
}

/// `max_k |<b_k, r>| / (||b_k|| ||r||)` in discrete `L^2(dA)`.
pub fn gram_residual<T: Real, F: Evaluable<T> + ?Sized>(
    target: &F,
    basis: &Basis<T>,
    region: &Region<T>,
    coeffs: &[C<T>],
) -> Result<T> {
    let cols = basis.sample(region)?;
    let b = sample_target(target, region)?;
    let r = residual(&cols, &b, coeffs);
    let a = region.cell_area();
    let rn = sum_real(r.iter().map(|v| v.norm_sqr() * a)).sqrt();
    if rn == T::zero() {
        return Ok(T::zero());
    }
    let mut worst = T::zero();
    for col in &cols {
        let mut dot = ComplexSum::new();
        for (bv, rv) in col.iter().zip(&r) {
            dot.add(bv.conj() * *rv * a);
        }
        let bn = sum_real(col.iter().map(|v| v.norm_sqr() * a)).sqrt();
        worst = worst.max(dot.value().norm() / (bn * rn));
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct IrlsResult<T> {
    pub coefficients: Vec<C<T>>,
    /// `L^p` norm of the residual of the returned iterate.
    pub residual_norm: T,
    pub iterations: usize,
    /// `max_iters` was reached before the coefficient change fell below `tol`.
    pub stalled: bool,
}

/// `L^p` projection by damped IRLS from the `L^2` seed; returns the best
/// iterate seen.
pub fn project_lp_irls<T: Real, F: Evaluable<T> + ?Sized>(
    target: &F,
    basis: &Basis<T>,
    region: &Region<T>,
    p: T,
    max_iters: usize,
    tol: T,
) -> Result<IrlsResult<T>> {
    if !(p > T::lit(2.0)) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("IRLS needs 2 < p < infinity, got {p}; use project_l2 for p = 2")));
    }
    let cols = basis.sample(region)?;
    let b = sample_target(target, region)?;
    let area = region.cell_area();
    let uniform = vec![area.sqrt(); b.len()];
    let mut coeffs = weighted_lstsq(&cols, &b, &uniform)?;
    let mut r = residual(&cols, &b, &coeffs);
    let mut best = (coeffs.clone(), lp_norm_of_samples(&r, area, p));
    let scale_of = |r: &[C<T>]| r.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let damping = T::lit(IRLS_DAMPING);
    let floor = T::lit(IRLS_WEIGHT_FLOOR);
    let mut iterations = 1;
    let mut converged = scale_of(&r) == T::zero();
    while !converged && iterations < max_iters {
        iterations += 1;
        let top = scale_of(&r);
        let s: Vec<T> = r
            .iter()
            .map(|v| (area * ((v.norm() / top).powf(p - T::lit(2.0))).max(floor)).sqrt())
            .collect();
        let solved = weighted_lstsq(&cols, &b, &s)?;
        let next: Vec<C<T>> = coeffs.iter().zip(&solved).map(|(&c0, &c1)| c0 + (c1 - c0) * damping).collect();
        let change = sum_real(next.iter().zip(&coeffs).map(|(a, b)| (*a - *b).norm_sqr())).sqrt();
        let size = sum_real(next.iter().map(|a| a.norm_sqr())).sqrt().max(T::min_positive_value());
        coeffs = next;
        r = residual(&cols, &b, &coeffs);
        let norm = lp_norm_of_samples(&r, area, p);
        if norm < best.1 {
            best = (coeffs.clone(), norm);
        }
        converged = change / size < tol;
    }
    Ok(IrlsResult { coefficients: best.0, residual_norm: best.1, iterations, stalled: !converged })
}

#[derive(Debug, Clone)]
pub struct Stage<T> {
    pub basis_size: usize,
    pub f: RationalFunction<T>,
    pub g: RationalFunction<T>,
    /// `||target - f_j||_p`.
    pub residual_norm: T,
    pub iterations: usize,
    pub stalled: bool,
    /// Residual went up from the previous stage.
    pub non_improving: bool,
    /// `D^m g_j` for `m = 0..=t` through the functionals.
    pub functional_residuals: Vec<C<T>>,
}

#[derive(Debug, Clone)]
pub struct ApproximationSequence<T> {
    pub stages: Vec<Stage<T>>,
    pub target_label: String,
    pub p: T,
    /// Set when a stage failed and the sequence was cut there.
    pub truncated: Option<String>,
}

impl<T: Real> ApproximationSequence<T> {
    /// CSV with columns `stage,basis_size,residual_norm,functional_residual_0..t`.
    pub fn to_csv(&self) -> String {
        let orders = self.stages.first().map_or(0, |s| s.functional_residuals.len());
        let mut s = String::from("stage,basis_size,residual_norm");
        for m in 0..orders {
            write!(s, ",functional_residual_{m}").unwrap();
        }
        s.push('\n');
        for (j, st) in self.stages.iter().enumerate() {
            write!(s, "{j},{},{:e}", st.basis_size, st.residual_norm).unwrap();
            for v in &st.functional_residuals {
                write!(s, ",{:e}", v.norm()).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// IRLS settings for [`build_sequence`].
pub const SEQUENCE_MAX_ITERS: usize = 50;
pub const SEQUENCE_TOL: f64 = 1e-8;

/// `f_j` = `L^p` projection onto basis `j`; `g_j = f_j - sum_m D^m f_j (z - x0)^m / m!`
/// with `D^m` taken from `functionals[m]`. `p = 2` uses the direct projection.
pub fn build_sequence<T: Real>(
    target: &RationalFunction<T>,
    target_label: &str,
    x0: C<T>,
    nested_bases: &[Basis<T>],
    region: &Region<T>,
    p: T,
    functionals: &[PointFunctional<T>],
) -> Result<ApproximationSequence<T>> {
    for (m, f) in functionals.iter().enumerate() {
        if f.order() != m || f.x0() != x0 {
            return Err(Error::InvalidArgument(format!(
                "functional {m} must have order {m} at x0, got order {} at {}",
                f.order(),
                f.x0()
            )));
        }
    }
    if nested_bases.windows(2).any(|w| !w[1].extends(&w[0])) {
        return Err(Error::InvalidArgument("bases must be nested".into()));
    }
    if !(p >= T::lit(2.0)) {
        return Err(Error::OutOfRange(format!("sequence construction needs p >= 2, got {p}")));
    }
    let mut seq = ApproximationSequence { stages: Vec::new(), target_label: target_label.to_string(), p, truncated: None };
    let target_samples = target.sample(region)?;
    for basis in nested_bases {
        let solved = if p == T::lit(2.0) {
            project_l2(target, basis, region).map(|pr| (pr.coefficients, 1, false))
        } else {
            project_lp_irls(target, basis, region, p, SEQUENCE_MAX_ITERS, T::lit(SEQUENCE_TOL))
                .map(|r| (r.coefficients, r.iterations, r.stalled))
        };
        let stage = solved.and_then(|(coeffs, iterations, stalled)| {
            let f = basis.combine(&coeffs);
            let fs = f.sample(region)?;
            let diff: Vec<C<T>> = target_samples.iter().zip(&fs).map(|(a, b)| *a - *b).collect();
            let residual_norm = lp_norm_of_samples(&diff, region.cell_area(), p);
            let values = functionals
                .iter()
                .map(|func| apply_functional(func, &f))
                .collect::<Result<Vec<_>>>()?;
            let g = f.taylor_correct(x0, &values);
            let functional_residuals = functionals
                .iter()
                .map(|func| apply_functional(func, &g))
                .collect::<Result<Vec<_>>>()?;
            Ok(Stage {
                basis_size: basis.len(),
                f,
                g,
                residual_norm,
                iterations,
                stalled,
                non_improving: false,
                functional_residuals,
            })
        });
        match stage {
            Ok(mut st) => {
                if let Some(prev) = seq.stages.last() {
                    st.non_improving = st.residual_norm > prev.residual_norm;
                }
                seq.stages.push(st);
            }
            Err(e) => {
                seq.truncated = Some(e.to_string());
                break;
            }
        }
    }
    Ok(seq)
}
