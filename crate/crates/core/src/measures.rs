//! Representing measures for point derivations.
//!
//! A [`PointFunctional`] realizes `D^t_{x0}` as integration against a
//! weight `k_t`. Weights of lower order come from [`wilken_reduce`];
//! representing weights at nearby points from [`bishop_transplant`].

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::singular::{cauchy_sigma, LocalFrame};
use crate::quadrature::{
    cauchy_transform, integrate, newtonian_potential, SingularRule, WeightForm, WeightFunction,
};
use crate::rational::{RationalFunction, DEFAULT_POLE_GUARD_CELLS};
use crate::region::Region;
use crate::scalar::{factorial, format_complex, parse_complex, Real, C};

/// Default `delta` for transplants and `delta_0` for density sets.
pub const DEFAULT_DELTA: f64 = 0.1;

/// `D^t_{x0} f = int f k_t dA`.
#[derive(Debug, Clone)]
pub struct PointFunctional<T> {
    x0: C<T>,
    t: usize,
    weight: WeightFunction<T>,
    q_norm: T,
}

impl<T: Real> PointFunctional<T> {
    pub fn new(x0: C<T>, t: usize, weight: WeightFunction<T>) -> Self {
        let q_norm = weight.lq_norm();
        Self { x0, t, weight, q_norm }
    }

    /// Closed-form disk functional `k_t = s * conj(z - x0)^t`, with `s`
    /// fixed so that `int k_t (z - x0)^t / t! dA = 1` exactly under the
    /// midpoint rule. On a disk centered at `x0` this is `t! (t+1) / (pi R^{2t+2})`
    /// up to rasterization; other regions must be checked with
    /// [`verify_representing`].
    pub fn disk(region: Arc<Region<T>>, x0: C<T>, t: usize, q: T) -> Result<Self> {
        Self::disk_with(region, x0, t, q, false)
    }

    /// [`PointFunctional::disk`] with the `q` range check optionally relaxed.
    pub fn disk_with(region: Arc<Region<T>>, x0: C<T>, t: usize, q: T, exploratory: bool) -> Result<Self> {
        let a = region.cell_area();
        let moment = crate::sum::sum_real(
            region.cells().map(|cl| (cl.center - x0).norm_sqr().powi(t as i32) * a),
        );
        if !(moment > T::zero()) {
            return Err(Error::UnsupportedRegion("degenerate moment for disk functional".into()));
        }
        let scale = C::new(factorial::<T>(t as u32) / moment, T::zero());
        let form = WeightForm::Monomial { center: x0, hol: 0, conj: t as u32, scale };
        let weight = if exploratory {
            WeightFunction::from_form_exploratory(region, form, q)?
        } else {
            WeightFunction::from_form(region, form, q)?
        };
        Ok(Self::new(x0, t, weight))
    }

    pub fn x0(&self) -> C<T> {
        self.x0
    }

    pub fn order(&self) -> usize {
        self.t
    }

    pub fn weight(&self) -> &WeightFunction<T> {
        &self.weight
    }

    pub fn region(&self) -> &Arc<Region<T>> {
        self.weight.region()
    }

    /// Cached `||k_t||_q`.
    pub fn q_norm(&self) -> T {
        self.q_norm
    }

    /// FUN1 text: magic, region checksum, `x0`, `t`, then the weight as WGT1.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "FUN1").unwrap();
        writeln!(s, "region {}", self.region().checksum()).unwrap();
        writeln!(s, "x0 {}", format_complex(self.x0)).unwrap();
        writeln!(s, "t {}", self.t).unwrap();
        s.push_str(&self.weight.to_wgt1());
        s
    }

    pub fn from_text(region: Arc<Region<T>>, text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("FUN1: {m}"));
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?.trim().to_string();
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ if key == "FUN1" && line == "FUN1" => Ok(String::new()),
                _ => Err(bad(&format!("expected {key}"))),
            }
        };
        header("FUN1")?;
        let checksum = header("region")?;
        if checksum != region.checksum() {
            return Err(bad("region checksum mismatch"));
        }
        let x0 = parse_complex::<T>(&header("x0")?).ok_or_else(|| bad("x0"))?;
        let t: usize = header("t")?.parse().map_err(|_| bad("t"))?;
        let rest: Vec<&str> = lines.collect();
        let weight = WeightFunction::from_wgt1(region, &rest.join("\n"))?;
        Ok(Self::new(x0, t, weight))
    }
}

/// Quadrature value of `int f k_t dA`; approximates `f^{(t)}(x0)`.
pub fn apply_functional<T: Real>(func: &PointFunctional<T>, f: &RationalFunction<T>) -> Result<C<T>> {
    let region = func.region();
    f.check_poles_off(region, DEFAULT_POLE_GUARD_CELLS)?;
    let samples = f.sample(region)?;
    Ok(integrate(&func.weight, &samples))
}

/// Order-`m` weight `k_m = (m!/t!) (z - x0)^{t-m} k_t`.
pub fn wilken_reduce<T: Real>(func: &PointFunctional<T>, m: usize) -> Result<PointFunctional<T>> {
    if m > func.t {
        return Err(Error::InvalidArgument(format!("reduction order {m} exceeds t = {}", func.t)));
    }
    if m == func.t {
        return Ok(func.clone());
    }
    let shift = (func.t - m) as u32;
    let ratio = factorial::<T>(m as u32) / factorial::<T>(func.t as u32);
    let x0 = func.x0;
    let form = match func.weight.form() {
        WeightForm::Monomial { center, hol, conj, scale } if *center == x0 => WeightForm::Monomial {
            center: x0,
            hol: hol + shift,
            conj: *conj,
            scale: *scale * ratio,
        },
        _ => WeightForm::Sampled,
    };
    let weight = func
        .weight
        .map_cells(form, |cell, k| k * (cell.center - x0).powu(shift) * ratio)?;
    Ok(PointFunctional::new(x0, m, weight))
}

/// Representing weight at `x` built from an evaluation weight at `x0`.
#[derive(Debug, Clone)]
pub struct TransplantResult<T> {
    pub x: C<T>,
    /// `c = 1 + (x - x0) k^(x)`.
    pub c: C<T>,
    pub weight: WeightFunction<T>,
    /// `|x - x0| * k~(x)`, the quantity the hypothesis bounds by `delta`.
    pub hypothesis_lhs: T,
}

impl<T: Real> TransplantResult<T> {
    pub fn functional(&self) -> PointFunctional<T> {
        PointFunctional::new(self.x, 0, self.weight.clone())
    }
}

/// `k_x(z) = (z - x0) k(z) / (c (z - x))`.
///
/// The kernel is split as `k + (x - x0) k / (z - x)`; the second part goes
/// through the Cauchy singular-cell rule, so the cells touching `x` carry
/// its replacement term.
pub fn bishop_transplant<T: Real>(func: &PointFunctional<T>, x: C<T>, delta: T) -> Result<TransplantResult<T>> {
    if func.t != 0 {
        return Err(Error::InvalidArgument(format!(
            "transplant needs an order-0 functional, got t = {}",
            func.t
        )));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0,1), got {delta}")));
    }
    let x0 = func.x0;
    let k = &func.weight;
    let one = C::new(T::one(), T::zero());
    if x == x0 {
        return Ok(TransplantResult { x, c: one, weight: k.clone(), hypothesis_lhs: T::zero() });
    }
    let lhs = (x - x0).norm() * newtonian_potential(k, x);
    if !(lhs < delta) {
        return Err(Error::TransplantHypothesis { lhs: lhs.as_f64(), delta: delta.as_f64() });
    }
    let cval = one + (x - x0) * cauchy_transform(k, x);
    let modulus = cval.norm();
    if modulus < T::one() - delta || modulus > T::one() + delta {
        return Err(Error::NumericalConsistency(format!(
            "|c| = {modulus} outside [1 - delta, 1 + delta] with delta = {delta}"
        )));
    }

    let region = k.region().clone();
    let h = region.cell_width();
    let d = x - region.origin();
    let frame = LocalFrame::new((d.re / h).as_f64(), (d.im / h).as_f64());
    let singular: Vec<usize> = frame
        .singular
        .iter()
        .filter_map(|&(r, cc)| region.filled_index(r, cc))
        .collect();
    let sigma = cauchy_sigma(SingularRule::default(), &frame);
    let sigma = C::new(T::lit(sigma.re), T::lit(sigma.im));
    let count = T::from_usize_lossy(singular.len().max(1));
    let frozen = if singular.is_empty() {
        C::new(T::zero(), T::zero())
    } else {
        singular.iter().map(|&i| k.values()[i]).fold(C::new(T::zero(), T::zero()), |a, b| a + b) / count
    };
    let inv_c = cval.inv();
    let values: Vec<C<T>> = region
        .cells()
        .enumerate()
        .map(|(i, cell)| {
            let kv = k.values()[i];
            if singular.contains(&i) {
                (kv + (x - x0) * frozen * sigma / (h * count)) * inv_c
            } else {
                (cell.center - x0) * kv / (cell.center - x) * inv_c
            }
        })
        .collect();
    let weight = if k.is_exploratory() {
        WeightFunction::sampled_exploratory(region, values, k.q())?
    } else {
        WeightFunction::sampled(region, values, k.q())?
    };
    Ok(TransplantResult { x, c: cval, weight, hypothesis_lhs: lhs })
}

#[derive(Debug, Clone)]
pub struct BatteryEntry<T> {
    pub id: String,
    pub expected: C<T>,
    pub computed: C<T>,
    pub abs_error: T,
}

#[derive(Debug, Clone)]
pub struct RepresentingReport<T> {
    pub order: usize,
    pub entries: Vec<BatteryEntry<T>>,
    pub max_error: T,
}

impl<T: Real> RepresentingReport<T> {
    /// CSV with columns `function_id,expected,computed,abs_error`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("function_id,expected,computed,abs_error\n");
        for e in &self.entries {
            writeln!(
                s,
                "{},{},{},{:e}",
                e.id,
                format_complex(e.expected),
                format_complex(e.computed),
                e.abs_error
            )
            .unwrap();
        }
        s
    }
}

/// Compares `int f k_t dA` with `f^{(t)}(x0)` over a battery of functions.
pub fn verify_representing<T: Real>(
    func: &PointFunctional<T>,
    battery: &[(String, RationalFunction<T>)],
) -> Result<RepresentingReport<T>> {
    if battery.is_empty() {
        return Err(Error::InvalidArgument("battery must not be empty".into()));
    }
    let mut entries = Vec::with_capacity(battery.len());
    for (id, f) in battery {
        let computed = apply_functional(func, f)?;
        let expected = f.derivative(func.t).eval(func.x0)?;
        entries.push(BatteryEntry { id: id.clone(), expected, computed, abs_error: (computed - expected).norm() });
    }
    let max_error = entries.iter().map(|e| e.abs_error).fold(T::zero(), T::max);
    Ok(RepresentingReport { order: func.t, entries, max_error })
}

/// `{1, z, z^2, z^3, 1/(z-a), 1/(z-a)^2, 1/(z-conj a)}` with
/// `a = center + side (0.75 + 0.25i)`, outside the bounding square.
pub fn default_battery<T: Real>(region: &Region<T>) -> Vec<(String, RationalFunction<T>)> {
    let half = region.side() * T::lit(0.5);
    let center = region.origin() + C::new(half, half);
    let a = center + C::new(region.side() * T::lit(0.75), region.side() * T::lit(0.25));
    let one = C::new(T::one(), T::zero());
    vec![
        ("one".into(), RationalFunction::monomial(0)),
        ("z".into(), RationalFunction::monomial(1)),
        ("z^2".into(), RationalFunction::monomial(2)),
        ("z^3".into(), RationalFunction::monomial(3)),
        ("1/(z-a)".into(), RationalFunction::pole_power(a, 1, one)),
        ("1/(z-a)^2".into(), RationalFunction::pole_power(a, 2, one)),
        ("1/(z-conj(a))".into(), RationalFunction::pole_power(a.conj(), 1, one)),
    ]
}
