//! Midpoint quadrature over region cells, including the weakly singular
//! kernels `1/(z - x)`, `1/|z - x|` and `1/|z - x|^q`.
//!
//! Point evaluations reduce per-cell terms with compensated summation in
//! cell order. Whole-grid evaluations ([`cauchy_field`] and friends) give
//! the same sums at every cell center through FFT convolution.

mod convolve;
pub mod singular;

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

pub use convolve::convolve_filled;
pub use singular::{singular_cell_integral, LocalFrame, SingularRule};

use crate::error::{Error, Result};
use crate::region::{Cell, Region};
use crate::scalar::{Real, C};
use crate::sum::{sum_complex, sum_real};

/// Analytic description attached to a weight, when it has one.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightForm<T> {
    /// Only the cell samples are known.
    Sampled,
    /// `scale * (z - center)^hol * conj(z - center)^conj`.
    Monomial { center: C<T>, hol: u32, conj: u32, scale: C<T> },
}

impl<T: Real> WeightForm<T> {
    pub fn eval(&self, z: C<T>) -> Option<C<T>> {
        match self {
            WeightForm::Sampled => None,
            WeightForm::Monomial { center, hol, conj, scale } => {
                let d = z - *center;
                Some(*scale * d.powu(*hol) * d.conj().powu(*conj))
            }
        }
    }
}

/// An `L^q` density on a region, sampled at filled-cell centers.
#[derive(Debug, Clone)]
pub struct WeightFunction<T> {
    region: Arc<Region<T>>,
    values: Vec<C<T>>,
    q: T,
    form: WeightForm<T>,
    exploratory: bool,
}

/// `q = p / (p - 1)`; only `p > 2` is admitted, so `q` lies in `(1, 2)`.
pub fn conjugate_exponent<T: Real>(p: T) -> Result<T> {
    if !(p > T::lit(2.0)) || !p.is_finite() {
        return Err(Error::OutOfRange(format!(
            "p = {p}: bounded point derivations are only treated for 2 < p < infinity"
        )));
    }
    Ok(p / (p - T::one()))
}

fn check_q<T: Real>(q: T, exploratory: bool) -> Result<()> {
    if exploratory {
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::OutOfRange(format!("q = {q} must be positive")));
        }
        return Ok(());
    }
    if !(q > T::one() && q < T::lit(2.0)) {
        return Err(Error::OutOfRange(format!("q = {q} must lie in (1, 2)")));
    }
    Ok(())
}

impl<T: Real> WeightFunction<T> {
    pub fn sampled(region: Arc<Region<T>>, values: Vec<C<T>>, q: T) -> Result<Self> {
        Self::build(region, values, q, WeightForm::Sampled, false)
    }

    /// Like [`WeightFunction::sampled`] but admits any `q > 0`; marked in reports.
    pub fn sampled_exploratory(region: Arc<Region<T>>, values: Vec<C<T>>, q: T) -> Result<Self> {
        Self::build(region, values, q, WeightForm::Sampled, true)
    }

    pub fn from_form(region: Arc<Region<T>>, form: WeightForm<T>, q: T) -> Result<Self> {
        let values = region
            .cells()
            .map(|cl| form.eval(cl.center).unwrap_or_default())
            .collect();
        Self::build(region, values, q, form, false)
    }

    /// Like [`WeightFunction::from_form`] but admits any `q > 0`.
    pub fn from_form_exploratory(region: Arc<Region<T>>, form: WeightForm<T>, q: T) -> Result<Self> {
        let values = region
            .cells()
            .map(|cl| form.eval(cl.center).unwrap_or_default())
            .collect();
        Self::build(region, values, q, form, true)
    }

    pub fn constant(region: Arc<Region<T>>, v: C<T>, q: T) -> Result<Self> {
        let form = WeightForm::Monomial { center: C::new(T::zero(), T::zero()), hol: 0, conj: 0, scale: v };
        Self::from_form(region, form, q)
    }

    fn build(region: Arc<Region<T>>, values: Vec<C<T>>, q: T, form: WeightForm<T>, exploratory: bool) -> Result<Self> {
        check_q(q, exploratory)?;
        if values.len() != region.filled_count() {
            return Err(Error::InvalidArgument(format!(
                "weight has {} values for {} filled cells",
                values.len(),
                region.filled_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight value at cell {i} is not finite")));
        }
        Ok(Self { region, values, q, form, exploratory })
    }

    pub fn region(&self) -> &Arc<Region<T>> {
        &self.region
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn form(&self) -> &WeightForm<T> {
        &self.form
    }

    pub fn is_exploratory(&self) -> bool {
        self.exploratory
    }

    /// Closed form if known, else the containing cell's sample.
    pub fn value_at(&self, z: C<T>) -> Option<C<T>> {
        self.form.eval(z).or_else(|| self.region.locate(z).map(|i| self.values[i]))
    }

    /// Cellwise product with `factor(cell)`; `form` is the analytic
    /// description of the result, if any.
    pub fn map_cells(&self, form: WeightForm<T>, factor: impl Fn(Cell<T>, C<T>) -> C<T> + Sync) -> Result<Self> {
        let values = (0..self.values.len())
            .into_par_iter()
            .map(|i| factor(self.region.cell(i), self.values[i]))
            .collect();
        Self::build(self.region.clone(), values, self.q, form, self.exploratory)
    }

    /// Midpoint `L^q` norm.
    pub fn lq_norm(&self) -> T {
        let a = self.region.cell_area();
        sum_real(self.values.iter().map(|v| v.norm().powf(self.q) * a)).powf(self.q.recip())
    }

    /// WGT1 text: magic, region checksum, q, count, then one pair per cell.
    pub fn to_wgt1(&self) -> String {
        let mut s = String::new();
        writeln!(s, "WGT1").unwrap();
        writeln!(s, "region {}", self.region.checksum()).unwrap();
        writeln!(s, "q {}", self.q).unwrap();
        if self.exploratory {
            writeln!(s, "exploratory 1").unwrap();
        }
        writeln!(s, "count {}", self.values.len()).unwrap();
        for v in &self.values {
            writeln!(s, "{} {}", v.re, v.im).unwrap();
        }
        s
    }

    pub fn from_wgt1(region: Arc<Region<T>>, text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("WGT1: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("WGT1") {
            return Err(bad("missing magic line"));
        }
        let mut checksum = None;
        let mut q = None;
        let mut exploratory = false;
        let count: usize;
        loop {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            let (k, v) = line.split_once(' ').ok_or_else(|| bad("malformed header line"))?;
            match k {
                "region" => checksum = Some(v.trim().to_string()),
                "q" => q = Some(v.trim().parse::<T>().map_err(|_| bad("q"))?),
                "exploratory" => exploratory = v.trim() == "1",
                "count" => {
                    count = v.trim().parse().map_err(|_| bad("count"))?;
                    break;
                }
                _ => return Err(bad("unknown header key")),
            }
        }
        let checksum = checksum.ok_or_else(|| bad("missing region checksum"))?;
        if checksum != region.checksum() {
            return Err(bad("region checksum mismatch"));
        }
        let q = q.ok_or_else(|| bad("missing q"))?;
        let mut values = Vec::with_capacity(count);
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad("value lines need two numbers"));
            };
            let a = a.parse::<T>().map_err(|_| bad("value"))?;
            let b = b.parse::<T>().map_err(|_| bad("value"))?;
            values.push(C::new(a, b));
        }
        if values.len() != count {
            return Err(bad("value count mismatch"));
        }
        Self::build(region, values, q, WeightForm::Sampled, exploratory)
    }
}

/// `sum_cells f(c) w(c) |c|` over filled cells.
pub fn integrate<T: Real>(w: &WeightFunction<T>, f: &[C<T>]) -> C<T> {
    assert_eq!(f.len(), w.values.len(), "cell function length mismatch");
    let a = w.region.cell_area();
    sum_complex(f.iter().zip(&w.values).map(|(&fv, &wv)| fv * wv * a))
}

/// As [`integrate`] with `f` given as a function of the cell.
pub fn integrate_with<T: Real>(w: &WeightFunction<T>, f: impl Fn(Cell<T>) -> C<T> + Sync) -> C<T> {
    let a = w.region.cell_area();
    let terms: Vec<C<T>> = (0..w.values.len())
        .into_par_iter()
        .map(|i| f(w.region.cell(i)) * w.values[i] * a)
        .collect();
    sum_complex(terms)
}

fn frame_of<T: Real>(region: &Region<T>, x: C<T>) -> LocalFrame {
    let d = x - region.origin();
    let h = region.cell_width();
    LocalFrame::new((d.re / h).as_f64(), (d.im / h).as_f64())
}

fn filled_singular<T: Real>(region: &Region<T>, frame: &LocalFrame) -> Vec<usize> {
    frame
        .singular
        .iter()
        .filter_map(|&(r, c)| region.filled_index(r, c))
        .collect()
}

/// Cauchy transform `int w(z) / (z - x) dA` with the default singular rule.
pub fn cauchy_transform<T: Real>(w: &WeightFunction<T>, x: C<T>) -> C<T> {
    cauchy_transform_with(w, x, SingularRule::default())
}

pub fn cauchy_transform_with<T: Real>(w: &WeightFunction<T>, x: C<T>, rule: SingularRule) -> C<T> {
    let region = &*w.region;
    let frame = frame_of(region, x);
    let singular = filled_singular(region, &frame);
    let a = region.cell_area();
    let zero = C::new(T::zero(), T::zero());
    let terms: Vec<C<T>> = (0..w.values.len())
        .into_par_iter()
        .map(|i| {
            if singular.contains(&i) {
                return zero;
            }
            w.values[i] * a / (region.cell(i).center - x)
        })
        .collect();
    let mut total = sum_complex(terms);
    if !singular.is_empty() {
        let frozen = sum_complex(singular.iter().map(|&i| w.values[i])) / T::from_usize_lossy(singular.len());
        let sigma = singular::cauchy_sigma(rule, &frame);
        total = total + frozen * C::new(T::lit(sigma.re), T::lit(sigma.im)) * region.cell_width();
    }
    total
}

fn power_kernel_sum<T: Real>(region: &Region<T>, amps: &[T], x: C<T>, q: T, rule: SingularRule) -> T {
    let frame = frame_of(region, x);
    let singular = filled_singular(region, &frame);
    let a = region.cell_area();
    let terms: Vec<T> = (0..amps.len())
        .into_par_iter()
        .map(|i| {
            if singular.contains(&i) {
                return T::zero();
            }
            amps[i] * a / (region.cell(i).center - x).norm().powf(q)
        })
        .collect();
    let mut total = sum_real(terms);
    if !singular.is_empty() {
        let frozen = sum_real(singular.iter().map(|&i| amps[i])) / T::from_usize_lossy(singular.len());
        let sigma = match rule {
            SingularRule::EqualAreaDisk => {
                let mut f = frame.clone();
                f.singular.truncate(singular.len());
                singular::power_sigma(rule, q.as_f64(), &f)
            }
            SingularRule::LatticeCorrected => singular::power_sigma(rule, q.as_f64(), &frame),
        };
        total = total + frozen * T::lit(sigma) * region.cell_width().powf(T::lit(2.0) - q);
    }
    total
}

/// Newtonian potential `int |w(z)| / |z - x| dA`.
pub fn newtonian_potential<T: Real>(w: &WeightFunction<T>, x: C<T>) -> T {
    newtonian_potential_with(w, x, SingularRule::default())
}

pub fn newtonian_potential_with<T: Real>(w: &WeightFunction<T>, x: C<T>, rule: SingularRule) -> T {
    let amps: Vec<T> = w.values.iter().map(|v| v.norm()).collect();
    power_kernel_sum(&w.region, &amps, x, T::one(), rule)
}

/// `int |w(z)|^q / |z - x|^q dA` for `q < 2`.
pub fn singular_weight_integral<T: Real>(w: &WeightFunction<T>, x: C<T>, q: T) -> Result<T> {
    singular_weight_integral_with(w, x, q, SingularRule::default())
}

pub fn singular_weight_integral_with<T: Real>(w: &WeightFunction<T>, x: C<T>, q: T, rule: SingularRule) -> Result<T> {
    kernel_exponent_ok(q)?;
    let amps: Vec<T> = w.values.iter().map(|v| v.norm().powf(q)).collect();
    Ok(power_kernel_sum(&w.region, &amps, x, q, rule))
}

fn kernel_exponent_ok<T: Real>(q: T) -> Result<()> {
    if !(q < T::lit(2.0)) {
        return Err(Error::DivergentIntegral(q.as_f64()));
    }
    if !(q > T::zero()) {
        return Err(Error::InvalidArgument(format!("kernel exponent must be positive, got {q}")));
    }
    Ok(())
}

/// Cauchy transform at every filled-cell center.
pub fn cauchy_field<T: Real>(w: &WeightFunction<T>) -> Vec<C<T>> {
    let region = &*w.region;
    let h = region.cell_width();
    let a = region.cell_area();
    let sigma = singular::cauchy_sigma(SingularRule::default(), &LocalFrame::new(0.5, 0.5));
    let diag = C::new(T::lit(sigma.re), T::lit(sigma.im)) * h;
    convolve_filled(region, &w.values, |dr, dc| {
        if dr == 0 && dc == 0 {
            diag
        } else {
            C::new(T::lit(dc as f64) * h, T::lit(dr as f64) * h).inv() * a
        }
    })
}

fn power_field<T: Real>(region: &Region<T>, amps: &[T], q: T) -> Vec<T> {
    let h = region.cell_width();
    let a = region.cell_area();
    let sigma = singular::power_sigma(SingularRule::default(), q.as_f64(), &LocalFrame::new(0.5, 0.5));
    let diag = T::lit(sigma) * h.powf(T::lit(2.0) - q);
    let amps: Vec<C<T>> = amps.iter().map(|&v| C::new(v, T::zero())).collect();
    convolve_filled(region, &amps, |dr, dc| {
        let v = if dr == 0 && dc == 0 {
            diag
        } else {
            a / (T::lit(dc as f64) * h).hypot(T::lit(dr as f64) * h).powf(q)
        };
        C::new(v, T::zero())
    })
    .into_iter()
    .map(|v| v.re.max(T::zero()))
    .collect()
}

/// Newtonian potential at every filled-cell center.
pub fn newtonian_field<T: Real>(w: &WeightFunction<T>) -> Vec<T> {
    let amps: Vec<T> = w.values.iter().map(|v| v.norm()).collect();
    power_field(&w.region, &amps, T::one())
}

/// `int |w|^q / |z - x|^q dA` at every filled-cell center.
pub fn singular_weight_field<T: Real>(w: &WeightFunction<T>, q: T) -> Result<Vec<T>> {
    kernel_exponent_ok(q)?;
    let amps: Vec<T> = w.values.iter().map(|v| v.norm().powf(q)).collect();
    Ok(power_field(&w.region, &amps, q))
}
