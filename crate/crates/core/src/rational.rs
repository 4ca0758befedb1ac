//! Rational functions in partial-fraction form.
//!
//! `f(z) = sum_j sum_{m=1..m_j} a_{j,m} / (z - p_j)^m + sum_k c_k z^k`.
//! Differentiation is term-wise and closed form; addition merges pole
//! lists by exact location equality.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::region::Region;
use crate::scalar::{factorial, format_complex, Real, C};
use crate::sum::sum_real;

/// Pole guard used by [`RationalFunction::lp_norm`], in cell diagonals.
pub const DEFAULT_POLE_GUARD_CELLS: f64 = 1.0;

/// Anything that can be evaluated at a point of the plane.
pub trait Evaluable<T: Real>: Sync {
    fn evaluate(&self, z: C<T>) -> Result<C<T>>;
}

/// Closure adaptor for [`Evaluable`].
pub struct Analytic<F>(pub F);

impl<T: Real, F: Fn(C<T>) -> C<T> + Sync> Evaluable<T> for Analytic<F> {
    fn evaluate(&self, z: C<T>) -> Result<C<T>> {
        Ok((self.0)(z))
    }
}

/// A function sampled at cell centers, evaluated by nearest-cell lookup:
/// `z` takes the value of the filled cell whose half-open square holds it.
#[derive(Debug, Clone)]
pub struct CellSamples<'r, T> {
    pub region: &'r Region<T>,
    pub values: &'r [C<T>],
}

impl<T: Real> Evaluable<T> for CellSamples<'_, T> {
    fn evaluate(&self, z: C<T>) -> Result<C<T>> {
        self.region
            .locate(z)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::NodeEvaluation(format_complex(z)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm<T> {
    pub location: C<T>,
    /// `a_{j,1..m_j}`; the pole order is the length.
    pub coeffs: Vec<C<T>>,
}

impl<T: Real> PoleTerm<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<T> {
    poles: Vec<PoleTerm<T>>,
    poly: Vec<C<T>>,
}

impl<T: Real> RationalFunction<T> {
    pub fn new(poles: Vec<PoleTerm<T>>, poly: Vec<C<T>>) -> Result<Self> {
        for (i, p) in poles.iter().enumerate() {
            if p.coeffs.is_empty() {
                return Err(Error::InvalidArgument("pole order must be at least 1".into()));
            }
            if !p.location.re.is_finite() || !p.location.im.is_finite() {
                return Err(Error::InvalidArgument("pole location must be finite".into()));
            }
            if poles[..i].iter().any(|q| q.location == p.location) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate pole at {}",
                    format_complex(p.location)
                )));
            }
        }
        Ok(Self { poles, poly })
    }

    pub fn zero() -> Self {
        Self { poles: Vec::new(), poly: Vec::new() }
    }

    pub fn constant(v: C<T>) -> Self {
        Self::polynomial(vec![v])
    }

    /// Polynomial with ascending coefficients.
    pub fn polynomial(coeffs: Vec<C<T>>) -> Self {
        Self { poles: Vec::new(), poly: coeffs }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![C::new(T::zero(), T::zero()); k + 1];
        coeffs[k] = C::new(T::one(), T::zero());
        Self::polynomial(coeffs)
    }

    /// `a / (z - p)^order`.
    pub fn pole_power(p: C<T>, order: usize, a: C<T>) -> Self {
        assert!(order >= 1, "pole order must be at least 1");
        let mut coeffs = vec![C::new(T::zero(), T::zero()); order];
        coeffs[order - 1] = a;
        Self { poles: vec![PoleTerm { location: p, coeffs }], poly: Vec::new() }
    }

    pub fn poles(&self) -> &[PoleTerm<T>] {
        &self.poles
    }

    pub fn poly(&self) -> &[C<T>] {
        &self.poly
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn eval(&self, z: C<T>) -> Result<C<T>> {
        let mut acc = C::new(T::zero(), T::zero());
        for term in &self.poles {
            let d = z - term.location;
            if d.re == T::zero() && d.im == T::zero() {
                return Err(Error::PoleEvaluation(format_complex(z)));
            }
            let u = d.inv();
            let mut h = C::new(T::zero(), T::zero());
            for &a in term.coeffs.iter().rev() {
                h = (h + a) * u;
            }
            acc = acc + h;
        }
        let mut p = C::new(T::zero(), T::zero());
        for &a in self.poly.iter().rev() {
            p = p * z + a;
        }
        Ok(acc + p)
    }

    /// Exact `t`-th derivative in partial-fraction form.
    pub fn derivative(&self, t: usize) -> Self {
        if t == 0 {
            return self.clone();
        }
        let zero = C::new(T::zero(), T::zero());
        let poles = self
            .poles
            .iter()
            .map(|term| {
                // d^t/dz^t (z-p)^{-m} = (-1)^t m (m+1) ... (m+t-1) (z-p)^{-(m+t)}
                let mut coeffs = vec![zero; term.order() + t];
                for (k, &a) in term.coeffs.iter().enumerate() {
                    let m = k + 1;
                    let mut factor = T::one();
                    for j in 0..t {
                        factor = factor * T::from_usize_lossy(m + j);
                    }
                    if t % 2 == 1 {
                        factor = -factor;
                    }
                    coeffs[m + t - 1] = a * factor;
                }
                PoleTerm { location: term.location, coeffs }
            })
            .collect();
        let poly = if self.poly.len() > t {
            (t..self.poly.len())
                .map(|k| {
                    let mut factor = T::one();
                    for j in 0..t {
                        factor = factor * T::from_usize_lossy(k - j);
                    }
                    self.poly[k] * factor
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { poles, poly }
    }

    /// `g = f - sum_m d_m / m! (z - x0)^m`. Poles are untouched.
    pub fn taylor_correct(&self, x0: C<T>, values: &[C<T>]) -> Self {
        let zero = C::new(T::zero(), T::zero());
        let deg = values.len();
        let mut correction = vec![zero; deg];
        for (m, &d) in values.iter().enumerate() {
            let scaled = d / factorial::<T>(m as u32);
            // (z - x0)^m = sum_k binom(m,k) z^k (-x0)^{m-k}
            let mut binom = T::one();
            for k in 0..=m {
                let power = (-x0).powu((m - k) as u32);
                correction[k] = correction[k] + scaled * power * binom;
                binom = binom * T::from_usize_lossy(m - k) / T::from_usize_lossy(k + 1);
            }
        }
        let mut out = self.clone();
        if out.poly.len() < deg {
            out.poly.resize(deg, zero);
        }
        for (k, cv) in correction.into_iter().enumerate() {
            out.poly[k] = out.poly[k] - cv;
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            poles: self
                .poles
                .iter()
                .map(|t| PoleTerm { location: t.location, coeffs: t.coeffs.iter().map(|&a| a * s).collect() })
                .collect(),
            poly: self.poly.iter().map(|&a| a * s).collect(),
        }
    }

    /// Fails if any pole lies within `guard_cells` cell diagonals of a filled cell.
    pub fn check_poles_off(&self, region: &Region<T>, guard_cells: f64) -> Result<()> {
        let w = region.cell_width();
        let guard = T::lit(guard_cells) * w * T::SQRT_2();
        for term in &self.poles {
            let p = term.location;
            let (r0, c0) = region.lattice_coords(p);
            let span = (guard / w).ceil().as_f64() as i64 + 1;
            for row in r0 - span..=r0 + span {
                for col in c0 - span..=c0 + span {
                    if region.filled_index(row, col).is_none() {
                        continue;
                    }
                    if square_distance(region, row, col, p) <= guard {
                        return Err(Error::PoleOnSet {
                            pole: format_complex(p),
                            guard: guard.as_f64(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Values at every filled-cell center, in cell order.
    pub fn sample(&self, region: &Region<T>) -> Result<Vec<C<T>>> {
        (0..region.filled_count())
            .into_par_iter()
            .map(|i| self.eval(region.cell(i).center))
            .collect()
    }

    /// Midpoint-rule `L^p(dA)` norm over the region.
    pub fn lp_norm(&self, region: &Region<T>, p: T) -> Result<T> {
        self.lp_norm_guarded(region, p, DEFAULT_POLE_GUARD_CELLS)
    }

    pub fn lp_norm_guarded(&self, region: &Region<T>, p: T, guard_cells: f64) -> Result<T> {
        if !(p >= T::one()) {
            return Err(Error::OutOfRange(format!("L^p norm needs p >= 1, got {p}")));
        }
        self.check_poles_off(region, guard_cells)?;
        let values = self.sample(region)?;
        Ok(lp_norm_of_samples(&values, region.cell_area(), p))
    }

    /// RTF1-style text: `pole` and `poly` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for term in &self.poles {
            write!(s, "pole {} {} {}", term.location.re, term.location.im, term.order()).unwrap();
            for a in &term.coeffs {
                write!(s, " {} {}", a.re, a.im).unwrap();
            }
            s.push('\n');
        }
        s.push_str("poly");
        for a in &self.poly {
            write!(s, " {} {}", a.re, a.im).unwrap();
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse(format!("rational: {m}"));
        let num = |tok: &str| tok.parse::<T>().map_err(|_| bad(format!("bad number {tok:?}")));
        let mut poles = Vec::new();
        let mut poly = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "pole" => {
                    if toks.len() < 4 {
                        return Err(bad("short pole line".into()));
                    }
                    let loc = C::new(num(toks[1])?, num(toks[2])?);
                    let order: usize = toks[3].parse().map_err(|_| bad("bad order".into()))?;
                    if toks.len() != 4 + 2 * order {
                        return Err(bad(format!("pole line needs {order} coefficient pairs")));
                    }
                    let coeffs = toks[4..]
                        .chunks(2)
                        .map(|pair| Ok(C::new(num(pair[0])?, num(pair[1])?)))
                        .collect::<Result<Vec<_>>>()?;
                    poles.push(PoleTerm { location: loc, coeffs });
                }
                "poly" => {
                    if poly.is_some() {
                        return Err(bad("duplicate poly line".into()));
                    }
                    if toks.len() % 2 != 1 {
                        return Err(bad("poly line needs coefficient pairs".into()));
                    }
                    poly = Some(
                        toks[1..]
                            .chunks(2)
                            .map(|pair| Ok(C::new(num(pair[0])?, num(pair[1])?)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                other => return Err(bad(format!("unknown record {other:?}"))),
            }
        }
        Self::new(poles, poly.unwrap_or_default())
    }
}

fn square_distance<T: Real>(region: &Region<T>, row: i64, col: i64, p: C<T>) -> T {
    let center = region.lattice_center(row, col);
    let half = region.cell_width() * T::lit(0.5);
    let dx = ((p.re - center.re).abs() - half).max(T::zero());
    let dy = ((p.im - center.im).abs() - half).max(T::zero());
    dx.hypot(dy)
}

/// `(sum |v|^p * area)^{1/p}` with compensated summation.
pub fn lp_norm_of_samples<T: Real>(values: &[C<T>], cell_area: T, p: T) -> T {
    let s = sum_real(values.iter().map(|v| v.norm().powf(p) * cell_area));
    s.powf(p.recip())
}

impl<T: Real> Add for &RationalFunction<T> {
    type Output = RationalFunction<T>;

    fn add(self, rhs: &RationalFunction<T>) -> RationalFunction<T> {
        let zero = C::new(T::zero(), T::zero());
        let mut poles = self.poles.clone();
        for term in &rhs.poles {
            match poles.iter_mut().find(|t| t.location == term.location) {
                Some(existing) => {
                    if existing.coeffs.len() < term.coeffs.len() {
                        existing.coeffs.resize(term.coeffs.len(), zero);
                    }
                    for (a, &b) in existing.coeffs.iter_mut().zip(&term.coeffs) {
                        *a = *a + b;
                    }
                }
                None => poles.push(term.clone()),
            }
        }
        let n = self.poly.len().max(rhs.poly.len());
        let poly = (0..n)
            .map(|k| {
                self.poly.get(k).copied().unwrap_or(zero) + rhs.poly.get(k).copied().unwrap_or(zero)
            })
            .collect();
        RationalFunction { poles, poly }
    }
}

impl<T: Real> Neg for &RationalFunction<T> {
    type Output = RationalFunction<T>;

    fn neg(self) -> RationalFunction<T> {
        self.scale(C::new(-T::one(), T::zero()))
    }
}

impl<T: Real> Sub for &RationalFunction<T> {
    type Output = RationalFunction<T>;

    fn sub(self, rhs: &RationalFunction<T>) -> RationalFunction<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Mul<C<T>> for &RationalFunction<T> {
    type Output = RationalFunction<T>;

    fn mul(self, s: C<T>) -> RationalFunction<T> {
        self.scale(s)
    }
}

impl<T: Real> Evaluable<T> for RationalFunction<T> {
    fn evaluate(&self, z: C<T>) -> Result<C<T>> {
        self.eval(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, cl};
    use std::f64::consts::PI;

    type R = RationalFunction<f64>;

    fn one() -> C<f64> {
        c(1.0, 0.0)
    }

    #[test]
    fn eval_examples() {
        let f = R::pole_power(c(2.0, 0.0), 1, one());
        assert_eq!(f.eval(c(0.0, 0.0)).unwrap(), c(-0.5, 0.0));
        let g = R::polynomial(vec![one(), c(0.0, 0.0), one()]);
        assert!(g.eval(c(0.0, 1.0)).unwrap().norm() < 1e-15);
        let h = R::new(
            vec![PoleTerm { location: c(2.0, 0.0), coeffs: vec![one(), c(3.0, 0.0)] }],
            vec![],
        )
        .unwrap();
        assert_eq!(h.eval(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert!(matches!(f.eval(c(2.0, 0.0)), Err(Error::PoleEvaluation(_))));
    }

    #[test]
    fn derivative_examples() {
        let f = R::pole_power(c(2.0, 0.0), 1, one());
        assert_eq!(f.derivative(1).eval(c(0.0, 0.0)).unwrap(), c(-0.25, 0.0));
        assert_eq!(f.derivative(0), f);
        assert_eq!(R::monomial(3).derivative(2).eval(one()).unwrap(), c(6.0, 0.0));
        assert!(R::monomial(2).derivative(3).poly().is_empty());
    }

    #[test]
    fn rejects_bad_poles() {
        let p = PoleTerm { location: c(1.0, 0.0), coeffs: vec![one()] };
        assert!(R::new(vec![p.clone(), p], vec![]).is_err());
        assert!(R::new(vec![PoleTerm { location: c(1.0, 0.0), coeffs: vec![] }], vec![]).is_err());
    }

    #[test]
    fn taylor_correct_examples() {
        // 1/(1-z) = -1/(z-1)
        let f = R::pole_power(c(1.0, 0.0), 1, c(-1.0, 0.0));
        let g = f.taylor_correct(c(0.0, 0.0), &[one(), one()]);
        assert!(g.eval(c(0.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(g.derivative(1).eval(c(0.0, 0.0)).unwrap().norm() < 1e-15);
        assert_eq!(g.poles(), f.poles());

        let z0 = c(0.3, -0.2);
        assert_eq!(f.taylor_correct(z0, &[c(0.0, 0.0); 3]).eval(z0), f.eval(z0));

        let poly = R::polynomial(vec![c(1.0, 1.0), c(-2.0, 0.5), c(0.25, 3.0)]);
        let d: Vec<_> = (0..3).map(|m| poly.derivative(m).eval(z0).unwrap()).collect();
        let g = poly.taylor_correct(z0, &d);
        for z in [c(0.0, 0.0), c(1.5, -2.0), c(-3.0, 0.7)] {
            assert!(g.eval(z).unwrap().norm() < 1e-13);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let disk = Region::build_disk(c(0.0, 0.0), 1.0, 1024).unwrap();
        let one_fn = R::constant(one());
        let n2 = one_fn.lp_norm(&disk, 2.0).unwrap();
        assert!((n2 - PI.sqrt()).abs() / PI.sqrt() < 5e-3);
        let nz = R::monomial(1).lp_norm(&disk, 2.0).unwrap();
        assert!((nz - (PI / 2.0).sqrt()).abs() / (PI / 2.0).sqrt() < 5e-3);
        let n3 = one_fn.lp_norm(&disk, 3.0).unwrap();
        assert!((n3 - PI.powf(1.0 / 3.0)).abs() / PI.powf(1.0 / 3.0) < 5e-3);
    }

    #[test]
    fn lp_norm_rejects_nearby_poles() {
        let disk = Region::build_disk(c(0.0, 0.0), 1.0, 64).unwrap();
        let inside = R::pole_power(c(0.3, 0.1), 1, one());
        assert!(matches!(inside.lp_norm(&disk, 3.0), Err(Error::PoleOnSet { .. })));
        // just outside the last filled cell but within one diagonal of it
        let w = disk.cell_width();
        let near = R::pole_power(c(1.0 + 0.5 * w, 0.0), 1, one());
        assert!(near.lp_norm(&disk, 3.0).is_err());
        assert!(near.lp_norm_guarded(&disk, 3.0, 0.0).is_ok());
        let far = R::pole_power(c(2.0, 0.0), 1, one());
        assert!(far.lp_norm(&disk, 3.0).is_ok());
        assert!(far.lp_norm(&disk, 0.5).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let f = R::new(
            vec![
                PoleTerm { location: c(2.0, -0.1), coeffs: vec![one(), cl(0.1, 1.0 / 3.0)] },
                PoleTerm { location: c(-1.5, 1e-17), coeffs: vec![c(-7.25, 0.0)] },
            ],
            vec![c(0.5, 0.0), c(0.0, -2.0)],
        )
        .unwrap();
        let back = R::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
        assert_eq!(R::from_text("poly\n").unwrap(), R::zero());
        assert!(R::from_text("pole 1 0 2 1 0\npoly\n").is_err());
        assert!(R::from_text("bogus 1\n").is_err());
    }

    #[test]
    fn arithmetic_merges_poles() {
        let a = R::pole_power(c(2.0, 0.0), 1, one());
        let b = R::pole_power(c(2.0, 0.0), 2, c(3.0, 0.0));
        let s = &a + &b;
        assert_eq!(s.poles().len(), 1);
        assert_eq!(s.eval(one()).unwrap(), c(2.0, 0.0));
        let d = &s - &s;
        assert_eq!(d.eval(c(0.5, 0.5)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn single_precision_instantiation() {
        let f = RationalFunction::<f32>::pole_power(c(2.0f32, 0.0), 1, c(1.0, 0.0));
        let v = f.derivative(1).eval(c(0.0, 0.0)).unwrap();
        assert!((v.re + 0.25).abs() < 1e-6);
    }
}
