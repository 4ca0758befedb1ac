//! Higher-order difference quotients
//! `D_h^t f(x0) = h^{-t} sum_s (-1)^{t-s} C(t,s) f(x0 + s h)`
//! and the kernel expansion of `1/(z - x)` about `x0`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rational::Evaluable;
use crate::scalar::{format_complex, Real, C};
use crate::sum::{sum_complex, ComplexSum};

/// Largest order for which binomials are tabulated.
pub const MAX_ORDER: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffQuotient<T> {
    pub x0: C<T>,
    pub h: C<T>,
    pub t: usize,
    pub value: C<T>,
}

/// Row `t` of Pascal's triangle in `u64`.
pub fn binomial_row(t: usize) -> Result<Vec<u64>> {
    if t > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {t} exceeds {MAX_ORDER}")));
    }
    let mut row = vec![1u64];
    for _ in 0..t {
        let mut next = vec![1u64; row.len() + 1];
        for s in 1..row.len() {
            next[s] = row[s - 1] + row[s];
        }
        row = next;
    }
    Ok(row)
}

fn check_args<T: Real>(h: C<T>, t: usize) -> Result<()> {
    if h.re == T::zero() && h.im == T::zero() {
        return Err(Error::InvalidArgument("step h must be nonzero".into()));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("order t must be at least 1".into()));
    }
    Ok(())
}

pub fn diff_quotient<T: Real, F: Evaluable<T> + ?Sized>(f: &F, x0: C<T>, h: C<T>, t: usize) -> Result<DiffQuotient<T>> {
    check_args(h, t)?;
    let value = raw_quotient(f, x0, h, t)?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NodeEvaluation(format!("non-finite quotient at x0 = {}", format_complex(x0))));
    }
    Ok(DiffQuotient { x0, h, t, value })
}

fn raw_quotient<T: Real, F: Evaluable<T> + ?Sized>(f: &F, x0: C<T>, h: C<T>, t: usize) -> Result<C<T>> {
    let binom = binomial_row(t)?;
    let mut acc = ComplexSum::new();
    for (s, &b) in binom.iter().enumerate() {
        let node = x0 + h * T::from_usize_lossy(s);
        let fv = f
            .evaluate(node)
            .map_err(|e| Error::NodeEvaluation(format!("{} ({e})", format_complex(node))))?;
        let coeff = T::lit(b as f64);
        acc.add(if (t - s) % 2 == 0 { fv * coeff } else { -fv * coeff });
    }
    Ok(acc.value() / h.powu(t as u32))
}

/// `|D_h^1 (D_h^{t-1} f)(x0) - D_h^t f(x0)|`.
pub fn compose_check<T: Real, F: Evaluable<T> + ?Sized>(f: &F, x0: C<T>, h: C<T>, t: usize) -> Result<T> {
    check_args(h, t)?;
    if t < 2 {
        return Err(Error::InvalidArgument("compose_check needs t >= 2".into()));
    }
    let inner_at = |u: C<T>| raw_quotient(f, u, h, t - 1);
    let outer = (inner_at(x0 + h)? - inner_at(x0)?) / h;
    let direct = raw_quotient(f, x0, h, t)?;
    Ok((outer - direct).norm())
}

/// `1/(z - x) = sum_{m=1..t} (x-x0)^{m-1}/(z-x0)^m + (x-x0)^t/((z-x)(z-x0)^t)`.
/// Returns the `t` summands and the remainder.
pub fn kernel_factorization<T: Real>(x: C<T>, x0: C<T>, z: C<T>, t: usize) -> Result<(Vec<C<T>>, C<T>)> {
    if t == 0 {
        return Err(Error::InvalidArgument("order t must be at least 1".into()));
    }
    if z == x || z == x0 {
        return Err(Error::SingularPoint(format_complex(z)));
    }
    let d = x - x0;
    let w = (z - x0).inv();
    let mut terms = Vec::with_capacity(t);
    let mut num = C::new(T::one(), T::zero());
    let mut den = w;
    for _ in 0..t {
        terms.push(num * den);
        num = num * d;
        den = den * w;
    }
    // num = d^t, den = w^{t+1}; remainder uses w^t
    let remainder = num * (den / w) / (z - x);
    Ok((terms, remainder))
}

/// Total of [`kernel_factorization`], for checks against `1/(z - x)`.
pub fn factorization_total<T: Real>(terms: &[C<T>], remainder: C<T>) -> C<T> {
    sum_complex(terms.iter().copied().chain(std::iter::once(remainder)))
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow<T> {
    pub h: C<T>,
    pub value: C<T>,
    pub abs_error: T,
}

/// Rows in schedule order.
pub fn convergence_table<T: Real, F: Evaluable<T> + ?Sized>(
    f: &F,
    x0: C<T>,
    t: usize,
    h_schedule: &[C<T>],
    reference: C<T>,
) -> Result<Vec<ConvergenceRow<T>>> {
    h_schedule
        .iter()
        .map(|&h| {
            let q = diff_quotient(f, x0, h, t)?;
            Ok(ConvergenceRow { h, value: q.value, abs_error: (q.value - reference).norm() })
        })
        .collect()
}

/// CSV with columns `h_re,h_im,value_re,value_im,abs_error`.
pub fn convergence_csv<T: Real>(rows: &[ConvergenceRow<T>]) -> String {
    let mut s = String::from("h_re,h_im,value_re,value_im,abs_error\n");
    for r in rows {
        writeln!(s, "{:e},{:e},{:e},{:e},{:e}", r.h.re, r.h.im, r.value.re, r.value.im, r.abs_error).unwrap();
    }
    s
}
