//! Compensated summation in a fixed order.
//!
//! All quadrature reductions go through [`NeumaierSum`] (or its complex
//! counterpart) applied to values in cell order. Per-cell values may be
//! produced in parallel; the reduction itself is always sequential, so
//! results are bit-identical for every thread count.

use crate::scalar::{Real, C};

/// Kahan–Babuška (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> NeumaierSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Complex accumulator: independent compensated sums of both parts.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum<T> {
    re: NeumaierSum<T>,
    im: NeumaierSum<T>,
}

impl<T: Real> ComplexSum<T> {
    pub fn new() -> Self {
        Self { re: NeumaierSum::new(), im: NeumaierSum::new() }
    }

    #[inline]
    pub fn add(&mut self, v: C<T>) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    #[inline]
    pub fn value(&self) -> C<T> {
        C::new(self.re.value(), self.im.value())
    }
}

pub fn sum_real<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut acc = NeumaierSum::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

pub fn sum_complex<T: Real, I: IntoIterator<Item = C<T>>>(it: I) -> C<T> {
    let mut acc = ComplexSum::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_mass() {
        let vals = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(sum_real(vals), 2.0);
        let naive: f64 = vals.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn many_small_terms() {
        let s = sum_real(std::iter::repeat(0.1f64).take(1_000_000));
        assert!((s - 100_000.0).abs() < 1e-9);
    }
}
