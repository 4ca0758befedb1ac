//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every supported type represents the
    /// literals used in this crate, so the conversion never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap()
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type C<T> = Complex<T>;

/// Shorthand constructor.
#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

/// Complex number from two `f64` literals.
#[inline]
pub fn cl<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Embeds a real number.
#[inline]
pub fn re<T: Real>(v: T) -> C<T> {
    Complex::new(v, T::zero())
}

/// `n!` as a real number.
pub fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k as usize))
}

/// Parses a complex literal written as `re+imi`, `re-imi`, `re`, or `imi`.
pub fn parse_complex<T: Real>(s: &str) -> Option<C<T>> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        // find the sign separating real and imaginary parts, skipping exponents
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k];
            if (ch == b'+' || ch == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im_part = match im_part {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let im_part = im_part.strip_prefix('+').unwrap_or(im_part);
        let re_v = re_part.parse::<T>().ok()?;
        let im_v = im_part.parse::<T>().ok()?;
        Some(c(re_v, im_v))
    } else {
        s.parse::<T>().ok().map(re)
    }
}

/// Formats a complex number in the `re+imi` config syntax, round-trip exact.
pub fn format_complex<T: Real>(z: C<T>) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
