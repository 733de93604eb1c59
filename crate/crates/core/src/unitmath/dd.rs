//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
//!
//! Only the handful of error-free transformations needed for orbit reduction
//! modulo one are provided.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Exact fractional part of a double. `x - floor(x)` is representable for
/// every finite `x`, so no rounding occurs except the final `-0.0 -> 0.0`.
#[inline]
pub fn frac_exact(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        // only reachable for tiny negative x where floor(x) = -1
        0.0
    } else {
        f + 0.0
    }
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// `p / q` correctly to about 106 bits; requires `|p|, |q| < 2^53`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        let (pf, qf) = (p as f64, q as f64);
        let hi = pf / qf;
        let rem = (-hi).mul_add(qf, pf);
        let lo = rem / qf;
        DoubleDouble::new(hi, lo)
    }

    /// Square root of a non-negative integer below 2^53.
    pub fn sqrt_int(m: u64) -> Self {
        let mf = m as f64;
        let hi = mf.sqrt();
        if hi == 0.0 {
            return Self::ZERO;
        }
        let rem = (-hi).mul_add(hi, mf);
        DoubleDouble::new(hi, rem / (2.0 * hi))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            // hi is an integer; the fractional information lives in lo
            DoubleDouble::new(fh, self.lo.floor())
        } else {
            DoubleDouble { hi: fh, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`.
    ///
    /// Values that round to exactly one after normalization collapse to zero,
    /// which is the same point of the circle.
    pub fn frac(self) -> Self {
        let fh = frac_exact(self.hi);
        let fl = self.lo - self.lo.round();
        // s lies in (-0.5, 1.5)
        let (mut s, mut e) = two_sum(fh, fl);
        if s >= 1.0 {
            (s, e) = two_sum(s - 1.0, e);
        } else if s < 0.0 || (s == 0.0 && e < 0.0) {
            let (t, te) = two_sum(s, 1.0);
            (s, e) = quick_two_sum(t, te + e);
        }
        if !(0.0..1.0).contains(&s) || (s == 0.0 && e < 0.0) {
            return Self::ZERO;
        }
        DoubleDouble { hi: s + 0.0, lo: e }
    }

    /// `n * self` reduced modulo one, for integers far beyond 2^53.
    ///
    /// `|n|` is split into 32-bit limbs; each limb times each component is an
    /// exact `two_prod`, and every partial product is reduced before summation
    /// so the accumulator never holds more than a few units.
    pub fn frac_mul_int(self, n: i128) -> Self {
        if n == 0 {
            return Self::ZERO;
        }
        let neg = n < 0;
        let mut m = n.unsigned_abs();
        let mut acc = Self::ZERO;
        let mut scale = 1.0f64;
        while m != 0 {
            let limb = (m & 0xffff_ffff) as f64;
            m >>= 32;
            if limb != 0.0 {
                for c in [self.hi, self.lo] {
                    let (p, e) = two_prod(limb, c);
                    let (p, e) = (p * scale, e * scale);
                    acc = (acc + DoubleDouble::from_f64(frac_exact(p))).frac();
                    acc = (acc + DoubleDouble::from_f64(frac_exact(e))).frac();
                }
            }
            scale *= 4_294_967_296.0;
        }
        if neg {
            (-acc).frac()
        } else {
            acc
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_low_word() {
        let r = DoubleDouble::sqrt_int(2);
        // (hi + lo)^2 - 2 should vanish to ~2^-104
        let sq = r * r - DoubleDouble::from_f64(2.0);
        assert!(sq.to_f64().abs() < 1e-30, "{sq:?}");
    }

    #[test]
    fn ratio_one_third() {
        let r = DoubleDouble::from_ratio(1, 3);
        let back = r * DoubleDouble::from_f64(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn frac_handles_negative_and_wrap() {
        assert_eq!(DoubleDouble::from_f64(-0.25).frac().hi, 0.75);
        assert_eq!(DoubleDouble::from_f64(3.0).frac(), DoubleDouble::ZERO);
        let tiny_below_zero = DoubleDouble {
            hi: 0.0,
            lo: -1e-300,
        };
        assert_eq!(tiny_below_zero.frac(), DoubleDouble::ZERO);
        let f = DoubleDouble::new(2.5, 1e-20).frac();
        assert_eq!(f.hi, 0.5);
        assert!((f.lo - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn frac_mul_int_matches_small_products() {
        let c = DoubleDouble::from_ratio(1, 3);
        for n in [-7i128, -1, 1, 2, 3, 4, 1_000_000, 3 * (1 << 40) + 1] {
            let expect = (n.rem_euclid(3)) as f64 / 3.0;
            let got = c.frac_mul_int(n).to_f64();
            assert!((got - expect).abs() < 1e-15, "n={n}: {got} vs {expect}");
        }
    }
}
