use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};

use super::dd::DoubleDouble;
use crate::error::{domain, Result};

pub type Rational = Ratio<i64>;

/// Numerators and denominators must convert to `f64` without rounding.
const EXACT_INT_LIMIT: i64 = 1 << 53;
const SURD_RADICAND_LIMIT: u64 = 1 << 32;

#[derive(Debug, Clone, Copy)]
pub enum ConstantKind {
    Rational(Rational),
    /// `a + b * sqrt(m)` with `m > 1` square-free and `b != 0`.
    Surd {
        a: Rational,
        b: Rational,
        m: u64,
    },
    Literal(f64),
}

/// A rotation number, kept symbolic where possible so orbit points can be
/// reduced modulo one without drift.
#[derive(Debug, Clone, Copy)]
pub struct ScalarConstant {
    kind: ConstantKind,
    value: DoubleDouble,
}

fn check_rational(r: &Rational) -> Result<()> {
    if r.numer().abs() >= EXACT_INT_LIMIT || *r.denom() >= EXACT_INT_LIMIT {
        return domain(format!(
            "rational {r} exceeds 2^53 in numerator or denominator"
        ));
    }
    Ok(())
}

fn rational_dd(r: &Rational) -> DoubleDouble {
    DoubleDouble::from_ratio(*r.numer(), *r.denom())
}

/// Splits `m` into `s^2 * f` with `f` square-free.
fn square_free_split(mut m: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut p = 2u64;
    while p * p <= m {
        while m.is_multiple_of(p * p) {
            m /= p * p;
            outside *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (outside, m)
}

impl ScalarConstant {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return domain(format!("rational denominator must be positive, got {q}"));
        }
        Self::from_rational(Rational::new(p, q))
    }

    pub fn from_rational(r: Rational) -> Result<Self> {
        check_rational(&r)?;
        Ok(ScalarConstant {
            kind: ConstantKind::Rational(r),
            value: rational_dd(&r),
        })
    }

    pub fn integer(k: i64) -> Result<Self> {
        Self::rational(k, 1)
    }

    /// `sqrt(m)` as a surd.
    pub fn sqrt(m: u64) -> Result<Self> {
        Self::surd(Rational::zero(), Rational::from_integer(1), m)
    }

    /// `a + b * sqrt(m)`, normalized: square factors of `m` move into `b`, and a
    /// vanishing irrational part collapses to a rational.
    pub fn surd(a: Rational, b: Rational, m: u64) -> Result<Self> {
        check_rational(&a)?;
        check_rational(&b)?;
        if m == 0 {
            return Self::from_rational(a);
        }
        if m >= SURD_RADICAND_LIMIT {
            return domain(format!("surd radicand {m} is too large"));
        }
        let (outside, core) = square_free_split(m);
        let outside = i64::try_from(outside).expect("outside factor below 2^16");
        let b = match b.checked_mul(&Rational::from_integer(outside)) {
            Some(b) => b,
            None => return domain("surd coefficient overflows after normalization"),
        };
        if b.is_zero() {
            return Self::from_rational(a);
        }
        if core == 1 {
            return match a.checked_add(&b) {
                Some(r) => Self::from_rational(r),
                None => domain("surd collapses to an overflowing rational"),
            };
        }
        check_rational(&b)?;
        let value = rational_dd(&a) + rational_dd(&b) * DoubleDouble::sqrt_int(core);
        Ok(ScalarConstant {
            kind: ConstantKind::Surd { a, b, m: core },
            value,
        })
    }

    pub fn literal(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return domain(format!("literal constant must be finite, got {v}"));
        }
        Ok(ScalarConstant {
            kind: ConstantKind::Literal(v),
            value: DoubleDouble::from_f64(v),
        })
    }

    pub fn kind(&self) -> &ConstantKind {
        &self.kind
    }

    pub fn float_value(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn dd_value(&self) -> DoubleDouble {
        self.value
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.kind {
            ConstantKind::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.kind, ConstantKind::Literal(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ConstantKind::Rational(r) if r.is_zero())
    }

    pub fn neg(&self) -> Self {
        let kind = match self.kind {
            ConstantKind::Rational(r) => ConstantKind::Rational(-r),
            ConstantKind::Surd { a, b, m } => ConstantKind::Surd { a: -a, b: -b, m },
            ConstantKind::Literal(v) => ConstantKind::Literal(-v),
        };
        ScalarConstant {
            kind,
            value: -self.value,
        }
    }

    /// Exact `self - other` when both are symbolic in a common quadratic field.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        use ConstantKind::*;
        match (self.kind, other.kind) {
            (Rational(x), Rational(y)) => Self::from_rational(x.checked_sub(&y)?).ok(),
            (Surd { a, b, m }, Rational(y)) => Self::surd(a.checked_sub(&y)?, b, m).ok(),
            (Rational(x), Surd { a, b, m }) => Self::surd(x.checked_sub(&a)?, -b, m).ok(),
            (
                Surd { a, b, m },
                Surd {
                    a: a2,
                    b: b2,
                    m: m2,
                },
            ) if m == m2 => Self::surd(a.checked_sub(&a2)?, b.checked_sub(&b2)?, m).ok(),
            _ => None,
        }
    }

    /// Exact `p * self` for symbolic kinds; literals are multiplied in floating point.
    pub fn scaled(&self, p: u64) -> Option<Self> {
        let pr = Rational::from_integer(i64::try_from(p).ok()?);
        match self.kind {
            ConstantKind::Rational(r) => Self::from_rational(r.checked_mul(&pr)?).ok(),
            ConstantKind::Surd { a, b, m } => {
                Self::surd(a.checked_mul(&pr)?, b.checked_mul(&pr)?, m).ok()
            }
            ConstantKind::Literal(v) => Self::literal(v * p as f64).ok(),
        }
    }

    /// `{n * self}` in double-double precision.
    pub fn frac_mul(&self, n: i128) -> DoubleDouble {
        match self.kind {
            ConstantKind::Rational(r) => frac_rational_mul(&r, n),
            ConstantKind::Surd { a, b, m } => {
                let rational_part = frac_rational_mul(&a, n);
                let root = DoubleDouble::sqrt_int(m);
                let t = n * *b.numer() as i128;
                let bq = *b.denom() as i128;
                let whole = t.div_euclid(bq);
                let rem = t.rem_euclid(bq) as i64;
                let irr_whole = root.frac_mul_int(whole);
                let irr_rem = (DoubleDouble::from_ratio(rem, *b.denom()) * root).frac();
                (rational_part + irr_whole + irr_rem).frac()
            }
            ConstantKind::Literal(_) => self.value.frac_mul_int(n),
        }
    }

    /// Symbolic equality; literals compare by bit pattern.
    pub fn same_as(&self, other: &Self) -> bool {
        use ConstantKind::*;
        match (self.kind, other.kind) {
            (Rational(x), Rational(y)) => x == y,
            (
                Surd { a, b, m },
                Surd {
                    a: a2,
                    b: b2,
                    m: m2,
                },
            ) => a == a2 && b == b2 && m == m2,
            (Literal(x), Literal(y)) => x.to_bits() == y.to_bits(),
            _ => false,
        }
    }
}

fn frac_rational_mul(r: &Rational, n: i128) -> DoubleDouble {
    let q = *r.denom();
    let rem = (n * *r.numer() as i128).rem_euclid(q as i128) as i64;
    DoubleDouble::from_ratio(rem, q)
}

impl PartialEq for ScalarConstant {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Display for ScalarConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstantKind::Rational(r) => write!(f, "{r}"),
            ConstantKind::Surd { a, b, m } => {
                if !a.is_zero() {
                    write!(f, "{a}")?;
                    if b.is_positive() {
                        write!(f, "+")?;
                    }
                }
                if b == Rational::from_integer(-1) {
                    write!(f, "-")?;
                } else if b != Rational::from_integer(1) {
                    write!(f, "{b}*")?;
                }
                write!(f, "sqrt({m})")
            }
            ConstantKind::Literal(v) => write!(f, "{v}"),
        }
    }
}

/// Greatest common divisor of a nonzero integer vector, always positive.
pub(crate) fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |g, &x| g.gcd(&x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surd_normalizes_square_factors() {
        let s = ScalarConstant::sqrt(8).unwrap();
        match *s.kind() {
            ConstantKind::Surd { a, b, m } => {
                assert!(a.is_zero());
                assert_eq!(b, Rational::from_integer(2));
                assert_eq!(m, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!((s.float_value() - 8f64.sqrt()).abs() < 1e-15);
        assert!(ScalarConstant::sqrt(9)
            .unwrap()
            .same_as(&ScalarConstant::integer(3).unwrap()));
    }

    #[test]
    fn rational_rejects_bad_denominator() {
        assert!(ScalarConstant::rational(1, 0).is_err());
        assert!(ScalarConstant::rational(1, -2).is_err());
        let r = ScalarConstant::rational(2, 4).unwrap();
        assert_eq!(r.as_rational(), Some(Rational::new(1, 2)));
    }

    #[test]
    fn symbolic_subtraction() {
        let half = ScalarConstant::rational(1, 2).unwrap();
        let third = ScalarConstant::rational(1, 3).unwrap();
        assert!(half
            .checked_sub(&third)
            .unwrap()
            .same_as(&ScalarConstant::rational(1, 6).unwrap()));
        let r2 = ScalarConstant::sqrt(2).unwrap();
        assert!(r2.checked_sub(&r2).unwrap().is_zero());
        let r3 = ScalarConstant::sqrt(3).unwrap();
        assert!(r2.checked_sub(&r3).is_none());
        let one_plus =
            ScalarConstant::surd(Rational::from_integer(1), Rational::from_integer(1), 2).unwrap();
        assert!(one_plus
            .checked_sub(&r2)
            .unwrap()
            .same_as(&ScalarConstant::integer(1).unwrap()));
    }

    #[test]
    fn frac_mul_surd_with_fractional_coefficient() {
        // (1/3 + (2/7) sqrt 5) * n for small n against plain f64
        let c = ScalarConstant::surd(Rational::new(1, 3), Rational::new(2, 7), 5).unwrap();
        for n in [0i128, 1, 2, 5, 17, 1000] {
            let direct = (n as f64 * c.float_value()).rem_euclid(1.0);
            let got = c.frac_mul(n).to_f64();
            let diff = (got - direct).abs().min(1.0 - (got - direct).abs());
            assert!(diff < 1e-12, "n={n}: {got} vs {direct}");
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(ScalarConstant::sqrt(2).unwrap().to_string(), "sqrt(2)");
        assert_eq!(ScalarConstant::sqrt(8).unwrap().to_string(), "2*sqrt(2)");
        assert_eq!(ScalarConstant::rational(1, 3).unwrap().to_string(), "1/3");
    }
}
