//! Arithmetic on the unit circle `[0, 1)`.

mod constant;
mod dd;
mod independence;
mod sum;

pub use constant::{ConstantKind, Rational, ScalarConstant};
pub use dd::DoubleDouble;
pub use independence::{
    rational_independence, relation_residual, IndependenceVerdict, DEFAULT_BOUND, DEFAULT_TOL,
    SEARCH_BUDGET,
};
pub use sum::CompensatedSum;

use crate::error::{domain, Result};

/// A point of the circle carried as `value + comp`, with `value` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitPoint {
    value: f64,
    comp: f64,
}

impl UnitPoint {
    pub const ZERO: UnitPoint = UnitPoint {
        value: 0.0,
        comp: 0.0,
    };

    /// Reduces any finite real modulo one.
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return domain(format!("point must be finite, got {x}"));
        }
        Ok(Self::from_dd(DoubleDouble::from_f64(x)))
    }

    pub fn from_dd(x: DoubleDouble) -> Self {
        let f = x.frac();
        UnitPoint {
            value: f.hi,
            comp: f.lo,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn comp(&self) -> f64 {
        self.comp
    }

    pub fn as_dd(&self) -> DoubleDouble {
        DoubleDouble {
            hi: self.value,
            lo: self.comp,
        }
    }

    /// `{self + t}`.
    pub fn shifted(&self, t: DoubleDouble) -> Self {
        Self::from_dd(self.as_dd() + t)
    }
}

/// Fractional part `x - floor(x)`; exact integers map to `0`.
pub fn frac(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("frac of non-finite value {x}"));
    }
    Ok(dd::frac_exact(x))
}

/// `{x0 + n * alpha}`, by reducing the product `n * alpha` modulo one rather
/// than iterating `n` additions.
pub fn orbit_point(x0: UnitPoint, alpha: &ScalarConstant, n: u64) -> UnitPoint {
    x0.shifted(alpha.frac_mul(n as i128))
}

/// `sum_{r=0}^{k-1} {x + r/k}`, evaluated term by term in double-double.
///
/// Equals `{kx} + (k-1)/2` for every `x` in `[0, 1]`.
pub fn sum_shifted_frac(x: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return domain("sum_shifted_frac needs k >= 1");
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("sum_shifted_frac needs x in [0, 1], got {x}"));
    }
    let xd = DoubleDouble::from_f64(x);
    let mut acc = CompensatedSum::new();
    for r in 0..k {
        let term = (xd + DoubleDouble::from_ratio(r as i64, k as i64)).frac();
        acc.add(term.hi);
        acc.add(term.lo);
    }
    Ok(acc.value())
}

/// Right-hand side of the shifted-fractional-part identity, `{kx} + (k-1)/2`.
pub fn shifted_frac_closed_form(x: f64, k: u32) -> f64 {
    let (p, e) = dd::two_prod(k as f64, x);
    DoubleDouble::new(p, e).frac().to_f64() + (k as f64 - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frac_examples() {
        assert_eq!(frac(0.0).unwrap(), 0.0);
        assert_eq!(frac(3.25).unwrap(), 0.25);
        assert!((frac(-0.3).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(frac(-2.0).unwrap(), 0.0);
        assert!(frac(f64::NAN).is_err());
        assert!(frac(f64::INFINITY).is_err());
    }

    #[test]
    fn orbit_point_rational_examples() {
        let half = ScalarConstant::rational(1, 2).unwrap();
        assert_eq!(orbit_point(UnitPoint::ZERO, &half, 3).value(), 0.5);
        let third = ScalarConstant::rational(1, 3).unwrap();
        let p = orbit_point(UnitPoint::ZERO, &third, 1_000_000);
        assert_eq!(p.value(), 1.0 / 3.0);
    }

    #[test]
    fn unit_point_stays_in_range() {
        let p = UnitPoint::new(-1e-300).unwrap();
        assert!((0.0..1.0).contains(&p.value()));
        let p = UnitPoint::new(1.0 - 1e-17).unwrap();
        assert!((0.0..1.0).contains(&p.value()));
    }

    #[test]
    fn shifted_frac_examples() {
        assert_eq!(sum_shifted_frac(0.25, 1).unwrap(), 0.25);
        assert_eq!(sum_shifted_frac(0.25, 2).unwrap(), 1.0);
        assert_eq!(shifted_frac_closed_form(0.25, 2), 1.0);
        assert!((sum_shifted_frac(0.2, 5).unwrap() - 2.0).abs() < 1e-12);
        assert!((shifted_frac_closed_form(0.2, 5) - 2.0).abs() < 1e-12);
        assert!(sum_shifted_frac(0.3, 0).is_err());
        assert!(sum_shifted_frac(1.5, 2).is_err());
    }

    #[test]
    fn shifted_frac_at_right_endpoint() {
        for k in 1..20 {
            let lhs = sum_shifted_frac(1.0, k).unwrap();
            assert!((lhs - shifted_frac_closed_form(1.0, k)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn frac_idempotent(x in -1e12f64..1e12) {
            let f = frac(x).unwrap();
            prop_assert!((0.0..1.0).contains(&f));
            prop_assert_eq!(frac(f).unwrap(), f);
        }

        #[test]
        fn frac_shift_invariant(x in -1e3f64..1e3, m in -(1i64 << 40)..(1i64 << 40)) {
            let shifted = frac(x + m as f64).unwrap();
            let base = frac(x).unwrap();
            let d = (shifted - base).abs();
            // one ulp of the shifted sum, measured on the circle
            let ulp = (x + m as f64).abs() * f64::EPSILON;
            prop_assert!(d.min(1.0 - d) <= ulp.max(f64::EPSILON));
        }

        #[test]
        fn orbit_consistency(x in 0.0f64..1.0, m in 0u64..1_000_000, n in 0u64..1_000_000) {
            let a = ScalarConstant::sqrt(2).unwrap();
            let x0 = UnitPoint::new(x).unwrap();
            let direct = orbit_point(x0, &a, m + n);
            let stepped = orbit_point(orbit_point(x0, &a, m), &a, n);
            let d = (direct.value() - stepped.value()).abs();
            prop_assert!(d.min(1.0 - d) <= 1e-12);
        }

        #[test]
        fn shifted_frac_identity(x in 0.0f64..=1.0, k in 1u32..=64) {
            let lhs = sum_shifted_frac(x, k).unwrap();
            prop_assert!((lhs - shifted_frac_closed_form(x, k)).abs() <= 1e-12);
        }
    }
}
