//! Commuting families of circle rotations.
//!
//! Every constructible kind is a rotation `x -> x + theta (mod 1)`, so all
//! members commute, are invertible and preserve Haar measure by construction.

use std::fmt;

use crate::error::{domain, Result};
use crate::unitmath::{
    rational_independence, DoubleDouble, IndependenceVerdict, ScalarConstant, UnitPoint,
    DEFAULT_TOL,
};

/// Largest family size accepted by [`build_family`].
pub const MAX_FAMILY: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum TransformKind {
    Rotation(ScalarConstant),
    /// `x -> x + p * alpha`.
    RotationPower {
        alpha: ScalarConstant,
        p: u64,
    },
    /// `x -> x + 1/q`, of order `q`.
    FiniteRotation {
        q: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub label: String,
}

/// Key under which two specs are extensionally equal.
#[derive(Debug, Clone, PartialEq)]
enum CanonicalAngle {
    Exact(ScalarConstant),
    /// Literal `v` applied `p` times; float products are not canonicalized.
    LiteralPower(u64, u64),
}

impl TransformSpec {
    pub fn rotation(alpha: ScalarConstant) -> Self {
        let label = format!("R[{alpha}]");
        TransformSpec {
            kind: TransformKind::Rotation(alpha),
            label,
        }
    }

    pub fn rotation_power(alpha: ScalarConstant, p: u64) -> Result<Self> {
        if p == 0 {
            return domain("rotation_power needs p >= 1");
        }
        let label = format!("R[{alpha}]^{p}");
        Ok(TransformSpec {
            kind: TransformKind::RotationPower { alpha, p },
            label,
        })
    }

    pub fn finite_rotation(q: u64) -> Result<Self> {
        if q == 0 || q >= 1 << 53 {
            return domain(format!("finite_rotation order must be in 1..2^53, got {q}"));
        }
        Ok(TransformSpec {
            kind: TransformKind::FiniteRotation { q },
            label: format!("S[1/{q}]"),
        })
    }

    pub fn identity() -> Self {
        Self::rotation(ScalarConstant::integer(0).expect("zero is a valid rational"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn base_and_power(&self) -> (ScalarConstant, u64) {
        match &self.kind {
            TransformKind::Rotation(a) => (*a, 1),
            TransformKind::RotationPower { alpha, p } => (*alpha, *p),
            TransformKind::FiniteRotation { q } => (
                ScalarConstant::rational(1, *q as i64).expect("q checked at construction"),
                1,
            ),
        }
    }

    /// The rotation number of one step. Symbolic kinds are exact; a literal
    /// raised to a power is multiplied in floating point.
    pub fn angle(&self) -> ScalarConstant {
        let (base, p) = self.base_and_power();
        if p == 1 {
            return base;
        }
        base.scaled(p).unwrap_or_else(|| {
            ScalarConstant::literal(base.float_value() * p as f64).expect("finite product")
        })
    }

    fn canonical(&self) -> CanonicalAngle {
        let (base, p) = self.base_and_power();
        if base.is_literal() {
            CanonicalAngle::LiteralPower(base.float_value().to_bits(), p)
        } else {
            CanonicalAngle::Exact(self.angle())
        }
    }

    /// Extensional equality of the maps (literals by representation).
    pub fn same_map(&self, other: &TransformSpec) -> bool {
        self.canonical() == other.canonical()
    }

    /// `{n * theta}` for signed `n`, reduced without drift.
    pub fn displacement(&self, n: i128) -> DoubleDouble {
        let (base, p) = self.base_and_power();
        base.frac_mul(n * p as i128)
    }

    /// `T^n x`.
    pub fn apply(&self, x: UnitPoint, n: u64) -> UnitPoint {
        x.shifted(self.displacement(n as i128))
    }

    /// `T^{-n} x`.
    pub fn apply_inverse(&self, x: UnitPoint, n: u64) -> UnitPoint {
        x.shifted(self.displacement(-(n as i128)))
    }

    /// Order of the map when its angle is rational.
    pub fn finite_order(&self) -> Option<u64> {
        self.angle().as_rational().map(|r| *r.denom() as u64)
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `T^n x` for any spec.
pub fn apply(spec: &TransformSpec, x: UnitPoint, n: u64) -> UnitPoint {
    spec.apply(x, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformFamily {
    members: Vec<TransformSpec>,
    /// Groups of zero-based member indices, ordered by first occurrence.
    partition: Vec<Vec<usize>>,
}

impl TransformFamily {
    pub fn members(&self) -> &[TransformSpec] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn equality_partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Index of the group containing member `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.partition
            .iter()
            .position(|g| g.contains(&i))
            .expect("every member is grouped")
    }
}

/// Groups the specs into classes of identical maps.
pub fn build_family(specs: Vec<TransformSpec>) -> Result<TransformFamily> {
    if specs.is_empty() {
        return domain("a transformation family needs at least one member");
    }
    if specs.len() > MAX_FAMILY {
        return domain(format!(
            "family size {} exceeds the cap of {MAX_FAMILY}",
            specs.len()
        ));
    }
    let mut partition: Vec<Vec<usize>> = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        match partition.iter_mut().find(|g| specs[g[0]].same_map(s)) {
            Some(g) => g.push(i),
            None => partition.push(vec![i]),
        }
    }
    Ok(TransformFamily {
        members: specs,
        partition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub spec: TransformSpec,
    /// Set when the angle difference had to fall back to a float literal.
    pub precision_warning: bool,
}

/// `a o b^{-1}`: rotation by the difference of the angles.
pub fn quotient_transform(a: &TransformSpec, b: &TransformSpec) -> Quotient {
    let (ta, tb) = (a.angle(), b.angle());
    let label = format!("{a}∘{b}⁻¹");
    match ta.checked_sub(&tb) {
        Some(diff) => Quotient {
            spec: TransformSpec::rotation(diff).with_label(label),
            precision_warning: false,
        },
        None => {
            let diff = (ta.dd_value() - tb.dd_value()).to_f64();
            let lit = ScalarConstant::literal(diff).expect("difference of finite angles");
            Quotient {
                spec: TransformSpec::rotation(lit).with_label(label),
                precision_warning: true,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgodicVerdict {
    Ergodic,
    Periodic(u64),
    UndeterminedUpToBound(u32),
}

/// Rational angles are periodic, quadratic irrationals are uniquely ergodic,
/// and literals are decided by a bounded relation search.
pub fn is_ergodic_rotation(spec: &TransformSpec, bound: u32) -> ErgodicVerdict {
    let angle = spec.angle();
    if let Some(r) = angle.as_rational() {
        return ErgodicVerdict::Periodic(*r.denom() as u64);
    }
    if !angle.is_literal() {
        return ErgodicVerdict::Ergodic;
    }
    match rational_independence(&[angle], bound, DEFAULT_TOL) {
        Ok(IndependenceVerdict::Dependent { relation }) => {
            ErgodicVerdict::Periodic(relation[1].unsigned_abs())
        }
        Ok(IndependenceVerdict::ExactIndependent { .. }) => ErgodicVerdict::Ergodic,
        _ => ErgodicVerdict::UndeterminedUpToBound(bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitmath::Rational;

    fn sqrt(m: u64) -> ScalarConstant {
        ScalarConstant::sqrt(m).unwrap()
    }

    fn rot(m: u64) -> TransformSpec {
        TransformSpec::rotation(sqrt(m))
    }

    fn rat(p: i64, q: i64) -> TransformSpec {
        TransformSpec::rotation(ScalarConstant::rational(p, q).unwrap())
    }

    #[test]
    fn apply_examples() {
        let x = UnitPoint::new(0.5).unwrap();
        assert_eq!(rat(1, 4).apply(x, 2).value(), 0.0);
        let s = TransformSpec::finite_rotation(3).unwrap();
        let x = UnitPoint::new(0.1).unwrap();
        assert!((s.apply(x, 3).value() - 0.1).abs() < 1e-16);
        let y = rot(2).apply(UnitPoint::ZERO, 2).value();
        // 2*sqrt(2) - 2 to 20 digits: 0.82842712474619009760
        assert!((y - 0.828_427_124_746_190_1).abs() < 1e-16);
    }

    #[test]
    fn partition_examples() {
        let f = build_family(vec![rot(2), rot(3)]).unwrap();
        assert_eq!(f.equality_partition(), &[vec![0], vec![1]]);
        let f = build_family(vec![rot(2), rot(2), rot(3)]).unwrap();
        assert_eq!(f.equality_partition(), &[vec![0, 1], vec![2]]);
        let f = build_family(vec![
            rot(2),
            TransformSpec::rotation_power(sqrt(2), 1).unwrap(),
        ])
        .unwrap();
        assert_eq!(f.equality_partition(), &[vec![0, 1]]);
        let f = build_family(vec![
            TransformSpec::rotation_power(sqrt(2), 2).unwrap(),
            TransformSpec::rotation(sqrt(8)),
            TransformSpec::finite_rotation(4).unwrap(),
            rat(1, 4),
        ])
        .unwrap();
        assert_eq!(f.equality_partition(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn literal_specs_compare_by_representation() {
        let a = TransformSpec::rotation(ScalarConstant::literal(0.1).unwrap());
        let b = TransformSpec::rotation(ScalarConstant::literal(0.1).unwrap());
        let c = TransformSpec::rotation_power(ScalarConstant::literal(0.05).unwrap(), 2).unwrap();
        let f = build_family(vec![a, b, c]).unwrap();
        assert_eq!(f.equality_partition(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn family_size_limits() {
        assert!(build_family(vec![]).is_err());
        assert!(build_family(vec![rot(2); 9]).is_err());
        assert!(build_family(vec![rot(2); 8]).is_ok());
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_transform(&rot(2), &rot(3));
        assert!(q.precision_warning);
        let v = q.spec.angle().float_value();
        // sqrt2 - sqrt3 = -0.31783724519578224473
        assert!((v + 0.317_837_245_195_782_2).abs() < 1e-16);
        let q = quotient_transform(&rot(2), &rot(2));
        assert!(!q.precision_warning);
        assert!(q.spec.angle().is_zero());
        let q = quotient_transform(&rat(1, 2), &rat(1, 3));
        assert_eq!(q.spec.angle().as_rational(), Some(Rational::new(1, 6)));
    }

    #[test]
    fn ergodicity_examples() {
        assert_eq!(
            is_ergodic_rotation(&rat(1, 3), 10),
            ErgodicVerdict::Periodic(3)
        );
        assert_eq!(is_ergodic_rotation(&rot(2), 10), ErgodicVerdict::Ergodic);
        let lit = TransformSpec::rotation(ScalarConstant::literal(0.5).unwrap());
        assert_eq!(is_ergodic_rotation(&lit, 10), ErgodicVerdict::Periodic(2));
        let lit = TransformSpec::rotation(ScalarConstant::literal(2f64.sqrt()).unwrap());
        assert_eq!(
            is_ergodic_rotation(&lit, 10),
            ErgodicVerdict::UndeterminedUpToBound(10)
        );
        assert_eq!(
            is_ergodic_rotation(&TransformSpec::identity(), 10),
            ErgodicVerdict::Periodic(1)
        );
    }

    #[test]
    fn commutation_on_grid() {
        let specs = vec![
            rot(2),
            rot(3),
            TransformSpec::rotation_power(sqrt(5), 3).unwrap(),
            TransformSpec::finite_rotation(7).unwrap(),
            TransformSpec::rotation(ScalarConstant::literal(0.123).unwrap()),
        ];
        for a in &specs {
            for b in &specs {
                for i in 0..100 {
                    let x = UnitPoint::new(i as f64 / 100.0).unwrap();
                    let ab = a.apply(b.apply(x, 1), 1).value();
                    let ba = b.apply(a.apply(x, 1), 1).value();
                    let d = (ab - ba).abs();
                    assert!(d.min(1.0 - d) <= 1e-14, "{a} {b} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let t = rot(3);
        let inv = quotient_transform(&TransformSpec::identity(), &t).spec;
        for n in [1u64, 17, 1000, 1_000_000] {
            let x = UnitPoint::new(0.3).unwrap();
            let back = inv.apply(t.apply(x, n), n).value();
            let d = (back - 0.3).abs();
            assert!(d.min(1.0 - d) <= 1e-12);
            let back = t.apply_inverse(t.apply(x, n), n).value();
            assert!((back - 0.3).abs() <= 1e-12);
        }
    }
}
