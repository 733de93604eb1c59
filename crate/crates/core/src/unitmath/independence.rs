//! Bounded search for integer relations `k0 + k1*a1 + ... + kd*ad = 0`.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::constant::{gcd_all, ConstantKind, ScalarConstant};
use super::dd::DoubleDouble;
use crate::error::{domain, Error, Result};

pub const DEFAULT_BOUND: u32 = 10;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Upper limit on the number of coefficient vectors visited.
pub const SEARCH_BUDGET: u128 = 1 << 28;

#[derive(Debug, Clone, PartialEq)]
pub enum IndependenceVerdict {
    /// `relation = (k0, k1, ..., kd)`, nonzero, first nonzero entry positive.
    Dependent {
        relation: Vec<i64>,
    },
    IndependentUpToBound {
        bound: u32,
    },
    ExactIndependent {
        reason: String,
    },
}

impl IndependenceVerdict {
    pub fn is_dependent(&self) -> bool {
        matches!(self, IndependenceVerdict::Dependent { .. })
    }
}

/// `|k0 + sum k_i a_i|` evaluated in double-double.
pub fn relation_residual(relation: &[i64], alphas: &[ScalarConstant]) -> f64 {
    let mut acc = DoubleDouble::from_f64(relation[0] as f64);
    for (k, a) in relation[1..].iter().zip(alphas) {
        acc = acc + DoubleDouble::from_f64(*k as f64) * a.dd_value();
    }
    acc.abs().to_f64()
}

fn normalize_sign(v: &mut [i64]) {
    if let Some(first) = v.iter().find(|&&k| k != 0) {
        if *first < 0 {
            v.iter_mut().for_each(|k| *k = -*k);
        }
    }
}

fn linf(v: &[i64]) -> i64 {
    v.iter().map(|k| k.abs()).max().unwrap_or(0)
}

/// Decides whether `1, alphas[0], ..., alphas[d-1]` satisfy an integer relation.
///
/// Every vector with `|k_i| <= bound` is visited; among those within `tol`
/// the one with least max-norm wins, ties going to the lexicographically
/// smallest sign-normalized vector. When the search finds nothing and every
/// constant is symbolic, exact linear algebra over the quadratic fields
/// either produces a (larger) relation or, for a single constant, proves
/// independence.
pub fn rational_independence(
    alphas: &[ScalarConstant],
    bound: u32,
    tol: f64,
) -> Result<IndependenceVerdict> {
    if alphas.is_empty() {
        return domain("rational independence needs at least one constant");
    }
    if bound == 0 {
        return domain("search bound must be positive");
    }
    if tol.is_nan() || tol <= 0.0 {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let d = alphas.len();
    let width = 2 * bound as u128 + 1;
    let visits = (0..d).try_fold(1u128, |acc, _| acc.checked_mul(width));
    match visits {
        Some(v) if v <= SEARCH_BUDGET => {}
        _ => {
            return Err(Error::Resource(format!(
                "exhaustive relation search over {d} constants with bound {bound} exceeds {SEARCH_BUDGET} vectors"
            )))
        }
    }

    if let Some(relation) = exhaustive_search(alphas, bound as i64, tol) {
        return Ok(IndependenceVerdict::Dependent { relation });
    }

    match symbolic_relation(alphas) {
        Some(Symbolic::Relation(relation)) => Ok(IndependenceVerdict::Dependent { relation }),
        Some(Symbolic::FullRank) if d == 1 => Ok(IndependenceVerdict::ExactIndependent {
            reason: format!("{} is a quadratic irrational", alphas[0]),
        }),
        _ => Ok(IndependenceVerdict::IndependentUpToBound { bound }),
    }
}

fn exhaustive_search(alphas: &[ScalarConstant], bound: i64, tol: f64) -> Option<Vec<i64>> {
    let d = alphas.len();
    let values: Vec<DoubleDouble> = alphas.iter().map(|a| a.dd_value()).collect();
    let mut ks = vec![-bound; d];
    let mut best: Option<Vec<i64>> = None;
    loop {
        if ks.iter().any(|&k| k != 0) {
            let mut s = DoubleDouble::ZERO;
            for (k, v) in ks.iter().zip(&values) {
                s = s + DoubleDouble::from_f64(*k as f64) * *v;
            }
            let k0 = -s.to_f64().round();
            if k0.abs() <= bound as f64 {
                let residual = (s + DoubleDouble::from_f64(k0)).abs().to_f64();
                if residual <= tol {
                    let mut cand = Vec::with_capacity(d + 1);
                    cand.push(k0 as i64);
                    cand.extend_from_slice(&ks);
                    normalize_sign(&mut cand);
                    let better = match &best {
                        None => true,
                        Some(b) => (linf(&cand), &cand) < (linf(b), b),
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
        }
        // odometer increment
        let mut i = d;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if ks[i] < bound {
                ks[i] += 1;
                break;
            }
            ks[i] = -bound;
        }
    }
}

enum Symbolic {
    Relation(Vec<i64>),
    FullRank,
}

type Q = Ratio<i128>;

/// Coordinates of each constant in the basis `{1, sqrt(m_1), sqrt(m_2), ...}`
/// of distinct square-free radicands, which is linearly independent over Q.
fn symbolic_relation(alphas: &[ScalarConstant]) -> Option<Symbolic> {
    let mut radicands: Vec<u64> = Vec::new();
    for a in alphas {
        match *a.kind() {
            ConstantKind::Literal(_) => return None,
            ConstantKind::Surd { m, .. } if !radicands.contains(&m) => radicands.push(m),
            _ => {}
        }
    }
    let rows = 1 + radicands.len();
    let cols = 1 + alphas.len();
    let q = |r: &Ratio<i64>| Q::new(*r.numer() as i128, *r.denom() as i128);
    let mut mat = vec![vec![Q::zero(); cols]; rows];
    mat[0][0] = Q::one();
    for (j, a) in alphas.iter().enumerate() {
        match *a.kind() {
            ConstantKind::Rational(r) => mat[0][j + 1] = q(&r),
            ConstantKind::Surd { a, b, m } => {
                mat[0][j + 1] = q(&a);
                let row = 1 + radicands.iter().position(|&x| x == m)?;
                mat[row][j + 1] = q(&b);
            }
            ConstantKind::Literal(_) => unreachable!(),
        }
    }

    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][c].recip();
        for x in mat[r].iter_mut() {
            *x *= inv;
        }
        let pivot_row = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if pivots.len() == cols {
        return Some(Symbolic::FullRank);
    }

    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut kernel = vec![Q::zero(); cols];
    kernel[free] = Q::one();
    for (row, &pc) in pivots.iter().enumerate() {
        kernel[pc] = -mat[row][free];
    }
    let lcm = kernel
        .iter()
        .fold(1i128, |l, x| num_integer::lcm(l, *x.denom()));
    let ints: Vec<i128> = kernel
        .iter()
        .map(|x| (*x * Q::from_integer(lcm)).to_integer())
        .collect();
    let g = gcd_all(&ints);
    let mut rel: Vec<i64> = ints
        .iter()
        .map(|x| i64::try_from(x / g).ok())
        .collect::<Option<_>>()?;
    normalize_sign(&mut rel);
    Some(Symbolic::Relation(rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt(m: u64) -> ScalarConstant {
        ScalarConstant::sqrt(m).unwrap()
    }

    #[test]
    fn half_is_dependent() {
        let v = rational_independence(&[ScalarConstant::rational(1, 2).unwrap()], 2, 1e-9).unwrap();
        assert_eq!(
            v,
            IndependenceVerdict::Dependent {
                relation: vec![1, -2]
            }
        );
    }

    #[test]
    fn sqrt2_sqrt8_dependent() {
        let v = rational_independence(&[sqrt(2), sqrt(8)], 3, 1e-9).unwrap();
        assert_eq!(
            v,
            IndependenceVerdict::Dependent {
                relation: vec![0, 2, -1]
            }
        );
    }

    #[test]
    fn sqrt2_sqrt3_independent_up_to_bound() {
        let v = rational_independence(&[sqrt(2), sqrt(3)], 10, 1e-9).unwrap();
        assert_eq!(v, IndependenceVerdict::IndependentUpToBound { bound: 10 });
    }

    #[test]
    fn single_surd_is_exactly_independent() {
        let v = rational_independence(&[sqrt(5)], 10, 1e-9).unwrap();
        assert!(matches!(v, IndependenceVerdict::ExactIndependent { .. }));
    }

    #[test]
    fn rational_beyond_bound_found_symbolically() {
        let v =
            rational_independence(&[ScalarConstant::rational(3, 97).unwrap()], 10, 1e-9).unwrap();
        assert_eq!(
            v,
            IndependenceVerdict::Dependent {
                relation: vec![3, -97]
            }
        );
    }

    #[test]
    fn literal_half_found_by_search() {
        let v = rational_independence(&[ScalarConstant::literal(0.5).unwrap()], 10, 1e-9).unwrap();
        assert_eq!(
            v,
            IndependenceVerdict::Dependent {
                relation: vec![1, -2]
            }
        );
    }

    #[test]
    fn empty_and_budget_errors() {
        assert!(matches!(
            rational_independence(&[], 10, 1e-9),
            Err(Error::Domain(_))
        ));
        let many = vec![sqrt(2); 5];
        assert!(matches!(
            rational_independence(&many, 2500, 1e-9),
            Err(Error::Resource(_))
        ));
    }

    /// Brute-force oracle for the (sqrt2, sqrt3) verdict: scan all 21^2 pairs
    /// in plain f64 and confirm no nearest-integer residual is below 1e-9.
    #[test]
    fn brute_force_oracle_sqrt2_sqrt3() {
        let (a, b) = (2f64.sqrt(), 3f64.sqrt());
        let mut min_residual = f64::INFINITY;
        for k1 in -10i32..=10 {
            for k2 in -10i32..=10 {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let s = k1 as f64 * a + k2 as f64 * b;
                min_residual = min_residual.min((s - s.round()).abs());
            }
        }
        assert!(min_residual > 1e-6, "{min_residual}");
    }
}
