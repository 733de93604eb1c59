//! Closed-form limits of diagonal averages and measured-vs-predicted reports.
//!
//! Members of a family that are the same map form one group and contribute
//! `∫ prod_{i in group} f_i dμ`; distinct groups contribute independent
//! factors. The product is the limit provided the distinct rotation numbers,
//! together with 1, admit no integer relation. That condition is checked three
//! ways: each group's rotation must be ergodic, each cross-group quotient
//! rotation must be ergodic, and a bounded relation search over the group
//! rotation numbers must come up empty.

use crate::dynsys::{
    build_family, is_ergodic_rotation, quotient_transform, ErgodicVerdict, TransformFamily,
    TransformSpec,
};
use crate::engine::{correlation_average, AverageTrace, Schedule};
use crate::error::{domain, Result};
use crate::observables::{integrate, periodic_orbit_mean, Observable, QuadratureSpec};
use crate::unitmath::{
    rational_independence, ConstantKind, IndependenceVerdict, UnitPoint, DEFAULT_BOUND, DEFAULT_TOL,
};

/// Largest number of coefficient vectors the joint relation search may visit.
const JOINT_SEARCH_VECTORS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Zero-based member indices sharing one map.
    GroupIntegral {
        indices: Vec<usize>,
        value: f64,
    },
    SingleIntegral {
        index: usize,
        value: f64,
    },
    PeriodicMean {
        k: u64,
        value: f64,
    },
}

impl Factor {
    pub fn value(&self) -> f64 {
        match self {
            Factor::GroupIntegral { value, .. }
            | Factor::SingleIntegral { value, .. }
            | Factor::PeriodicMean { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub derivation: Vec<Factor>,
    pub applicable: bool,
    pub caveats: Vec<String>,
}

impl Prediction {
    fn from_factors(derivation: Vec<Factor>) -> Self {
        let value = derivation.iter().map(Factor::value).product();
        Prediction {
            value,
            derivation,
            applicable: true,
            caveats: Vec::new(),
        }
    }

    fn refuse(&mut self, caveat: String) {
        self.applicable = false;
        self.caveats.push(caveat);
    }

    /// Replaces the predicted value, e.g. for a negative control.
    pub fn overridden(mut self, value: f64) -> Self {
        self.caveats.push(format!(
            "predicted value overridden from {} to {value}",
            self.value
        ));
        self.value = value;
        self
    }
}

/// Space average of one observable: the exact value when known.
fn space_average(f: &Observable) -> Result<f64> {
    match f.exact_integral() {
        Some(v) => Ok(v),
        None => integrate(std::slice::from_ref(f), &QuadratureSpec::default()),
    }
}

/// Ergodicity of `a ∘ b⁻¹`, decided symbolically where possible.
fn quotient_verdict(a: &TransformSpec, b: &TransformSpec) -> ErgodicVerdict {
    let q = quotient_transform(a, b);
    if q.precision_warning {
        // the exact difference of surds over distinct radicands is irrational
        if let (ConstantKind::Surd { m: m1, .. }, ConstantKind::Surd { m: m2, .. }) =
            (*a.angle().kind(), *b.angle().kind())
        {
            if m1 != m2 {
                return ErgodicVerdict::Ergodic;
            }
        }
    }
    is_ergodic_rotation(&q.spec, DEFAULT_BOUND)
}

fn joint_search_bound(groups: usize) -> u32 {
    (1..=DEFAULT_BOUND)
        .rev()
        .find(|b| {
            (2 * *b as u64 + 1)
                .checked_pow(groups as u32)
                .is_some_and(|v| v <= JOINT_SEARCH_VECTORS)
        })
        .unwrap_or(1)
}

fn check_hypotheses(fam: &TransformFamily, pred: &mut Prediction) {
    let groups = fam.equality_partition();
    let reps: Vec<&TransformSpec> = groups.iter().map(|g| &fam.members()[g[0]]).collect();

    for (g, rep) in groups.iter().zip(&reps) {
        match is_ergodic_rotation(rep, DEFAULT_BOUND) {
            ErgodicVerdict::Periodic(q) => pred.refuse(format!(
                "member {} ({rep}) is periodic with order {q}, so its time averages need not equal space averages",
                g[0] + 1
            )),
            ErgodicVerdict::UndeterminedUpToBound(b) => pred.caveats.push(format!(
                "member {} ({rep}): no rational relation up to bound {b}; ergodicity assumed",
                g[0] + 1
            )),
            ErgodicVerdict::Ergodic => {}
        }
    }

    if groups.len() < 2 {
        return;
    }
    pred.caveats.push(
        "irreducibility is not checked; ergodic cross-group quotients and a bounded relation search stand in for it"
            .to_string(),
    );
    for gi in 0..groups.len() {
        for gj in gi + 1..groups.len() {
            for &i in &groups[gi] {
                for &j in &groups[gj] {
                    let (a, b) = (&fam.members()[i], &fam.members()[j]);
                    let (lo, hi) = (i.min(j) + 1, i.max(j) + 1);
                    match quotient_verdict(a, b) {
                        ErgodicVerdict::Periodic(q) => pred.refuse(format!(
                            "pair ({lo},{hi}): quotient {a}∘{b}⁻¹ is periodic with order {q}"
                        )),
                        ErgodicVerdict::UndeterminedUpToBound(bd) => pred.caveats.push(format!(
                            "pair ({lo},{hi}): quotient ergodicity undetermined up to bound {bd}"
                        )),
                        ErgodicVerdict::Ergodic => {}
                    }
                }
            }
        }
    }

    if pred.applicable {
        let angles: Vec<_> = reps.iter().map(|r| r.angle()).collect();
        let bound = joint_search_bound(angles.len());
        if let Ok(IndependenceVerdict::Dependent { relation }) =
            rational_independence(&angles, bound, DEFAULT_TOL)
        {
            let members: Vec<String> = groups.iter().map(|g| (g[0] + 1).to_string()).collect();
            pred.refuse(format!(
                "rotation numbers of members ({}) satisfy the integer relation {relation:?}",
                members.join(",")
            ));
        }
    }
}

/// Limit of the diagonal average of `fs` along `fam`, optionally with a
/// periodic factor `g(S^n x0)`.
pub fn predict(
    fam: &TransformFamily,
    fs: &[Observable],
    periodic: Option<(&Observable, &TransformSpec, UnitPoint)>,
) -> Result<Prediction> {
    if fs.len() != fam.len() {
        return domain(format!(
            "family has {} members but {} observables were given",
            fam.len(),
            fs.len()
        ));
    }
    let mut factors = Vec::new();
    for group in fam.equality_partition() {
        if let [index] = group[..] {
            factors.push(Factor::SingleIntegral {
                index,
                value: space_average(&fs[index])?,
            });
        } else {
            let members: Vec<Observable> = group.iter().map(|&i| fs[i].clone()).collect();
            let value = integrate(&members, &QuadratureSpec::default())?;
            factors.push(Factor::GroupIntegral {
                indices: group.clone(),
                value,
            });
        }
    }
    if let Some((g, s, x0)) = periodic {
        let value = periodic_orbit_mean(g, s, x0)?;
        let k = s
            .finite_order()
            .expect("periodic_orbit_mean checked the order");
        factors.push(Factor::PeriodicMean { k, value });
    }
    let mut pred = Prediction::from_factors(factors);
    check_hypotheses(fam, &mut pred);
    Ok(pred)
}

/// Limit of `(1/N) sum mu(T_1^{-n} A_1 ∩ ... ∩ T_d^{-n} A_d ∩ C)`.
pub fn predict_intersection(
    transforms: &[TransformSpec],
    moving: &[Observable],
    fixed: &Observable,
) -> Result<Prediction> {
    let fam = build_family(transforms.to_vec())?;
    let mut pred = predict(&fam, moving, None)?;
    let value = space_average(fixed)?;
    pred.derivation.push(Factor::SingleIntegral {
        index: moving.len(),
        value,
    });
    pred.value *= value;
    Ok(pred)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub pass: bool,
    pub predicted: f64,
    pub measured: f64,
    pub final_error: f64,
    pub tail: f64,
    pub tolerance: f64,
}

pub fn compare(pred: &Prediction, trace: &AverageTrace, tol: f64) -> Result<ComparisonReport> {
    if !pred.applicable {
        return domain(format!(
            "prediction is not applicable: {}",
            pred.caveats.join("; ")
        ));
    }
    let measured = trace.final_value();
    let final_error = (measured - pred.value).abs();
    Ok(ComparisonReport {
        pass: final_error <= tol,
        predicted: pred.value,
        measured,
        final_error,
        tail: trace.est_tail(),
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgodicityVerdict {
    ConsistentWithErgodic,
    NotErgodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub measured: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub pairs: Vec<PairReport>,
    pub verdict: ErgodicityVerdict,
}

/// Cesàro correlations `mu(T^{-n} A ∩ B)` against `mu(A) mu(B)` for each pair.
/// One failing pair refutes ergodicity; passing pairs only support it.
pub fn ergodicity_report(
    t: &TransformSpec,
    pairs: &[(Observable, Observable)],
    s: &Schedule,
    tol: f64,
) -> Result<ErgodicityReport> {
    let mut out = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (Some(ia), Some(ib)) = (a.indicator_bounds(), b.indicator_bounds()) else {
            return domain("ergodicity_report needs indicator observables");
        };
        let measured = correlation_average(t, a, b, s)?.final_value();
        let expected = (ia.1 - ia.0) * (ib.1 - ib.0);
        out.push(PairReport {
            a: ia,
            b: ib,
            measured,
            expected,
            pass: (measured - expected).abs() <= tol,
        });
    }
    let verdict = if out.iter().all(|p| p.pass) {
        ErgodicityVerdict::ConsistentWithErgodic
    } else {
        ErgodicityVerdict::NotErgodic
    };
    Ok(ErgodicityReport {
        pairs: out,
        verdict,
    })
}
