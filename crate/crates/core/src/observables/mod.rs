//! Bounded observables on the circle with known discontinuities.

mod quadrature;

use std::f64::consts::TAU;

pub use quadrature::{gauss_legendre, integrate, QuadratureSpec, MAX_FACTORS, PANEL_BUDGET};

use crate::dynsys::TransformSpec;
use crate::error::{domain, Result};
use crate::unitmath::{CompensatedSum, UnitPoint};

/// `cos_amp * cos(2 pi freq x) + sin_amp * sin(2 pi freq x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub freq: i32,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind {
    /// `x -> {x}`.
    FracPart,
    /// Indicator of `[a, b)`.
    Indicator {
        a: f64,
        b: f64,
    },
    TrigPoly(Vec<TrigTerm>),
    /// Linear interpolation through `(position, value)` knots, wrapped
    /// periodically across `0`.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// `x -> {x}^p`.
    PowerOfFrac(u32),
    /// Pointwise product of observables that have no closed symbolic product.
    Product(Vec<Observable>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    kind: ObservableKind,
    breakpoints: Vec<f64>,
    exact_integral: Option<f64>,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Observable {
    pub fn frac_part() -> Self {
        Observable {
            kind: ObservableKind::FracPart,
            breakpoints: vec![0.0],
            exact_integral: Some(0.5),
        }
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return domain(format!("indicator needs 0 <= a < b <= 1, got [{a}, {b})"));
        }
        let breakpoints = if a == 0.0 && b == 1.0 {
            Vec::new()
        } else {
            sorted_unique(vec![a, if b == 1.0 { 0.0 } else { b }])
        };
        Ok(Observable {
            kind: ObservableKind::Indicator { a, b },
            breakpoints,
            exact_integral: Some(b - a),
        })
    }

    pub fn trig_poly(terms: Vec<TrigTerm>) -> Result<Self> {
        if terms.is_empty() {
            return domain("trig_poly needs at least one term");
        }
        if terms
            .iter()
            .any(|t| !(t.cos_amp.is_finite() && t.sin_amp.is_finite()))
        {
            return domain("trig_poly amplitudes must be finite");
        }
        let mean = terms
            .iter()
            .filter(|t| t.freq == 0)
            .map(|t| t.cos_amp)
            .sum();
        Ok(Observable {
            kind: ObservableKind::TrigPoly(terms),
            breakpoints: Vec::new(),
            exact_integral: Some(mean),
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::trig_poly(vec![TrigTerm {
            freq: 0,
            cos_amp: c,
            sin_amp: 0.0,
        }])
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return domain("piecewise_linear needs at least one knot");
        }
        if knots
            .iter()
            .any(|(p, v)| !(v.is_finite() && (0.0..=1.0).contains(p)))
        {
            return domain("piecewise_linear knots need positions in [0, 1] and finite values");
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return domain("piecewise_linear knot positions must be strictly increasing");
        }
        let (first, last) = (knots[0], knots[knots.len() - 1]);
        let breakpoints = if knots.len() > 1 && first.0 == 0.0 && last.0 == 1.0 && first.1 != last.1
        {
            vec![0.0]
        } else {
            Vec::new()
        };
        // trapezoids between knots plus the wrap segment from last to first + 1
        let mut integral = CompensatedSum::new();
        for w in knots.windows(2) {
            integral.add(0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1));
        }
        integral.add(0.5 * (1.0 - last.0 + first.0) * (last.1 + first.1));
        Ok(Observable {
            kind: ObservableKind::PiecewiseLinear(knots),
            breakpoints,
            exact_integral: Some(integral.value()),
        })
    }

    pub fn power_of_frac(p: u32) -> Result<Self> {
        if p == 0 {
            return domain("power_of_frac needs p >= 1");
        }
        Ok(Observable {
            kind: ObservableKind::PowerOfFrac(p),
            breakpoints: vec![0.0],
            exact_integral: Some(1.0 / (p as f64 + 1.0)),
        })
    }

    /// Pointwise product, kept symbolic where the kinds close under
    /// multiplication and wrapped otherwise.
    pub fn product(a: &Observable, b: &Observable) -> Observable {
        use ObservableKind::*;
        let symbolic = match (&a.kind, &b.kind) {
            (FracPart, FracPart) => Self::power_of_frac(2).ok(),
            (FracPart, PowerOfFrac(p)) | (PowerOfFrac(p), FracPart) => {
                Self::power_of_frac(p + 1).ok()
            }
            (PowerOfFrac(p), PowerOfFrac(q)) => Self::power_of_frac(p + q).ok(),
            (TrigPoly(x), TrigPoly(y)) => Self::trig_poly(trig_product(x, y)).ok(),
            _ => None,
        };
        symbolic.unwrap_or_else(|| {
            let mut factors = Vec::new();
            for f in [a, b] {
                match &f.kind {
                    Product(inner) => factors.extend(inner.iter().cloned()),
                    _ => factors.push(f.clone()),
                }
            }
            let breakpoints = sorted_unique(
                factors
                    .iter()
                    .flat_map(|f| f.breakpoints.iter().copied())
                    .collect(),
            );
            Observable {
                kind: Product(factors),
                breakpoints,
                exact_integral: None,
            }
        })
    }

    pub fn kind(&self) -> &ObservableKind {
        &self.kind
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact_integral
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, ObservableKind::Indicator { .. })
    }

    /// The interval `[a, b)` of an indicator.
    pub fn indicator_bounds(&self) -> Option<(f64, f64)> {
        match self.kind {
            ObservableKind::Indicator { a, b } => Some((a, b)),
            _ => None,
        }
    }

    /// Discontinuities plus kinks; quadrature panels must end at each.
    pub(crate) fn quadrature_nodes(&self) -> Vec<f64> {
        match &self.kind {
            ObservableKind::PiecewiseLinear(knots) => {
                let mut v: Vec<f64> = knots.iter().map(|k| k.0).collect();
                v.extend_from_slice(&self.breakpoints);
                v
            }
            ObservableKind::Indicator { a, b } => vec![*a, *b],
            ObservableKind::Product(fs) => fs.iter().flat_map(|f| f.quadrature_nodes()).collect(),
            _ => self.breakpoints.clone(),
        }
    }

    pub fn evaluate(&self, x: UnitPoint) -> f64 {
        self.evaluate_at(x.value())
    }

    /// Value at `x` in `[0, 1)`; at a breakpoint the right limit is taken.
    pub fn evaluate_at(&self, x: f64) -> f64 {
        match &self.kind {
            ObservableKind::FracPart => x,
            ObservableKind::Indicator { a, b } => {
                if *a <= x && x < *b {
                    1.0
                } else {
                    0.0
                }
            }
            ObservableKind::TrigPoly(terms) => terms
                .iter()
                .map(|t| {
                    if t.freq == 0 {
                        t.cos_amp
                    } else {
                        let (s, c) = (TAU * t.freq as f64 * x).sin_cos();
                        t.cos_amp * c + t.sin_amp * s
                    }
                })
                .sum(),
            ObservableKind::PiecewiseLinear(knots) => eval_piecewise(knots, x),
            ObservableKind::PowerOfFrac(p) => x.powi(*p as i32),
            ObservableKind::Product(fs) => fs.iter().map(|f| f.evaluate_at(x)).product(),
        }
    }

    /// An interval containing every value of the observable.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            ObservableKind::FracPart | ObservableKind::PowerOfFrac(_) => (0.0, 1.0),
            ObservableKind::Indicator { a, b } => {
                if *a == 0.0 && *b == 1.0 {
                    (1.0, 1.0)
                } else {
                    (0.0, 1.0)
                }
            }
            ObservableKind::TrigPoly(terms) => {
                let mean: f64 = terms
                    .iter()
                    .filter(|t| t.freq == 0)
                    .map(|t| t.cos_amp)
                    .sum();
                let radius: f64 = terms
                    .iter()
                    .filter(|t| t.freq != 0)
                    .map(|t| t.cos_amp.hypot(t.sin_amp))
                    .sum();
                (mean - radius, mean + radius)
            }
            ObservableKind::PiecewiseLinear(knots) => knots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
                    (lo.min(k.1), hi.max(k.1))
                }),
            ObservableKind::Product(fs) => {
                fs.iter().map(|f| f.bounds()).fold((1.0, 1.0), interval_mul)
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs())
    }
}

pub fn interval_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let c = [x.0 * y.0, x.0 * y.1, x.1 * y.0, x.1 * y.1];
    (
        c.iter().copied().fold(f64::INFINITY, f64::min),
        c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

fn eval_piecewise(knots: &[(f64, f64)], x: f64) -> f64 {
    let n = knots.len();
    if n == 1 {
        return knots[0].1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (left, right) = if i == 0 {
        let l = knots[n - 1];
        ((l.0 - 1.0, l.1), knots[0])
    } else if i == n {
        let r = knots[0];
        (knots[n - 1], (r.0 + 1.0, r.1))
    } else {
        (knots[i - 1], knots[i])
    };
    let span = right.0 - left.0;
    if span <= 0.0 {
        return right.1;
    }
    left.1 + (right.1 - left.1) * (x - left.0) / span
}

/// Product-to-sum expansion, collected by non-negative frequency.
fn trig_product(x: &[TrigTerm], y: &[TrigTerm]) -> Vec<TrigTerm> {
    let mut out: Vec<TrigTerm> = Vec::new();
    let mut push = |freq: i32, c: f64, s: f64| {
        let (freq, s) = if freq < 0 { (-freq, -s) } else { (freq, s) };
        let s = if freq == 0 { 0.0 } else { s };
        match out.iter_mut().find(|t| t.freq == freq) {
            Some(t) => {
                t.cos_amp += c;
                t.sin_amp += s;
            }
            None => out.push(TrigTerm {
                freq,
                cos_amp: c,
                sin_amp: s,
            }),
        }
    };
    for a in x {
        // a frequency-0 sine term is identically zero
        let (ac, as_) = (a.cos_amp, if a.freq == 0 { 0.0 } else { a.sin_amp });
        for b in y {
            let (bc, bs) = (b.cos_amp, if b.freq == 0 { 0.0 } else { b.sin_amp });
            let (sum, diff) = (a.freq + b.freq, a.freq - b.freq);
            // cos A cos B = (cos(A-B) + cos(A+B)) / 2
            push(diff, 0.5 * ac * bc, 0.0);
            push(sum, 0.5 * ac * bc, 0.0);
            // sin A sin B = (cos(A-B) - cos(A+B)) / 2
            push(diff, 0.5 * as_ * bs, 0.0);
            push(sum, -0.5 * as_ * bs, 0.0);
            // sin A cos B = (sin(A+B) + sin(A-B)) / 2
            push(sum, 0.0, 0.5 * as_ * bc);
            push(diff, 0.0, 0.5 * as_ * bc);
            // cos A sin B = (sin(A+B) - sin(A-B)) / 2
            push(sum, 0.0, 0.5 * ac * bs);
            push(diff, 0.0, -0.5 * ac * bs);
        }
    }
    out.sort_by_key(|t| t.freq);
    out
}

/// `(1/k) sum_{r<k} g(S^r x)` for a map `S` of finite order `k`.
pub fn periodic_orbit_mean(g: &Observable, s: &TransformSpec, x: UnitPoint) -> Result<f64> {
    let Some(k) = s.finite_order() else {
        return domain(format!("{s} does not have finite order"));
    };
    let mut acc = CompensatedSum::new();
    for r in 0..k {
        acc.add(g.evaluate(s.apply(x, r)));
    }
    Ok(acc.value() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitmath::{shifted_frac_closed_form, ScalarConstant};
    use rand::{Rng, SeedableRng};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn pt(x: f64) -> UnitPoint {
        UnitPoint::new(x).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Observable::frac_part().evaluate(pt(0.3)), 0.3);
        assert_eq!(
            Observable::indicator(0.2, 0.7).unwrap().evaluate(pt(0.2)),
            1.0
        );
        assert_eq!(
            Observable::indicator(0.2, 0.7).unwrap().evaluate(pt(0.7)),
            0.0
        );
        assert_eq!(
            Observable::power_of_frac(2).unwrap().evaluate(pt(0.5)),
            0.25
        );
    }

    #[test]
    fn integrate_examples() {
        let frac = Observable::frac_part();
        assert!((integrate(std::slice::from_ref(&frac), &q()).unwrap() - 0.5).abs() <= 1e-12);
        assert!((integrate(&[frac.clone(), frac], &q()).unwrap() - 1.0 / 3.0).abs() <= 1e-12);
        let a = Observable::indicator(0.0, 0.3).unwrap();
        let b = Observable::indicator(0.2, 0.7).unwrap();
        assert!((integrate(&[a, b], &q()).unwrap() - 0.1).abs() <= 1e-14);
    }

    #[test]
    fn constructor_validation() {
        assert!(Observable::indicator(0.5, 0.5).is_err());
        assert!(Observable::indicator(-0.1, 0.5).is_err());
        assert!(Observable::indicator(0.1, 1.5).is_err());
        assert!(Observable::power_of_frac(0).is_err());
        assert!(Observable::trig_poly(vec![]).is_err());
        assert!(Observable::piecewise_linear(vec![(0.5, 1.0), (0.2, 0.0)]).is_err());
        assert!(Observable::piecewise_linear(vec![(0.5, f64::NAN)]).is_err());
    }

    #[test]
    fn breakpoints_include_wrap() {
        assert_eq!(Observable::frac_part().breakpoints(), &[0.0]);
        assert_eq!(
            Observable::indicator(0.2, 1.0).unwrap().breakpoints(),
            &[0.0, 0.2]
        );
        assert!(Observable::indicator(0.0, 1.0)
            .unwrap()
            .breakpoints()
            .is_empty());
        let saw = Observable::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(saw.breakpoints(), &[0.0]);
        let tent = Observable::piecewise_linear(vec![(0.25, 0.0), (0.75, 1.0)]).unwrap();
        assert!(tent.breakpoints().is_empty());
    }

    #[test]
    fn piecewise_linear_wraps() {
        let tent = Observable::piecewise_linear(vec![(0.25, 0.0), (0.75, 1.0)]).unwrap();
        assert!((tent.evaluate_at(0.5) - 0.5).abs() < 1e-15);
        // wrap segment from 0.75 (value 1) to 1.25 (value 0)
        assert!((tent.evaluate_at(0.0) - 0.5).abs() < 1e-15);
        assert!((tent.evaluate_at(0.9) - 0.7).abs() < 1e-15);
        assert!((tent.exact_integral().unwrap() - 0.5).abs() < 1e-15);
        let saw = Observable::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!((saw.evaluate_at(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quadrature_exactness() {
        let zero_mean = Observable::trig_poly(vec![
            TrigTerm {
                freq: 1,
                cos_amp: 0.7,
                sin_amp: -0.2,
            },
            TrigTerm {
                freq: 5,
                cos_amp: 0.1,
                sin_amp: 0.9,
            },
        ])
        .unwrap();
        assert!(integrate(&[zero_mean], &q()).unwrap().abs() <= 1e-14);
        let one = Observable::constant(1.0).unwrap();
        assert!((integrate(&[one], &q()).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn breakpoint_refinement_random_indicators() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(0.0..0.999);
            let b: f64 = rng.gen_range(a + 1e-6..=1.0);
            let f = Observable::indicator(a, b).unwrap();
            let got = integrate(&[f], &q()).unwrap();
            assert!((got - (b - a)).abs() <= 1e-14, "[{a},{b}): {got}");
        }
    }

    #[test]
    fn exact_integrals_cross_check() {
        let kinds = vec![
            Observable::frac_part(),
            Observable::indicator(0.13, 0.77).unwrap(),
            Observable::constant(2.5).unwrap(),
            Observable::trig_poly(vec![
                TrigTerm {
                    freq: 0,
                    cos_amp: 0.3,
                    sin_amp: 0.0,
                },
                TrigTerm {
                    freq: 3,
                    cos_amp: 1.0,
                    sin_amp: 0.5,
                },
            ])
            .unwrap(),
            Observable::piecewise_linear(vec![(0.1, 2.0), (0.4, -1.0), (0.9, 0.5)]).unwrap(),
            Observable::piecewise_linear(vec![(0.0, 1.0), (0.5, 0.0), (1.0, 3.0)]).unwrap(),
            Observable::power_of_frac(1).unwrap(),
            Observable::power_of_frac(5).unwrap(),
        ];
        for f in kinds {
            let exact = f.exact_integral().unwrap();
            let quad = integrate(std::slice::from_ref(&f), &q()).unwrap();
            assert!((exact - quad).abs() <= 1e-12, "{f:?}: {exact} vs {quad}");
        }
    }

    #[test]
    fn right_limit_is_deterministic_at_breakpoints() {
        let saw = Observable::piecewise_linear(vec![(0.0, 0.0), (0.5, 2.0), (1.0, 1.0)]).unwrap();
        assert_eq!(saw.evaluate_at(0.0), 0.0);
        assert_eq!(saw.evaluate_at(0.5), 2.0);
        let ind = Observable::indicator(0.3, 1.0).unwrap();
        assert_eq!(ind.evaluate_at(0.0), 0.0);
        assert_eq!(ind.evaluate_at(0.3), 1.0);
    }

    #[test]
    fn symbolic_products() {
        let frac = Observable::frac_part();
        let sq = Observable::product(&frac, &frac);
        assert_eq!(sq.kind(), &ObservableKind::PowerOfFrac(2));
        let f = Observable::trig_poly(vec![
            TrigTerm {
                freq: 0,
                cos_amp: 0.5,
                sin_amp: 0.0,
            },
            TrigTerm {
                freq: 2,
                cos_amp: 0.3,
                sin_amp: -0.4,
            },
        ])
        .unwrap();
        let g = Observable::trig_poly(vec![
            TrigTerm {
                freq: 1,
                cos_amp: -0.2,
                sin_amp: 0.6,
            },
            TrigTerm {
                freq: 3,
                cos_amp: 0.9,
                sin_amp: 0.1,
            },
        ])
        .unwrap();
        let fg = Observable::product(&f, &g);
        assert!(matches!(fg.kind(), ObservableKind::TrigPoly(_)));
        for i in 0..50 {
            let x = i as f64 / 50.0;
            let want = f.evaluate_at(x) * g.evaluate_at(x);
            assert!((fg.evaluate_at(x) - want).abs() < 1e-14);
        }
        let mixed = Observable::product(&f, &frac);
        assert!(matches!(mixed.kind(), ObservableKind::Product(_)));
        assert_eq!(mixed.breakpoints(), &[0.0]);
        assert!((mixed.evaluate_at(0.3) - 0.3 * f.evaluate_at(0.3)).abs() < 1e-15);
    }

    #[test]
    fn periodic_mean_examples() {
        let g = Observable::frac_part();
        let one = TransformSpec::finite_rotation(1).unwrap();
        assert!((periodic_orbit_mean(&g, &one, pt(0.4)).unwrap() - 0.4).abs() < 1e-15);
        let five = TransformSpec::finite_rotation(5).unwrap();
        assert!((periodic_orbit_mean(&g, &five, pt(0.37)).unwrap() - 0.57).abs() < 1e-14);
        for k in 1..=12u32 {
            let s = TransformSpec::finite_rotation(k as u64).unwrap();
            for x in [0.0, 0.1, 0.37, 0.999] {
                let got = periodic_orbit_mean(&g, &s, pt(x)).unwrap();
                let want = shifted_frac_closed_form(x, k) / k as f64;
                assert!((got - want).abs() < 1e-13, "k={k} x={x}");
            }
        }
        let irr = TransformSpec::rotation(ScalarConstant::sqrt(2).unwrap());
        assert!(periodic_orbit_mean(&g, &irr, pt(0.1)).is_err());
    }
}
