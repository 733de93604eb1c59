//! The built-in verification suite: twelve checks of the simulator against
//! closed-form limits and exact identities.

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dynsys::{build_family, TransformSpec};
use crate::engine::{run_chunked, AverageTrace, Job, PeriodicFactor, Schedule, DEFAULT_N_MAX};
use crate::observables::{integrate, Observable, QuadratureSpec, TrigTerm};
use crate::oracle::{ergodicity_report, predict, ErgodicityVerdict};
use crate::runner::trace_csv;
use crate::unitmath::{
    frac, rational_independence, shifted_frac_closed_form, sum_shifted_frac, IndependenceVerdict,
    ScalarConstant, UnitPoint,
};
use crate::Result;

pub const TOL_PRODUCT_LIMIT: f64 = 2e-3;
pub const TOL_BIRKHOFF: f64 = 1e-3;
pub const TOL_IDENTITY: f64 = 1e-12;
pub const TOL_INTERSECTION: f64 = 5e-3;
pub const TOL_CROSS_VALIDATION: f64 = 5e-3;
pub const TOL_GROUP_COLLAPSE: f64 = 1e-12;
pub const TOL_WORKERS: f64 = 1e-13;
pub const TOL_INDEPENDENCE: f64 = 1e-9;
pub const TOL_QUADRATURE: f64 = 1e-12;

const SEED: u64 = 0x5eed_2024;
const CROSS_VALIDATION_JOBS: usize = 20;
const COLLAPSE_PAIRS: usize = 50;
const IDENTITY_POINTS: usize = 10_000;
const WORKER_COUNTS: [usize; 4] = [1, 2, 4, 8];

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "distinct rotations, frac x frac"),
    (2, "repeated rotation, frac x frac"),
    (3, "periodic factor"),
    (4, "Birkhoff average of frac"),
    (5, "shifted fractional-part identity"),
    (6, "correlation and identity control"),
    (7, "triple intersection"),
    (8, "oracle cross-validation"),
    (9, "group collapse"),
    (10, "worker-count determinism"),
    (11, "independence verdicts"),
    (12, "quadrature"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    /// Orbit length for the simulated criteria.
    pub n_max: u64,
    /// Multiplies the statistical tolerances; exact checks are never relaxed.
    pub tol_scale: f64,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_max: DEFAULT_N_MAX,
            tol_scale: 1.0,
            workers: 1,
        }
    }
}

impl SuiteConfig {
    pub fn quick() -> Self {
        SuiteConfig {
            n_max: 100_000,
            tol_scale: 3.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRow {
    pub id: u32,
    pub name: &'static str,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CriterionRow {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} measured={:<22} expected={:<22} tol={:e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            format!("{:.15}", self.measured),
            format!("{:.15}", self.expected),
            self.tolerance,
            self.detail
        )
    }
}

fn name_of(id: u32) -> &'static str {
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown")
}

/// Several cases checked against one tolerance; the row shows the worst.
struct Cases {
    worst: Option<(f64, f64, String)>,
    all_pass: bool,
}

impl Cases {
    fn new() -> Self {
        Cases {
            worst: None,
            all_pass: true,
        }
    }

    fn push(&mut self, measured: f64, expected: f64, tol: f64, label: String) {
        let err = (measured - expected).abs();
        self.all_pass &= err <= tol;
        let worse = match &self.worst {
            Some((m, e, _)) => err > (m - e).abs(),
            None => true,
        };
        if worse {
            self.worst = Some((measured, expected, label));
        }
    }

    fn row(self, id: u32, tol: f64, count: usize) -> CriterionRow {
        let (measured, expected, label) = self.worst.expect("at least one case");
        CriterionRow {
            id,
            name: name_of(id),
            measured,
            expected,
            tolerance: tol,
            pass: self.all_pass,
            detail: format!(
                "worst of {count}: {label}, error {:.3e}",
                (measured - expected).abs()
            ),
        }
    }
}

fn rot_sqrt(m: u64) -> TransformSpec {
    TransformSpec::rotation(ScalarConstant::sqrt(m).expect("small radicands are valid"))
}

fn schedule(cfg: &SuiteConfig) -> Result<Schedule> {
    Schedule::default_to(cfg.n_max)
}

fn product_job(maps: Vec<TransformSpec>, fs: Vec<Observable>, x0: f64) -> Result<Job> {
    Job::multiple(build_family(maps)?, fs, UnitPoint::new(x0)?, None)
}

fn periodic_job(k: u64, x0: f64) -> Result<Job> {
    let pf = PeriodicFactor::new(Observable::frac_part(), TransformSpec::finite_rotation(k)?)?;
    Job::multiple(
        build_family(vec![rot_sqrt(2)])?,
        vec![Observable::frac_part()],
        UnitPoint::new(x0)?,
        Some(pf),
    )
}

fn periodic_expected(k: u64, x0: f64) -> f64 {
    let kf = k as f64;
    frac(kf * x0).expect("finite") / (2.0 * kf) + (kf - 1.0) / (4.0 * kf)
}

const DISTINCT_X0: [f64; 3] = [0.0, 0.3, 0.77];
const PERIODIC_K: [u64; 3] = [2, 3, 5];
const PERIODIC_X0: [f64; 2] = [0.1, 0.37];

/// Jobs of criteria 1 to 3 with their closed-form limits.
fn product_jobs(id: u32) -> Result<Vec<(String, Job, f64)>> {
    let frac2 = || vec![Observable::frac_part(), Observable::frac_part()];
    let mut out = Vec::new();
    match id {
        1 => {
            for x0 in DISTINCT_X0 {
                out.push((
                    format!("x0={x0}"),
                    product_job(vec![rot_sqrt(2), rot_sqrt(3)], frac2(), x0)?,
                    0.25,
                ));
            }
        }
        2 => {
            for x0 in DISTINCT_X0 {
                out.push((
                    format!("x0={x0}"),
                    product_job(vec![rot_sqrt(2), rot_sqrt(2)], frac2(), x0)?,
                    1.0 / 3.0,
                ));
            }
        }
        3 => {
            for k in PERIODIC_K {
                for x0 in PERIODIC_X0 {
                    out.push((
                        format!("k={k} x0={x0}"),
                        periodic_job(k, x0)?,
                        periodic_expected(k, x0),
                    ));
                }
            }
        }
        _ => unreachable!("only criteria 1 to 3 are product jobs"),
    }
    Ok(out)
}

fn simulated_cases(id: u32, cfg: &SuiteConfig, tol: f64) -> Result<CriterionRow> {
    let sched = schedule(cfg)?;
    let jobs = product_jobs(id)?;
    let mut cases = Cases::new();
    for (label, job, expected) in &jobs {
        let trace = run_chunked(job, &sched, cfg.workers)?;
        cases.push(
            trace.final_value(),
            *expected,
            tol,
            format!("{label} tail {:.1e}", trace.est_tail()),
        );
    }
    Ok(cases.row(id, tol, jobs.len()))
}

fn single(id: u32, trace: &AverageTrace, expected: f64, tol: f64, extra: &str) -> CriterionRow {
    let measured = trace.final_value();
    CriterionRow {
        id,
        name: name_of(id),
        measured,
        expected,
        tolerance: tol,
        pass: (measured - expected).abs() <= tol,
        detail: format!(
            "N={} tail {:.1e}{extra}",
            trace.schedule.n_max(),
            trace.est_tail()
        ),
    }
}

fn birkhoff(cfg: &SuiteConfig) -> Result<CriterionRow> {
    let tol = TOL_BIRKHOFF * cfg.tol_scale;
    let job = product_job(vec![rot_sqrt(2)], vec![Observable::frac_part()], 0.3)?;
    let trace = run_chunked(&job, &schedule(cfg)?, cfg.workers)?;
    Ok(single(4, &trace, 0.5, tol, ""))
}

fn shifted_identity() -> Result<CriterionRow> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 5);
    let mut cases = Cases::new();
    for _ in 0..IDENTITY_POINTS {
        let x: f64 = rng.gen_range(0.0..=1.0);
        for k in 1..=64u32 {
            let lhs = sum_shifted_frac(x, k)?;
            cases.push(
                lhs,
                shifted_frac_closed_form(x, k),
                TOL_IDENTITY,
                format!("x={x} k={k}"),
            );
        }
    }
    Ok(cases.row(5, TOL_IDENTITY, IDENTITY_POINTS * 64))
}

fn correlation(cfg: &SuiteConfig) -> Result<CriterionRow> {
    let tol = TOL_INTERSECTION * cfg.tol_scale;
    let sched = schedule(cfg)?;
    let a = Observable::indicator(0.0, 0.3)?;
    let b = Observable::indicator(0.2, 0.7)?;
    let job = Job::correlation(rot_sqrt(2), &a, &b)?;
    let trace = run_chunked(&job, &sched, cfg.workers)?;

    // [0, 1/2) against itself separates the identity from a mixing average
    let half = Observable::indicator(0.0, 0.5)?;
    let control = ergodicity_report(
        &TransformSpec::identity(),
        &[(half.clone(), half)],
        &sched,
        tol,
    )?;
    let refuted = control.verdict == ErgodicityVerdict::NotErgodic;
    let mut row = single(
        6,
        &trace,
        0.15,
        tol,
        &format!(
            "; identity control measured {} vs {} ({})",
            control.pairs[0].measured,
            control.pairs[0].expected,
            if refuted {
                "refuted as expected"
            } else {
                "NOT refuted"
            }
        ),
    );
    row.pass &= refuted && control.pairs[0].measured == 0.5;
    Ok(row)
}

fn triple(cfg: &SuiteConfig) -> Result<CriterionRow> {
    let tol = TOL_INTERSECTION * cfg.tol_scale;
    let half = Observable::indicator(0.0, 0.5)?;
    let job = Job::triple_intersection(rot_sqrt(2), rot_sqrt(3), &half, &half, &half)?;
    let trace = run_chunked(&job, &schedule(cfg)?, cfg.workers)?;
    Ok(single(7, &trace, 0.125, tol, ""))
}

fn random_trig(rng: &mut StdRng) -> Result<Observable> {
    let n = rng.gen_range(1..=3);
    let terms = (0..n)
        .map(|_| TrigTerm {
            freq: rng.gen_range(0..=5),
            cos_amp: rng.gen_range(-1.0..=1.0),
            sin_amp: rng.gen_range(-1.0..=1.0),
        })
        .collect();
    Observable::trig_poly(terms)
}

fn cross_validation(cfg: &SuiteConfig) -> Result<CriterionRow> {
    let tol = TOL_CROSS_VALIDATION * cfg.tol_scale;
    let sched = schedule(cfg)?;
    let pool = [2u64, 3, 5];
    let mut rng = StdRng::seed_from_u64(SEED ^ 8);
    let mut cases = Cases::new();
    let mut refused = 0;
    for j in 0..CROSS_VALIDATION_JOBS {
        let d = rng.gen_range(1..=3);
        let radicands: Vec<u64> = (0..d).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let fs = (0..d)
            .map(|_| random_trig(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        let x0 = rng.gen_range(0.0..1.0);
        let family = build_family(radicands.iter().map(|&m| rot_sqrt(m)).collect())?;
        let pred = predict(&family, &fs, None)?;
        if !pred.applicable {
            refused += 1;
        }
        let job = Job::multiple(family, fs, UnitPoint::new(x0)?, None)?;
        let trace = run_chunked(&job, &sched, cfg.workers)?;
        cases.push(
            trace.final_value(),
            pred.value,
            tol,
            format!("job {j} sqrt{radicands:?}"),
        );
    }
    let mut row = cases.row(8, tol, CROSS_VALIDATION_JOBS);
    if refused > 0 {
        row.pass = false;
        row.detail
            .push_str(&format!("; oracle refused {refused} jobs"));
    }
    Ok(row)
}

fn random_observable(rng: &mut StdRng) -> Result<Observable> {
    match rng.gen_range(0..5) {
        0 => Ok(Observable::frac_part()),
        1 => {
            let a: f64 = rng.gen_range(0.0..0.9);
            let b = rng.gen_range(a + 0.05..=1.0);
            Observable::indicator(a, b)
        }
        2 => random_trig(rng),
        3 => {
            let n = rng.gen_range(2..=4);
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            Observable::piecewise_linear(
                xs.into_iter()
                    .map(|x| (x, rng.gen_range(-1.0..=1.0)))
                    .collect(),
            )
        }
        _ => Observable::power_of_frac(rng.gen_range(1..=4)),
    }
}

fn group_collapse() -> Result<CriterionRow> {
    let t = rot_sqrt(2);
    let pair_family = build_family(vec![t.clone(), t.clone()])?;
    let one_family = build_family(vec![t])?;
    let mut rng = StdRng::seed_from_u64(SEED ^ 9);
    let mut cases = Cases::new();
    for j in 0..COLLAPSE_PAIRS {
        let f1 = random_observable(&mut rng)?;
        let f2 = random_observable(&mut rng)?;
        let joint = predict(&pair_family, &[f1.clone(), f2.clone()], None)?.value;
        let merged = predict(&one_family, &[Observable::product(&f1, &f2)], None)?.value;
        cases.push(joint, merged, TOL_GROUP_COLLAPSE, format!("pair {j}"));
    }
    Ok(cases.row(9, TOL_GROUP_COLLAPSE, COLLAPSE_PAIRS))
}

fn worker_consistency(cfg: &SuiteConfig) -> Result<CriterionRow> {
    let sched = schedule(cfg)?;
    let mut worst = 0.0f64;
    let mut worst_label = String::new();
    let mut identical = true;
    let mut jobs = 0;
    for id in 1..=3 {
        for (label, job, _) in product_jobs(id)? {
            jobs += 1;
            let base = run_chunked(&job, &sched, WORKER_COUNTS[0])?;
            for &w in &WORKER_COUNTS[1..] {
                let other = run_chunked(&job, &sched, w)?;
                for (x, y) in base.values.iter().zip(&other.values) {
                    let d = (x - y).abs();
                    if d > worst {
                        worst = d;
                        worst_label = format!("max diff at criterion {id} {label} workers={w}");
                    }
                }
            }
            let again = run_chunked(&job, &sched, WORKER_COUNTS[0])?;
            identical &= trace_csv(&base) == trace_csv(&again);
        }
    }
    Ok(CriterionRow {
        id: 10,
        name: name_of(10),
        measured: worst,
        expected: 0.0,
        tolerance: TOL_WORKERS,
        pass: worst <= TOL_WORKERS && identical,
        detail: format!(
            "{jobs} jobs x workers {WORKER_COUNTS:?}; {}; repeat runs {}",
            if worst_label.is_empty() {
                "all checkpoints bitwise equal"
            } else {
                &worst_label
            },
            if identical {
                "byte-identical"
            } else {
                "DIFFER"
            }
        ),
    })
}

fn independence() -> Result<CriterionRow> {
    let r = |p, q| ScalarConstant::rational(p, q).expect("valid rational");
    let s = |m| ScalarConstant::sqrt(m).expect("valid radicand");
    let cases = [
        (
            "(1/2)",
            vec![r(1, 2)],
            IndependenceVerdict::Dependent {
                relation: vec![1, -2],
            },
        ),
        (
            "(sqrt2, sqrt8)",
            vec![s(2), s(8)],
            IndependenceVerdict::Dependent {
                relation: vec![0, 2, -1],
            },
        ),
        (
            "(sqrt2, sqrt3)",
            vec![s(2), s(3)],
            IndependenceVerdict::IndependentUpToBound { bound: 10 },
        ),
    ];
    let mut matched = 0;
    let mut detail = String::new();
    for (label, alphas, want) in &cases {
        let got = rational_independence(alphas, 10, TOL_INDEPENDENCE)?;
        if &got == want {
            matched += 1;
        }
        let _ = write!(detail, "{label} -> {got:?}; ");
    }
    Ok(CriterionRow {
        id: 11,
        name: name_of(11),
        measured: matched as f64,
        expected: cases.len() as f64,
        tolerance: 0.0,
        pass: matched == cases.len(),
        detail: detail.trim_end_matches("; ").to_string(),
    })
}

fn quadrature() -> Result<CriterionRow> {
    let q = QuadratureSpec::default();
    let mut cases = Cases::new();
    let first = integrate(&[Observable::frac_part()], &q)?;
    cases.push(first, 0.5, TOL_QUADRATURE, "int frac".into());
    let second = integrate(&[Observable::frac_part(), Observable::frac_part()], &q)?;
    cases.push(second, 1.0 / 3.0, TOL_QUADRATURE, "int frac^2".into());
    Ok(cases.row(12, TOL_QUADRATURE, 2))
}

/// Runs one criterion by number.
pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> Result<CriterionRow> {
    match id {
        1..=3 => simulated_cases(id, cfg, TOL_PRODUCT_LIMIT * cfg.tol_scale),
        4 => birkhoff(cfg),
        5 => shifted_identity(),
        6 => correlation(cfg),
        7 => triple(cfg),
        8 => cross_validation(cfg),
        9 => group_collapse(),
        10 => worker_consistency(cfg),
        11 => independence(),
        12 => quadrature(),
        _ => crate::error::domain(format!("no criterion {id}; valid ids are 1 to 12")),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<CriterionRow>> {
    CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(*id, cfg))
        .collect()
}

pub fn format_table(rows: &[CriterionRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.line());
        out.push('\n');
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", rows.len());
    out
}
