//! Executes a [`Scenario`] and writes its trace and report.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::dynsys::{build_family, TransformSpec};
use crate::engine::{run_chunked, AverageTrace, Job, PeriodicFactor};
use crate::oracle::{compare, predict, predict_intersection, ComparisonReport, Factor, Prediction};
use crate::scenario::{transform_to_json, Scenario, Workload};
use crate::unitmath::UnitPoint;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The oracle declined to predict; the run itself completed.
    NoPrediction,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::NoPrediction => 0,
            Status::Fail => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NoPrediction => "no_prediction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: AverageTrace,
    pub prediction: Prediction,
    pub comparison: Option<ComparisonReport>,
    pub status: Status,
    pub workers: usize,
}

fn periodic_map(k: u64) -> Result<TransformSpec> {
    TransformSpec::finite_rotation(k)
}

pub fn build_job(s: &Scenario) -> Result<Job> {
    let x0 = UnitPoint::new(s.x0)?;
    match &s.workload {
        Workload::Multiple {
            observables,
            periodic,
        } => {
            let family = build_family(s.family.clone())?;
            let pf = match periodic {
                Some(p) => Some(PeriodicFactor::new(p.g.clone(), periodic_map(p.k)?)?),
                None => None,
            };
            Job::multiple(family, observables.clone(), x0, pf)
        }
        Workload::Intersection { sets } => match (&s.family[..], &sets[..]) {
            ([t], [a, b]) => Job::correlation(t.clone(), a, b),
            ([t1, t2], [a, b, c]) => Job::triple_intersection(t1.clone(), t2.clone(), a, b, c),
            _ => crate::error::domain("intersection needs 1 map with 2 sets or 2 maps with 3 sets"),
        },
    }
}

/// The oracle's prediction for a scenario, with `expected` applied.
pub fn predict_scenario(s: &Scenario) -> Result<Prediction> {
    let pred = match &s.workload {
        Workload::Multiple {
            observables,
            periodic,
        } => {
            let family = build_family(s.family.clone())?;
            match periodic {
                Some(p) => {
                    let map = periodic_map(p.k)?;
                    predict(
                        &family,
                        observables,
                        Some((&p.g, &map, UnitPoint::new(s.x0)?)),
                    )?
                }
                None => predict(&family, observables, None)?,
            }
        }
        Workload::Intersection { sets } => {
            let (fixed, moving) = sets.split_last().expect("validated nonempty");
            predict_intersection(&s.family, moving, fixed)?
        }
    };
    Ok(match s.expected {
        Some(v) => pred.overridden(v),
        None => pred,
    })
}

/// Runs the scenario with `workers` threads, or the scenario's own count.
pub fn execute(s: &Scenario, workers: Option<usize>) -> Result<RunOutcome> {
    let workers = workers.unwrap_or(s.workers);
    let job = build_job(s)?;
    let schedule = s.schedule.build()?;
    let trace = run_chunked(&job, &schedule, workers)?;
    let prediction = predict_scenario(s)?;
    let (comparison, status) = if prediction.applicable {
        let c = compare(&prediction, &trace, s.tolerance)?;
        let status = if c.pass { Status::Pass } else { Status::Fail };
        (Some(c), status)
    } else {
        (None, Status::NoPrediction)
    };
    Ok(RunOutcome {
        trace,
        prediction,
        comparison,
        status,
        workers,
    })
}

/// `N,value,est_tail` rows; floats use the shortest round-trip form.
pub fn trace_csv(trace: &AverageTrace) -> String {
    let mut out = String::from("N,value,est_tail\n");
    for (n, v, tail) in trace.rows() {
        writeln!(out, "{n},{v:?},{tail:?}").expect("writing to a String");
    }
    out
}

fn factor_json(f: &Factor) -> Value {
    match f {
        Factor::GroupIntegral { indices, value } => {
            json!({"kind": "group_integral", "members": indices, "value": value})
        }
        Factor::SingleIntegral { index, value } => {
            json!({"kind": "single_integral", "member": index, "value": value})
        }
        Factor::PeriodicMean { k, value } => {
            json!({"kind": "periodic_mean", "k": k, "value": value})
        }
    }
}

pub fn prediction_json(p: &Prediction) -> Value {
    json!({
        "value": p.value,
        "applicable": p.applicable,
        "derivation": p.derivation.iter().map(factor_json).collect::<Vec<_>>(),
        "caveats": p.caveats,
    })
}

pub fn report_json(s: &Scenario, out: &RunOutcome) -> Value {
    let comparison = match &out.comparison {
        Some(c) => json!({
            "pass": c.pass,
            "predicted": c.predicted,
            "measured": c.measured,
            "final_error": c.final_error,
            "est_tail": c.tail,
            "tolerance": c.tolerance,
        }),
        None => Value::Null,
    };
    json!({
        "name": s.name,
        "status": out.status.as_str(),
        "family": s.family.iter().map(transform_to_json).collect::<Vec<_>>(),
        "n_max": out.trace.schedule.n_max(),
        "checkpoints": out.trace.schedule.checkpoints().len(),
        "workers": out.workers,
        "measured": out.trace.final_value(),
        "est_tail": out.trace.est_tail(),
        "prediction": prediction_json(&out.prediction),
        "comparison": comparison,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub trace: PathBuf,
    pub report: PathBuf,
}

pub fn write_artifacts(s: &Scenario, out: &RunOutcome, dir: &Path) -> io::Result<Artifacts> {
    std::fs::create_dir_all(dir)?;
    let trace = dir.join(format!("{}.trace.csv", s.name));
    let report = dir.join(format!("{}.report.json", s.name));
    std::fs::write(&trace, trace_csv(&out.trace))?;
    let mut body = serde_json::to_string_pretty(&report_json(s, out)).map_err(io::Error::other)?;
    body.push('\n');
    std::fs::write(&report, body)?;
    Ok(Artifacts { trace, report })
}
