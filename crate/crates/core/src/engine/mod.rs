//! Streaming diagonal averages along rotation orbits.
//!
//! Every term is computed directly from its index `n` (orbit points come from
//! reducing `n * theta` modulo one), so the index range can be cut into
//! chunks and summed by any number of workers. Chunk boundaries depend only
//! on the schedule and the chunk length, never on the worker count, and
//! partial sums are merged in chunk order; the resulting trace is therefore
//! bitwise identical for every worker count.

pub mod arc;

use rayon::prelude::*;

pub use arc::{intersection_len2, intersection_len3, Arc};

use crate::dynsys::{TransformFamily, TransformSpec};
use crate::error::{domain, Error, Result};
use crate::observables::Observable;
use crate::unitmath::{CompensatedSum, UnitPoint};

/// Largest admissible checkpoint.
pub const MAX_N: u64 = 1 << 62;
pub const DEFAULT_N_MAX: u64 = 1_000_000;
pub const DEFAULT_CHUNK_LEN: u64 = 1 << 14;

/// `10^(1/8)`: eight checkpoints per decade.
pub fn default_ratio() -> f64 {
    10f64.powf(0.125)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    checkpoints: Vec<u64>,
}

impl Schedule {
    /// `N_j = ceil(10 r^j)` below `n_max`, then `n_max` itself.
    pub fn geometric(n_max: u64, ratio: f64) -> Result<Self> {
        if n_max == 0 || n_max > MAX_N {
            return domain(format!("n_max must be in 1..=2^62, got {n_max}"));
        }
        if !(ratio.is_finite() && ratio > 1.0) {
            return domain(format!("schedule ratio must exceed 1, got {ratio}"));
        }
        let mut checkpoints = Vec::new();
        let mut j = 0i32;
        loop {
            let v = 10.0 * ratio.powi(j);
            // absorb pow rounding at exact integers such as 10 * (10^(1/8))^8
            let n = if (v - v.round()).abs() <= 1e-9 * v {
                v.round()
            } else {
                v.ceil()
            };
            if n >= n_max as f64 {
                break;
            }
            let n = n as u64;
            if checkpoints.last().is_none_or(|&last| n > last) {
                checkpoints.push(n);
            }
            j += 1;
        }
        checkpoints.push(n_max);
        Ok(Schedule { checkpoints })
    }

    pub fn default_to(n_max: u64) -> Result<Self> {
        Self::geometric(n_max, default_ratio())
    }

    pub fn explicit(checkpoints: Vec<u64>) -> Result<Self> {
        if checkpoints.is_empty() {
            return domain("schedule needs at least one checkpoint");
        }
        if checkpoints[0] == 0 {
            return domain("checkpoints must be positive");
        }
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return domain("checkpoints must be strictly increasing");
        }
        if *checkpoints.last().unwrap() > MAX_N {
            return domain("last checkpoint exceeds 2^62");
        }
        Ok(Schedule { checkpoints })
    }

    pub fn single(n: u64) -> Result<Self> {
        Self::explicit(vec![n])
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn n_max(&self) -> u64 {
        *self.checkpoints.last().expect("schedule is nonempty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageTrace {
    pub schedule: Schedule,
    pub values: Vec<f64>,
}

impl AverageTrace {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace is nonempty")
    }

    /// `|values[m] - values[m-1]|`, zero for a single checkpoint.
    pub fn est_tail(&self) -> f64 {
        match self.values.len() {
            0 | 1 => 0.0,
            m => (self.values[m - 1] - self.values[m - 2]).abs(),
        }
    }

    /// `(N, value, est_tail)` per checkpoint, the tail measured against the
    /// previous checkpoint.
    pub fn rows(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.schedule
            .checkpoints()
            .iter()
            .enumerate()
            .map(move |(j, &n)| {
                let tail = if j == 0 {
                    0.0
                } else {
                    (self.values[j] - self.values[j - 1]).abs()
                };
                (n, self.values[j], tail)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFactor {
    pub g: Observable,
    pub map: TransformSpec,
    pub order: u64,
}

impl PeriodicFactor {
    pub fn new(g: Observable, map: TransformSpec) -> Result<Self> {
        match map.finite_order() {
            Some(order) => Ok(PeriodicFactor { g, map, order }),
            None => domain(format!("{map} does not have finite order")),
        }
    }
}

/// A fully validated averaging job.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    /// `prod_i f_i(T_i^n x0)`, optionally times `g(S^n x0)`.
    Multiple {
        family: TransformFamily,
        observables: Vec<Observable>,
        x0: UnitPoint,
        periodic: Option<PeriodicFactor>,
    },
    /// `mu(T^{-n} A ∩ B)`.
    Correlation {
        transform: TransformSpec,
        a: Arc,
        b: Arc,
    },
    /// `mu(T1^{-n} A ∩ T2^{-n} B ∩ C)`.
    TripleIntersection {
        t1: TransformSpec,
        t2: TransformSpec,
        a: Arc,
        b: Arc,
        c: Arc,
    },
}

fn indicator_arc(f: &Observable, name: &str) -> Result<Arc> {
    match f.indicator_bounds() {
        Some((a, b)) => Ok(Arc::from_interval(a, b)),
        None => domain(format!("{name} must be an indicator observable")),
    }
}

impl Job {
    pub fn multiple(
        family: TransformFamily,
        observables: Vec<Observable>,
        x0: UnitPoint,
        periodic: Option<PeriodicFactor>,
    ) -> Result<Self> {
        if observables.len() != family.len() {
            return domain(format!(
                "family has {} members but {} observables were given",
                family.len(),
                observables.len()
            ));
        }
        Ok(Job::Multiple {
            family,
            observables,
            x0,
            periodic,
        })
    }

    pub fn correlation(transform: TransformSpec, a: &Observable, b: &Observable) -> Result<Self> {
        Ok(Job::Correlation {
            transform,
            a: indicator_arc(a, "A")?,
            b: indicator_arc(b, "B")?,
        })
    }

    pub fn triple_intersection(
        t1: TransformSpec,
        t2: TransformSpec,
        a: &Observable,
        b: &Observable,
        c: &Observable,
    ) -> Result<Self> {
        Ok(Job::TripleIntersection {
            t1,
            t2,
            a: indicator_arc(a, "A")?,
            b: indicator_arc(b, "B")?,
            c: indicator_arc(c, "C")?,
        })
    }

    /// The `n`-th summand.
    pub fn term(&self, n: u64) -> f64 {
        match self {
            Job::Multiple {
                family,
                observables,
                x0,
                periodic,
            } => {
                let mut prod = 1.0;
                for group in family.equality_partition() {
                    let p = family.members()[group[0]].apply(*x0, n);
                    for &i in group {
                        prod *= observables[i].evaluate(p);
                    }
                }
                if let Some(pf) = periodic {
                    prod *= pf.g.evaluate(pf.map.apply(*x0, n % pf.order));
                }
                prod
            }
            Job::Correlation { transform, a, b } => {
                let shifted = a.with_start(preimage_start(transform, a, n));
                intersection_len2(&shifted, b)
            }
            Job::TripleIntersection { t1, t2, a, b, c } => {
                let sa = a.with_start(preimage_start(t1, a, n));
                let sb = b.with_start(preimage_start(t2, b, n));
                intersection_len3(&sa, &sb, c)
            }
        }
    }

    /// Interval containing every summand.
    pub fn term_bounds(&self) -> (f64, f64) {
        match self {
            Job::Multiple {
                observables,
                periodic,
                ..
            } => {
                let b = observables
                    .iter()
                    .map(|f| f.bounds())
                    .fold((1.0, 1.0), crate::observables::interval_mul);
                match periodic {
                    Some(pf) => crate::observables::interval_mul(b, pf.g.bounds()),
                    None => b,
                }
            }
            _ => (0.0, 1.0),
        }
    }
}

fn preimage_start(t: &TransformSpec, arc: &Arc, n: u64) -> f64 {
    let start = UnitPoint::new(arc.start()).expect("arc start is finite");
    t.apply_inverse(start, n).value()
}

/// Chunking of the index range; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunk_len: u64,
}

impl Default for ChunkPlan {
    fn default() -> Self {
        ChunkPlan {
            chunk_len: DEFAULT_CHUNK_LEN,
        }
    }
}

/// `[start, end)` ranges covering `[0, n_max)`, split at every checkpoint and
/// every multiple of `chunk_len`.
fn segments(schedule: &Schedule, plan: ChunkPlan) -> Vec<(u64, u64)> {
    let step = plan.chunk_len.max(1);
    let mut out = Vec::new();
    let mut start = 0u64;
    for &cp in schedule.checkpoints() {
        while start < cp {
            let end = ((start / step + 1).saturating_mul(step)).min(cp);
            out.push((start, end));
            start = end;
        }
    }
    out
}

fn partial_sum(job: &Job, (start, end): (u64, u64)) -> CompensatedSum {
    let mut acc = CompensatedSum::new();
    for n in start..end {
        acc.add(job.term(n));
    }
    acc
}

/// Runs `job` with the default chunk plan.
pub fn run_chunked(job: &Job, schedule: &Schedule, workers: usize) -> Result<AverageTrace> {
    run_with_plan(job, schedule, workers, ChunkPlan::default())
}

pub fn run_with_plan(
    job: &Job,
    schedule: &Schedule,
    workers: usize,
    plan: ChunkPlan,
) -> Result<AverageTrace> {
    if workers == 0 {
        return domain("workers must be at least 1");
    }
    let segs = segments(schedule, plan);
    let partials: Vec<CompensatedSum> = if workers == 1 {
        segs.iter().map(|&s| partial_sum(job, s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Resource(format!("could not start worker pool: {e}")))?;
        pool.install(|| segs.par_iter().map(|&s| partial_sum(job, s)).collect())
    };

    let mut acc = CompensatedSum::new();
    let mut values = Vec::with_capacity(schedule.checkpoints().len());
    let mut cps = schedule.checkpoints().iter().peekable();
    for (&(_, end), part) in segs.iter().zip(&partials) {
        acc.merge(part);
        if cps.peek() == Some(&&end) {
            values.push(acc.try_value()? / end as f64);
            cps.next();
        }
    }
    Ok(AverageTrace {
        schedule: schedule.clone(),
        values,
    })
}

pub fn birkhoff_average(
    t: &TransformSpec,
    f: &Observable,
    x0: UnitPoint,
    s: &Schedule,
) -> Result<AverageTrace> {
    let family = crate::dynsys::build_family(vec![t.clone()])?;
    run_chunked(&Job::multiple(family, vec![f.clone()], x0, None)?, s, 1)
}

pub fn multiple_average(
    fam: &TransformFamily,
    fs: &[Observable],
    x0: UnitPoint,
    s: &Schedule,
) -> Result<AverageTrace> {
    run_chunked(&Job::multiple(fam.clone(), fs.to_vec(), x0, None)?, s, 1)
}

pub fn periodic_factor_average(
    fam: &TransformFamily,
    fs: &[Observable],
    g: &Observable,
    s_map: &TransformSpec,
    x0: UnitPoint,
    sch: &Schedule,
) -> Result<AverageTrace> {
    let pf = PeriodicFactor::new(g.clone(), s_map.clone())?;
    run_chunked(
        &Job::multiple(fam.clone(), fs.to_vec(), x0, Some(pf))?,
        sch,
        1,
    )
}

pub fn correlation_average(
    t: &TransformSpec,
    a: &Observable,
    b: &Observable,
    s: &Schedule,
) -> Result<AverageTrace> {
    run_chunked(&Job::correlation(t.clone(), a, b)?, s, 1)
}

pub fn triple_intersection_average(
    t1: &TransformSpec,
    t2: &TransformSpec,
    a: &Observable,
    b: &Observable,
    c: &Observable,
    s: &Schedule,
) -> Result<AverageTrace> {
    run_chunked(
        &Job::triple_intersection(t1.clone(), t2.clone(), a, b, c)?,
        s,
        1,
    )
}
