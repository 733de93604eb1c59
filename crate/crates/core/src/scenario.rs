//! Scenario files: JSON records describing one averaging experiment.
//!
//! Parsing collects every violation it finds, each tagged with the JSON path
//! of the offending field, instead of stopping at the first one.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::dynsys::{TransformKind, TransformSpec, MAX_FAMILY};
use crate::engine::{default_ratio, Schedule, DEFAULT_N_MAX};
use crate::observables::{Observable, ObservableKind, TrigTerm};
use crate::unitmath::{ConstantKind, Rational, ScalarConstant};

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Geometric { n_max: u64, ratio: f64 },
    Explicit(Vec<u64>),
}

impl ScheduleSpec {
    pub fn build(&self) -> crate::Result<Schedule> {
        match self {
            ScheduleSpec::Geometric { n_max, ratio } => Schedule::geometric(*n_max, *ratio),
            ScheduleSpec::Explicit(cps) => Schedule::explicit(cps.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpec {
    pub g: Observable,
    pub k: u64,
}

/// What is averaged along the orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    /// `prod_i f_i(T_i^n x0)`, one observable per family member.
    Multiple {
        observables: Vec<Observable>,
        periodic: Option<PeriodicSpec>,
    },
    /// `mu(T^{-n} A ∩ B)` for a one-member family, or
    /// `mu(T1^{-n} A ∩ T2^{-n} B ∩ C)` for two members.
    Intersection { sets: Vec<Observable> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub family: Vec<TransformSpec>,
    pub workload: Workload,
    pub x0: f64,
    pub schedule: ScheduleSpec,
    pub tolerance: f64,
    pub workers: usize,
    /// Replaces the oracle's value, for negative controls.
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.violations.len();
        writeln!(
            f,
            "scenario has {n} problem{}:",
            if n == 1 { "" } else { "s" }
        )?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail<T>(&mut self, path: &str, message: impl Into<String>) -> Option<T> {
        self.violations.push(Violation {
            path: path.to_string(),
            message: message.into(),
        });
        None
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(m) => Some(m),
            None => self.fail(path, format!("expected an object, found {}", type_name(v))),
        }
    }

    fn unknown_keys(&mut self, m: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.fail::<()>(&format!("{path}.{k}"), "unknown field");
            }
        }
    }

    fn required<'v>(
        &mut self,
        m: &'v Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<&'v Value> {
        match m.get(key) {
            Some(v) => Some(v),
            None => self.fail(&format!("{path}.{key}"), "missing required field"),
        }
    }

    fn float(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => self.fail(
                path,
                format!("expected a finite number, found {}", type_name(v)),
            ),
        }
    }

    fn uint(&mut self, v: &Value, path: &str) -> Option<u64> {
        if let Some(n) = v.as_u64() {
            return Some(n);
        }
        // 1e6 is a natural way to write a count
        match v.as_f64() {
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => Some(x as u64),
            _ => self.fail(path, format!("expected a non-negative integer, found {v}")),
        }
    }

    fn positive(&mut self, v: &Value, path: &str) -> Option<u64> {
        match self.uint(v, path)? {
            0 => self.fail(path, "must be positive"),
            n => Some(n),
        }
    }

    fn int(&mut self, v: &Value, path: &str) -> Option<i64> {
        match v.as_i64() {
            Some(n) => Some(n),
            None => self.fail(path, format!("expected an integer, found {v}")),
        }
    }

    fn string<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v str> {
        match v.as_str() {
            Some(s) => Some(s),
            None => self.fail(path, format!("expected a string, found {}", type_name(v))),
        }
    }

    fn array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Vec<Value>> {
        match v.as_array() {
            Some(a) => Some(a),
            None => self.fail(path, format!("expected an array, found {}", type_name(v))),
        }
    }

    fn lift<T>(&mut self, r: crate::Result<T>, path: &str) -> Option<T> {
        match r {
            Ok(t) => Some(t),
            Err(e) => self.fail(path, e.to_string()),
        }
    }

    /// A rational written as an integer or as a `"p/q"` string.
    fn rational_value(&mut self, v: &Value, path: &str) -> Option<Rational> {
        if let Some(n) = v.as_i64() {
            return Some(Rational::from_integer(n));
        }
        let s = self.string(v, path)?;
        match Rational::from_str(s.trim()) {
            Ok(r) => Some(r),
            Err(_) => self.fail(path, format!("cannot read {s:?} as a rational p/q")),
        }
    }

    fn constant(&mut self, v: &Value, path: &str) -> Option<ScalarConstant> {
        let m = self.object(v, path)?;
        if m.len() != 1 {
            return self.fail(
                path,
                "constant needs exactly one of rational, surd, literal",
            );
        }
        let (tag, body) = m.iter().next().expect("one entry");
        let p = format!("{path}.{tag}");
        match tag.as_str() {
            "rational" => {
                let b = self.object(body, &p)?;
                self.unknown_keys(b, &p, &["p", "q"]);
                let num = self
                    .required(b, &p, "p")
                    .and_then(|x| self.int(x, &format!("{p}.p")));
                let den = self
                    .required(b, &p, "q")
                    .and_then(|x| self.int(x, &format!("{p}.q")));
                let r = ScalarConstant::rational(num?, den?);
                self.lift(r, &p)
            }
            "surd" => {
                let b = self.object(body, &p)?;
                self.unknown_keys(b, &p, &["a", "b", "m"]);
                let a = self
                    .required(b, &p, "a")
                    .and_then(|x| self.rational_value(x, &format!("{p}.a")));
                let bb = self
                    .required(b, &p, "b")
                    .and_then(|x| self.rational_value(x, &format!("{p}.b")));
                let m = self
                    .required(b, &p, "m")
                    .and_then(|x| self.uint(x, &format!("{p}.m")));
                let r = ScalarConstant::surd(a?, bb?, m?);
                self.lift(r, &p)
            }
            "literal" => {
                let x = self.float(body, &p)?;
                let r = ScalarConstant::literal(x);
                self.lift(r, &p)
            }
            other => self.fail(path, format!("unknown constant tag {other:?}")),
        }
    }

    fn transform(&mut self, v: &Value, path: &str) -> Option<TransformSpec> {
        let m = self.object(v, path)?;
        let kind = self
            .required(m, path, "kind")
            .and_then(|k| self.string(k, &format!("{path}.kind")))?;
        let label = match m.get("label") {
            Some(l) => Some(self.string(l, &format!("{path}.label"))?.to_string()),
            None => None,
        };
        let spec = match kind {
            "rotation" => {
                self.unknown_keys(m, path, &["kind", "alpha", "label"]);
                let a = self
                    .required(m, path, "alpha")
                    .and_then(|a| self.constant(a, &format!("{path}.alpha")))?;
                Some(TransformSpec::rotation(a))
            }
            "rotation_power" => {
                self.unknown_keys(m, path, &["kind", "alpha", "p", "label"]);
                let a = self
                    .required(m, path, "alpha")
                    .and_then(|a| self.constant(a, &format!("{path}.alpha")));
                let p = self
                    .required(m, path, "p")
                    .and_then(|p| self.positive(p, &format!("{path}.p")));
                let r = TransformSpec::rotation_power(a?, p?);
                self.lift(r, path)
            }
            "finite_rotation" => {
                self.unknown_keys(m, path, &["kind", "q", "label"]);
                let q = self
                    .required(m, path, "q")
                    .and_then(|q| self.positive(q, &format!("{path}.q")))?;
                let r = TransformSpec::finite_rotation(q);
                self.lift(r, &format!("{path}.q"))
            }
            other => self.fail(
                &format!("{path}.kind"),
                format!("unknown transform kind {other:?}"),
            ),
        }?;
        Some(match label {
            Some(l) => spec.with_label(l),
            None => spec,
        })
    }

    fn observable(&mut self, v: &Value, path: &str) -> Option<Observable> {
        let m = self.object(v, path)?;
        let kind = self
            .required(m, path, "kind")
            .and_then(|k| self.string(k, &format!("{path}.kind")))?;
        match kind {
            "frac_part" => {
                self.unknown_keys(m, path, &["kind"]);
                Some(Observable::frac_part())
            }
            "indicator" => {
                self.unknown_keys(m, path, &["kind", "a", "b"]);
                let a = self
                    .required(m, path, "a")
                    .and_then(|x| self.float(x, &format!("{path}.a")));
                let b = self
                    .required(m, path, "b")
                    .and_then(|x| self.float(x, &format!("{path}.b")));
                let r = Observable::indicator(a?, b?);
                self.lift(r, path)
            }
            "constant" => {
                self.unknown_keys(m, path, &["kind", "value"]);
                let c = self
                    .required(m, path, "value")
                    .and_then(|x| self.float(x, &format!("{path}.value")))?;
                let r = Observable::constant(c);
                self.lift(r, path)
            }
            "trig_poly" => {
                self.unknown_keys(m, path, &["kind", "terms"]);
                let tp = format!("{path}.terms");
                let items = self
                    .required(m, path, "terms")
                    .and_then(|t| self.array(t, &tp))?;
                let mut terms = Vec::with_capacity(items.len());
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    match self.trig_term(item, &format!("{tp}[{i}]")) {
                        Some(t) => terms.push(t),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                let r = Observable::trig_poly(terms);
                self.lift(r, path)
            }
            "piecewise_linear" => {
                self.unknown_keys(m, path, &["kind", "knots"]);
                let kp = format!("{path}.knots");
                let items = self
                    .required(m, path, "knots")
                    .and_then(|t| self.array(t, &kp))?;
                let mut knots = Vec::with_capacity(items.len());
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    let ip = format!("{kp}[{i}]");
                    let pair = match item.as_array() {
                        Some(a) if a.len() == 2 => {
                            let x = self.float(&a[0], &format!("{ip}[0]"));
                            let y = self.float(&a[1], &format!("{ip}[1]"));
                            x.zip(y)
                        }
                        _ => self.fail(&ip, "knot must be a [position, value] pair"),
                    };
                    match pair {
                        Some(p) => knots.push(p),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                let r = Observable::piecewise_linear(knots);
                self.lift(r, path)
            }
            "power_of_frac" => {
                self.unknown_keys(m, path, &["kind", "p"]);
                let pp = format!("{path}.p");
                let p = self
                    .required(m, path, "p")
                    .and_then(|p| self.positive(p, &pp))?;
                let p = match u32::try_from(p) {
                    Ok(p) => p,
                    Err(_) => return self.fail(&pp, "exponent too large"),
                };
                let r = Observable::power_of_frac(p);
                self.lift(r, path)
            }
            "product" => {
                self.unknown_keys(m, path, &["kind", "factors"]);
                let fp = format!("{path}.factors");
                let items = self
                    .required(m, path, "factors")
                    .and_then(|t| self.array(t, &fp))?;
                if items.len() < 2 {
                    return self.fail(&fp, "product needs at least two factors");
                }
                let factors: Vec<Option<Observable>> = items
                    .iter()
                    .enumerate()
                    .map(|(i, f)| self.observable(f, &format!("{fp}[{i}]")))
                    .collect();
                let factors: Option<Vec<Observable>> = factors.into_iter().collect();
                let factors = factors?;
                let first = factors[0].clone();
                Some(
                    factors[1..]
                        .iter()
                        .fold(first, |acc, f| Observable::product(&acc, f)),
                )
            }
            other => self.fail(
                &format!("{path}.kind"),
                format!("unknown observable kind {other:?}"),
            ),
        }
    }

    fn trig_term(&mut self, v: &Value, path: &str) -> Option<TrigTerm> {
        let m = self.object(v, path)?;
        self.unknown_keys(m, path, &["freq", "cos", "sin"]);
        let freq = self
            .required(m, path, "freq")
            .and_then(|f| self.int(f, &format!("{path}.freq")));
        let freq = match freq.map(i32::try_from) {
            Some(Ok(f)) => Some(f),
            Some(Err(_)) => self.fail(&format!("{path}.freq"), "frequency out of range"),
            None => None,
        };
        let c = match m.get("cos") {
            Some(x) => self.float(x, &format!("{path}.cos")),
            None => Some(0.0),
        };
        let s = match m.get("sin") {
            Some(x) => self.float(x, &format!("{path}.sin")),
            None => Some(0.0),
        };
        Some(TrigTerm {
            freq: freq?,
            cos_amp: c?,
            sin_amp: s?,
        })
    }

    fn schedule(&mut self, v: &Value, path: &str) -> Option<ScheduleSpec> {
        let m = self.object(v, path)?;
        let spec = if let Some(cps) = m.get("checkpoints") {
            self.unknown_keys(m, path, &["checkpoints"]);
            let cp = format!("{path}.checkpoints");
            let items = self.array(cps, &cp)?;
            let vals: Vec<Option<u64>> = items
                .iter()
                .enumerate()
                .map(|(i, x)| self.uint(x, &format!("{cp}[{i}]")))
                .collect();
            ScheduleSpec::Explicit(vals.into_iter().collect::<Option<Vec<_>>>()?)
        } else {
            self.unknown_keys(m, path, &["n_max", "ratio"]);
            let n_max = match m.get("n_max") {
                Some(n) => self.positive(n, &format!("{path}.n_max")),
                None => Some(DEFAULT_N_MAX),
            };
            let ratio = match m.get("ratio") {
                Some(r) => self.float(r, &format!("{path}.ratio")),
                None => Some(default_ratio()),
            };
            ScheduleSpec::Geometric {
                n_max: n_max?,
                ratio: ratio?,
            }
        };
        let built = spec.build();
        self.lift(built, path)?;
        Some(spec)
    }

    fn observable_list(&mut self, v: &Value, path: &str) -> Option<Vec<Observable>> {
        let items = self.array(v, path)?;
        let parsed: Vec<Option<Observable>> = items
            .iter()
            .enumerate()
            .map(|(i, o)| self.observable(o, &format!("{path}[{i}]")))
            .collect();
        parsed.into_iter().collect()
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "name",
    "family",
    "observables",
    "intersection",
    "x0",
    "schedule",
    "periodic",
    "tolerance",
    "workers",
    "expected",
];

/// Parses and fully validates a scenario file.
pub fn parse_scenario(text: &[u8]) -> Result<Scenario, ParseError> {
    let one = |path: &str, message: String| ParseError {
        violations: vec![Violation {
            path: path.to_string(),
            message,
        }],
    };
    let text = std::str::from_utf8(text).map_err(|e| one("$", format!("not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| {
        one(
            "$",
            format!(
                "invalid JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ),
        )
    })?;
    from_value(&root)
}

/// Validates an already-parsed JSON value as a scenario.
pub fn from_value(root: &Value) -> Result<Scenario, ParseError> {
    let mut c = Checker {
        violations: Vec::new(),
    };
    let scenario = read_scenario(&mut c, root);
    match scenario {
        Some(s) if c.violations.is_empty() => Ok(s),
        _ => Err(ParseError {
            violations: c.violations,
        }),
    }
}

fn read_scenario(c: &mut Checker, root: &Value) -> Option<Scenario> {
    let m = c.object(root, "$")?;
    c.unknown_keys(m, "$", SCENARIO_KEYS);

    let name = c
        .required(m, "$", "name")
        .and_then(|n| c.string(n, "$.name"))
        .and_then(|n| {
            let ok = !n.is_empty()
                && n.chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '-' | '_' | '.'));
            if ok {
                Some(n.to_string())
            } else {
                c.fail(
                    "$.name",
                    "name must be nonempty and use only letters, digits, '-', '_' or '.'",
                )
            }
        });

    let family = c
        .required(m, "$", "family")
        .and_then(|f| c.array(f, "$.family"))
        .and_then(|items| {
            if items.is_empty() || items.len() > MAX_FAMILY {
                return c.fail(
                    "$.family",
                    format!(
                        "family needs 1 to {MAX_FAMILY} members, got {}",
                        items.len()
                    ),
                );
            }
            let parsed: Vec<Option<TransformSpec>> = items
                .iter()
                .enumerate()
                .map(|(i, t)| c.transform(t, &format!("$.family[{i}]")))
                .collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        });
    let family_len = m.get("family").and_then(Value::as_array).map(Vec::len);

    let workload = read_workload(c, m, family_len);

    let x0 = c
        .required(m, "$", "x0")
        .and_then(|x| c.float(x, "$.x0"))
        .and_then(|x| {
            if (0.0..1.0).contains(&x) {
                Some(x)
            } else {
                c.fail("$.x0", format!("x0 must lie in [0, 1), got {x}"))
            }
        });
    let schedule = match m.get("schedule") {
        Some(s) => c.schedule(s, "$.schedule"),
        None => Some(ScheduleSpec::Geometric {
            n_max: DEFAULT_N_MAX,
            ratio: default_ratio(),
        }),
    };
    let tolerance = c
        .required(m, "$", "tolerance")
        .and_then(|t| c.float(t, "$.tolerance"))
        .and_then(|t| {
            if t > 0.0 {
                Some(t)
            } else {
                c.fail("$.tolerance", "tolerance must be positive")
            }
        });
    let workers = match m.get("workers") {
        None => Some(1),
        Some(w) => c
            .positive(w, "$.workers")
            .and_then(|w| match usize::try_from(w) {
                Ok(w) if w <= 1024 => Some(w),
                _ => c.fail("$.workers", "at most 1024 workers"),
            }),
    };
    let expected = match m.get("expected") {
        None => Some(None),
        Some(e) => c.float(e, "$.expected").map(Some),
    };

    Some(Scenario {
        name: name?,
        family: family?,
        workload: workload?,
        x0: x0?,
        schedule: schedule?,
        tolerance: tolerance?,
        workers: workers?,
        expected: expected?,
    })
}

fn read_workload(
    c: &mut Checker,
    m: &Map<String, Value>,
    family_len: Option<usize>,
) -> Option<Workload> {
    match (m.get("observables"), m.get("intersection")) {
        (Some(_), Some(_)) => c.fail("$", "give either observables or intersection, not both"),
        (None, None) => c.fail("$.observables", "missing required field"),
        (Some(obs), None) => {
            let observables = c.observable_list(obs, "$.observables");
            let obs_len = obs.as_array().map(Vec::len);
            if let (Some(f), Some(o)) = (family_len, obs_len) {
                if f != o {
                    c.fail::<()>(
                        "$.observables",
                        format!("family has {f} members but observables has {o} entries"),
                    );
                }
            }
            let periodic = match m.get("periodic") {
                None => Some(None),
                Some(p) => read_periodic(c, p).map(Some),
            };
            Some(Workload::Multiple {
                observables: observables?,
                periodic: periodic?,
            })
        }
        (None, Some(sets)) => {
            if m.contains_key("periodic") {
                c.fail::<()>(
                    "$.periodic",
                    "a periodic factor is not supported with intersection",
                );
            }
            let parsed = c.observable_list(sets, "$.intersection");
            let n_sets = sets.as_array().map(Vec::len);
            match (family_len, n_sets) {
                (Some(1), Some(2)) | (Some(2), Some(3)) => {}
                (Some(f), Some(s)) => {
                    c.fail::<()>(
                        "$.intersection",
                        format!(
                            "intersection needs 1 member with 2 sets or 2 members with 3 sets; family has {f} members and intersection has {s} sets"
                        ),
                    );
                }
                _ => {}
            }
            let sets = parsed?;
            for (i, s) in sets.iter().enumerate() {
                if !s.is_indicator() {
                    c.fail::<()>(
                        &format!("$.intersection[{i}]"),
                        "intersection sets must be indicators",
                    );
                }
            }
            Some(Workload::Intersection { sets })
        }
    }
}

fn read_periodic(c: &mut Checker, v: &Value) -> Option<PeriodicSpec> {
    let m = c.object(v, "$.periodic")?;
    c.unknown_keys(m, "$.periodic", &["g", "k"]);
    let g = c
        .required(m, "$.periodic", "g")
        .and_then(|g| c.observable(g, "$.periodic.g"));
    let k = c
        .required(m, "$.periodic", "k")
        .and_then(|k| c.positive(k, "$.periodic.k"))
        .and_then(|k| match TransformSpec::finite_rotation(k) {
            Ok(_) => Some(k),
            Err(e) => c.fail("$.periodic.k", e.to_string()),
        });
    Some(PeriodicSpec { g: g?, k: k? })
}

fn rational_json(r: &Rational) -> Value {
    if r.is_integer() {
        json!(r.numer())
    } else {
        json!(format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn constant_to_json(c: &ScalarConstant) -> Value {
    match c.kind() {
        ConstantKind::Rational(r) => json!({"rational": {"p": r.numer(), "q": r.denom()}}),
        ConstantKind::Surd { a, b, m } => {
            json!({"surd": {"a": rational_json(a), "b": rational_json(b), "m": m}})
        }
        ConstantKind::Literal(v) => json!({ "literal": v }),
    }
}

pub fn transform_to_json(t: &TransformSpec) -> Value {
    let mut v = match &t.kind {
        TransformKind::Rotation(a) => json!({"kind": "rotation", "alpha": constant_to_json(a)}),
        TransformKind::RotationPower { alpha, p } => {
            json!({"kind": "rotation_power", "alpha": constant_to_json(alpha), "p": p})
        }
        TransformKind::FiniteRotation { q } => json!({"kind": "finite_rotation", "q": q}),
    };
    v["label"] = json!(t.label);
    v
}

pub fn observable_to_json(f: &Observable) -> Value {
    match f.kind() {
        ObservableKind::FracPart => json!({"kind": "frac_part"}),
        ObservableKind::Indicator { a, b } => json!({"kind": "indicator", "a": a, "b": b}),
        ObservableKind::TrigPoly(terms) => {
            let terms: Vec<Value> = terms
                .iter()
                .map(|t| json!({"freq": t.freq, "cos": t.cos_amp, "sin": t.sin_amp}))
                .collect();
            json!({"kind": "trig_poly", "terms": terms})
        }
        ObservableKind::PiecewiseLinear(knots) => {
            let knots: Vec<Value> = knots.iter().map(|(x, y)| json!([x, y])).collect();
            json!({"kind": "piecewise_linear", "knots": knots})
        }
        ObservableKind::PowerOfFrac(p) => json!({"kind": "power_of_frac", "p": p}),
        ObservableKind::Product(fs) => {
            let fs: Vec<Value> = fs.iter().map(observable_to_json).collect();
            json!({"kind": "product", "factors": fs})
        }
    }
}

pub fn to_value(s: &Scenario) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(s.name));
    m.insert(
        "family".into(),
        Value::Array(s.family.iter().map(transform_to_json).collect()),
    );
    match &s.workload {
        Workload::Multiple {
            observables,
            periodic,
        } => {
            m.insert(
                "observables".into(),
                Value::Array(observables.iter().map(observable_to_json).collect()),
            );
            if let Some(p) = periodic {
                m.insert(
                    "periodic".into(),
                    json!({"g": observable_to_json(&p.g), "k": p.k}),
                );
            }
        }
        Workload::Intersection { sets } => {
            m.insert(
                "intersection".into(),
                Value::Array(sets.iter().map(observable_to_json).collect()),
            );
        }
    }
    m.insert("x0".into(), json!(s.x0));
    let schedule = match &s.schedule {
        ScheduleSpec::Geometric { n_max, ratio } => json!({"n_max": n_max, "ratio": ratio}),
        ScheduleSpec::Explicit(cps) => json!({ "checkpoints": cps }),
    };
    m.insert("schedule".into(), schedule);
    m.insert("tolerance".into(), json!(s.tolerance));
    m.insert("workers".into(), json!(s.workers));
    if let Some(e) = s.expected {
        m.insert("expected".into(), json!(e));
    }
    Value::Object(m)
}

/// Pretty-printed JSON that [`parse_scenario`] reads back to an equal scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(&to_value(s)).expect("scenario values are always serializable")
}
