//! Run reports: an aligned text table or a JSON record.
//!
//! Nothing time- or host-dependent is written unless `--timing` is given, so
//! identical inputs, flags and seed give byte-identical output.

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Closed form.
    Exact,
    /// Best value found by a maximization.
    Lower,
    /// Attained by an explicit free object, or the complement of a lower bound.
    Upper,
    /// Attained inside a strict subset of the free set.
    RestrictedUpper,
    /// A derived gap or count, not a measure.
    Check,
    /// Verdict of a sampled property check.
    Sampled,
}

impl Bound {
    fn name(self) -> &'static str {
        match self {
            Bound::Exact => "exact",
            Bound::Lower => "lower",
            Bound::Upper => "upper",
            Bound::RestrictedUpper => "restricted_upper",
            Bound::Check => "check",
            Bound::Sampled => "sampled",
        }
    }
}

/// Reference a computed value is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Value { value: f64, tol: f64 },
    AtLeast(f64),
    Range(f64, f64),
}

impl Expect {
    pub fn accepts(self, got: f64) -> bool {
        match self {
            Expect::Value { value, tol } => (got - value).abs() <= tol,
            Expect::AtLeast(lo) => got >= lo,
            Expect::Range(lo, hi) => got >= lo && got <= hi,
        }
    }

    fn render(self) -> String {
        match self {
            Expect::Value { value, tol } => format!("{} +- {tol:e}", number(value)),
            Expect::AtLeast(lo) => format!(">= {}", number(lo)),
            Expect::Range(lo, hi) => format!("[{}, {}]", number(lo), number(hi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub name: String,
    #[serde(serialize_with = "bits")]
    pub value: f64,
    pub bound: Bound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ResultRow {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self { name: name.into(), value: clean(value), bound, expected: None, pass: None, note: String::new() }
    }

    pub fn expect(mut self, e: Expect) -> Self {
        self.pass = Some(e.accepts(self.value));
        self.expected = Some(e);
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.pass = Some(ok);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: String, seed: u64) -> Self {
        Self { command, seed, inputs: Vec::new(), results: Vec::new(), runtime_ms: None }
    }

    pub fn push(&mut self, row: ResultRow) {
        self.results.push(row);
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\nseed: {}\n", self.command, self.seed);
        for i in &self.inputs {
            out += &format!("input: {} ({}) sha256 {}\n", i.source, i.name, i.sha256);
        }
        if let Some(ms) = self.runtime_ms {
            out += &format!("runtime: {ms} ms\n");
        }
        let header = ["name", "value", "bound", "expected", "status", "note"].map(String::from);
        let rows: Vec<[String; 6]> = self
            .results
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    number(r.value),
                    r.bound.name().to_string(),
                    r.expected.map(Expect::render).unwrap_or_default(),
                    match r.pass {
                        Some(true) => "PASS".into(),
                        Some(false) => "FAIL".into(),
                        None => String::new(),
                    },
                    r.note.clone(),
                ]
            })
            .collect();
        let mut width = [0usize; 6];
        for row in core::iter::once(&header).chain(&rows) {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for row in core::iter::once(&header).chain(&rows) {
            let mut line = String::new();
            for (k, (cell, w)) in row.iter().zip(width).enumerate() {
                if k == 1 {
                    line += &format!("{cell:>w$}  ");
                } else {
                    line += &format!("{cell:<w$}  ");
                }
            }
            out += line.trim_end();
            out.push('\n');
        }
        out
    }
}

/// Maps `-0.0` to `0.0` so the sign of a zero never differs between runs.
fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v.is_nan() {
        "nan".into()
    } else if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:.3e}")
    } else {
        format!("{v:.10}")
    }
}

// JSON has no infinities; they are written as strings.
fn bits<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&number(*v))
    }
}
