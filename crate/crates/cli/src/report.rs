use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use stabkit_core::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// A class, parameter, or matrix that certifies the outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, pass: bool, witness: Option<Value>) -> Self {
        Self { name: name.into(), pass, witness, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub result: Value,
    /// Wall-clock time; the only field allowed to differ between runs.
    pub timing_ms: f64,
}

impl Report {
    pub fn new(command: &str, config: Value, checks: Vec<Check>, result: Value) -> Self {
        let verdict = if checks.iter().all(|c| c.pass) { Verdict::Pass } else { Verdict::Fail };
        Self { command: command.into(), config, verdict, checks, result, timing_ms: 0.0 }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `Some` when the error is a failed mathematical check rather than bad input.
pub fn failure_check(e: &Error) -> Option<Check> {
    let (name, witness) = match e {
        Error::HeartViolation { class } => ("heart", json!({ "class": class })),
        Error::VanishingCharge { class } => ("heart", json!({ "class": class })),
        Error::KernelNotNegativeDefinite { witness } => ("kernel_negative_definite", json!({ "vector": witness })),
        Error::KernelRoot { witness } => ("no_kernel_root", json!({ "root": witness })),
        Error::PathNotAdmissible { t, reason } => ("path_admissible", json!({ "t": t, "reason": reason })),
        Error::OperatorNormTooLarge { from, to } => ("operator_norm", json!({ "from": from, "to": to })),
        Error::SignatureMismatch { expected, found } => {
            ("signature", json!({ "expected": [expected.0, expected.1, expected.2], "found": [found.0, found.1, found.2] }))
        }
        Error::NotSemistable => ("semistable", Value::Null),
        Error::NoFiberValue(msg) => ("fiber_value", json!({ "reason": msg })),
        Error::DegenerateOnComplement => ("complement_nondegenerate", Value::Null),
        Error::NullSpaceNotInjective => ("null_space_injective", Value::Null),
        _ => return None,
    };
    Some(Check::new(name, false, (!witness.is_null()).then_some(witness)).with_detail(e.to_string()))
}

/// A small table for `--csv`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}
