//! Machine-readable verification reports.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::algebra::PitOutcome;

/// How an identity is decided: randomized identity testing or complete normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    #[default]
    Pit,
    Full,
}

impl FromStr for VerifyMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pit" => Ok(VerifyMode::Pit),
            "full" | "full-normalize" => Ok(VerifyMode::Full),
            other => Err(format!("unknown mode '{other}' (expected pit or full)")),
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyMode::Pit => "pit",
            VerifyMode::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Pit,
    Numeric,
}

impl From<VerifyMode> for CheckMode {
    fn from(m: VerifyMode) -> Self {
        match m {
            VerifyMode::Pit => CheckMode::Pit,
            VerifyMode::Full => CheckMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// One line of the report stream.
///
/// A failing report always carries a witness and a pit-mode report always carries
/// its failure-probability bound; the constructors enforce both.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    check_id: String,
    anchor: String,
    mode: CheckMode,
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    timing_ms: f64,
    metadata: Map<String, Value>,
}

impl VerificationReport {
    fn base(check_id: &str, anchor: &str, mode: CheckMode, verdict: Verdict) -> Self {
        VerificationReport {
            check_id: check_id.into(),
            anchor: anchor.into(),
            mode,
            verdict,
            witness: None,
            timing_ms: 0.0,
            metadata: Map::new(),
        }
    }

    /// A passing exact or numeric check. Pit checks go through [`Self::from_pit`].
    pub fn pass(check_id: &str, anchor: &str, mode: CheckMode) -> Self {
        assert_ne!(mode, CheckMode::Pit, "pit reports need an outcome");
        Self::base(check_id, anchor, mode, Verdict::Pass)
    }

    pub fn fail(check_id: &str, anchor: &str, mode: CheckMode, witness: Value) -> Self {
        let mut r = Self::base(check_id, anchor, mode, Verdict::Fail);
        r.witness = Some(if witness.is_null() { Value::String("unspecified".into()) } else { witness });
        r
    }

    /// Pass or fail depending on `ok`; the witness is used only on failure.
    pub fn verdict(check_id: &str, anchor: &str, mode: CheckMode, ok: bool, witness: impl FnOnce() -> Value) -> Self {
        assert_ne!(mode, CheckMode::Pit, "pit reports need an outcome");
        if ok {
            Self::pass(check_id, anchor, mode)
        } else {
            Self::fail(check_id, anchor, mode, witness())
        }
    }

    pub fn skipped(check_id: &str, anchor: &str, mode: CheckMode, reason: &str) -> Self {
        let mut r = Self::base(check_id, anchor, mode, Verdict::Skipped);
        r.metadata.insert("reason".into(), Value::String(reason.into()));
        r
    }

    pub fn from_pit(check_id: &str, anchor: &str, out: &PitOutcome) -> Self {
        let mut r = if out.zero {
            Self::base(check_id, anchor, CheckMode::Pit, Verdict::Pass)
        } else {
            let w = serde_json::to_value(&out.witness).unwrap_or(Value::Null);
            let mut r = Self::base(check_id, anchor, CheckMode::Pit, Verdict::Fail);
            r.witness = Some(w);
            r
        };
        r.metadata.insert("trials".into(), out.trials.into());
        r.metadata.insert("seed".into(), out.seed.into());
        r.metadata.insert("degree_num".into(), out.degree.num.into());
        r.metadata.insert("degree_den".into(), out.degree.den.into());
        r.metadata.insert("per_trial_bound".into(), out.per_trial_bound.into());
        let log = if out.failure_bound_log10.is_finite() {
            Value::from(out.failure_bound_log10)
        } else {
            Value::String("-inf".into())
        };
        r.metadata.insert("failure_bound_log10".into(), log);
        r.metadata.insert("resamples".into(), out.resamples.into());
        r
    }

    /// A usage or precondition problem; reported as a failure whose witness is the message.
    pub fn precondition(check_id: &str, anchor: &str, message: &str) -> Self {
        let mut r = Self::fail(check_id, anchor, CheckMode::Exact, Value::String(message.into()));
        r.metadata.insert("precondition_error".into(), Value::Bool(true));
        r
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn with_timing(mut self, seconds: f64) -> Self {
        self.timing_ms = seconds * 1e3;
        self
    }

    pub fn check_id(&self) -> &str {
        &self.check_id
    }

    pub fn anchor(&self) -> &str {
        &self.anchor
    }

    pub fn mode(&self) -> CheckMode {
        self.mode
    }

    pub fn verdict_kind(&self) -> Verdict {
        self.verdict
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn witness(&self) -> Option<&Value> {
        self.witness.as_ref()
    }

    pub fn metadata(&self) -> &Map<String, Value> {
        &self.metadata
    }

    pub fn timing_ms(&self) -> f64 {
        self.timing_ms
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// The JSON value without timing, for reproducibility comparisons.
    pub fn deterministic_view(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("timing_ms");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_reports_carry_witness() {
        let r = VerificationReport::fail("x", "a", CheckMode::Exact, Value::Null);
        assert!(r.witness().is_some());
        let line = r.to_json_line();
        assert!(line.contains("\"verdict\":\"fail\""));
    }
}
