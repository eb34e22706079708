use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::WachError;

pub const SCHEMA: &str = "wach-lab/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    PrecisionExhausted,
    CertifiedFailure,
    UsageError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::CertifiedFailure => 1,
            Status::UsageError => 2,
            Status::PrecisionExhausted => 3,
        }
    }

    pub fn of_error(e: &WachError) -> Status {
        match e {
            WachError::Config(_)
            | WachError::Parse(_)
            | WachError::Divergent { .. }
            | WachError::BadCharacterValue { .. } => Status::UsageError,
            WachError::PrecisionExhausted(_) => Status::PrecisionExhausted,
            _ => Status::CertifiedFailure,
        }
    }

    /// Failure beats exhaustion beats success.
    pub fn combine(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Success => 0,
            Status::PrecisionExhausted => 1,
            Status::CertifiedFailure => 2,
            Status::UsageError => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Success => "ok",
            Status::PrecisionExhausted => "precision-exhausted",
            Status::CertifiedFailure => "FAILED",
            Status::UsageError => "usage-error",
        }
    }
}

/// One command's outcome: a JSON document and its plain-text rendering.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub config: RunConfig,
    pub error: Option<String>,
    pub ledger: Value,
    pub result: Value,
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, status: Status, ledger: Value, result: Value, text: String) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            status,
            exit_code: status.exit_code(),
            config: config.clone(),
            error: None,
            ledger,
            result,
            text,
        }
    }

    pub fn from_error(command: &str, config: &RunConfig, e: &WachError) -> Self {
        let status = Status::of_error(e);
        let mut r = Report::new(
            command,
            config,
            status,
            Value::Null,
            Value::Null,
            format!("{command}: {}: {e}\n", status.label()),
        );
        r.error = Some(e.to_string());
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_precedence() {
        assert_eq!(Status::Success.exit_code(), 0);
        assert_eq!(Status::of_error(&WachError::Config("x".into())).exit_code(), 2);
        assert_eq!(Status::of_error(&WachError::PrecisionExhausted("x".into())).exit_code(), 3);
        let cv = WachError::ConsistencyViolation {
            degree: 1,
            index: vec![1],
            detail: "x".into(),
        };
        assert_eq!(Status::of_error(&cv).exit_code(), 1);
        assert_eq!(
            Status::PrecisionExhausted.combine(Status::CertifiedFailure),
            Status::CertifiedFailure
        );
        assert_eq!(Status::Success.combine(Status::PrecisionExhausted), Status::PrecisionExhausted);
    }

    #[test]
    fn json_carries_schema_and_config() {
        let r = Report::from_error("descend", &RunConfig::default(), &WachError::Config("bad".into()));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["exit_code"], 2);
        assert_eq!(v["config"]["p"], 3);
        assert!(v.get("text").is_none());
    }
}
