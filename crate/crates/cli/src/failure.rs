//! Exit statuses and the machine-readable error report.

use lctsr::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spec,
    Numerical,
    Acceptance,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Spec => 2,
            Kind::Numerical => 3,
            Kind::Acceptance => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: Kind,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self {
            kind,
            exit_code: kind.exit_code(),
            stage: None,
            message: message.into(),
        }
    }

    pub fn spec(message: impl Into<String>) -> Self {
        Self::new(Kind::Spec, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(Kind::Numerical, message)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let stage = match &e {
            Error::Stage { stage, .. } => Some(stage.to_string()),
            _ => None,
        };
        let kind = match e.root() {
            Error::RankDeficient { .. }
            | Error::TooManyLocations { .. }
            | Error::CollinearLocations { .. }
            | Error::PencilRank { .. }
            | Error::NoConvergence(_)
            | Error::Underdetermined { .. } => Kind::Numerical,
            _ => Kind::Spec,
        };
        Self {
            stage,
            ..Self::new(kind, e.to_string())
        }
    }
}
