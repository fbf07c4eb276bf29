use mu_core::kb::{Location, SourceDiagnostic};
use mu_core::network::PropagationError;
use mu_core::planner::WorkupError;
use mu_core::query::QueryError;
use serde::{Deserialize, Serialize};

/// Error body of every failed protocol call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ServiceError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

pub mod codes {
    pub const UNKNOWN_KB: &str = "unknown-kb";
    pub const INVALID_KB: &str = "invalid-kb";
    pub const UNKNOWN_SESSION: &str = "unknown-session";
    pub const SESSION_TERMINATED: &str = "session-terminated";
    pub const UNKNOWN_FINDING: &str = "unknown-finding";
    pub const OUT_OF_DOMAIN_VALUE: &str = "out-of-domain-value";
    pub const INCONSISTENT_EVIDENCE: &str = "inconsistent-evidence";
    pub const OBSERVATION_OUTSIDE_YIELDS: &str = "observation-outside-yields";
    pub const MALFORMED_REQUEST: &str = "malformed-request";
    pub const UNKNOWN_NODE: &str = "unknown-node";
    pub const UNKNOWN_PARAMETER: &str = "unknown-parameter";
    pub const WRONG_KIND: &str = "wrong-kind";
    pub const STATE_SPACE_TOO_LARGE: &str = "state-space-too-large";
    pub const EVALUATION_ERROR: &str = "evaluation-error";
    pub const CORRUPT_LOG: &str = "corrupt-log";
    pub const STORAGE_ERROR: &str = "storage-error";
    pub const INTERNAL_ERROR: &str = "internal-error";
    pub const NOT_FOUND: &str = "not-found";
}

impl ServiceError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ServiceError {
            code: code.to_string(),
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, location: Location) -> Self {
        self.location = Some(location);
        self
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(codes::MALFORMED_REQUEST, message)
    }

    pub fn from_diagnostic(code: &str, d: &SourceDiagnostic) -> Self {
        Self::new(code, format!("{}: {}", d.code, d.message)).at(d.location)
    }

    /// HTTP status for this error code.
    pub fn status(&self) -> u16 {
        match self.code.as_str() {
            codes::UNKNOWN_SESSION | codes::UNKNOWN_KB | codes::NOT_FOUND => 404,
            codes::MALFORMED_REQUEST => 400,
            codes::SESSION_TERMINATED | codes::INCONSISTENT_EVIDENCE => 409,
            codes::STORAGE_ERROR | codes::CORRUPT_LOG | codes::INTERNAL_ERROR => 500,
            _ => 422,
        }
    }
}

impl From<PropagationError> for ServiceError {
    fn from(e: PropagationError) -> Self {
        let code = match e {
            PropagationError::InconsistentEvidence { .. } => codes::INCONSISTENT_EVIDENCE,
            PropagationError::UnknownFinding(_) => codes::UNKNOWN_FINDING,
            PropagationError::OutOfDomain { .. } => codes::OUT_OF_DOMAIN_VALUE,
            PropagationError::Evaluation(_) => codes::EVALUATION_ERROR,
        };
        Self::new(code, e.to_string())
    }
}

impl From<QueryError> for ServiceError {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::UnknownNode(_) => codes::UNKNOWN_NODE,
            QueryError::UnknownParameter { .. } | QueryError::UnknownParameterInPredicate(_) => {
                codes::UNKNOWN_PARAMETER
            }
            QueryError::WrongKind { .. } => codes::WRONG_KIND,
            QueryError::StateSpaceTooLarge { .. } => codes::STATE_SPACE_TOO_LARGE,
            QueryError::Propagation(p) => return p.clone().into(),
        };
        Self::new(code, e.to_string())
    }
}

impl From<WorkupError> for ServiceError {
    fn from(e: WorkupError) -> Self {
        match e {
            WorkupError::Propagation(p) => p.into(),
            WorkupError::Query(q) => q.into(),
            WorkupError::ObservationOutsideYields { .. } => {
                Self::new(codes::OBSERVATION_OUTSIDE_YIELDS, e.to_string())
            }
            other => Self::new(codes::INTERNAL_ERROR, other.to_string()),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        Self::new(codes::STORAGE_ERROR, e.to_string())
    }
}
