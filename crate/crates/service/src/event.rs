use serde::{Deserialize, Serialize};

use crate::protocol::{QueryRequest, Recommendation};
use mu_core::planner::Disposition;

/// One line of a session's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Dense, starting at 1.
    pub seq: u64,
    /// RFC 3339, UTC.
    pub timestamp: String,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "payload")]
pub enum EventBody {
    Created { session: String, kb: String },
    Recommended { recommendation: Recommendation },
    FindingRecorded { finding: String, value: Option<String> },
    QueryRun { request: QueryRequest },
    Terminated { disposition: Disposition },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::Created { .. } => "created",
            EventBody::Recommended { .. } => "recommended",
            EventBody::FindingRecorded { .. } => "finding-recorded",
            EventBody::QueryRun { .. } => "query-run",
            EventBody::Terminated { .. } => "terminated",
        }
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
