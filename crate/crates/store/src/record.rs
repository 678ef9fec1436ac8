use std::fmt;

use gdss_core::{MethodId, SchemeDescriptor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Lifecycle state of a stored scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeStatus {
    Acquired,
    Represented,
    Selected,
    Generated,
    Assimilated,
    Emitted,
}

impl KnowledgeStatus {
    pub const ALL: [KnowledgeStatus; 6] = [
        KnowledgeStatus::Acquired,
        KnowledgeStatus::Represented,
        KnowledgeStatus::Selected,
        KnowledgeStatus::Generated,
        KnowledgeStatus::Assimilated,
        KnowledgeStatus::Emitted,
    ];

    pub fn can_move_to(self, next: KnowledgeStatus) -> bool {
        use KnowledgeStatus::*;
        matches!(
            (self, next),
            (Acquired, Represented)
                | (Represented, Selected)
                | (Represented, Generated)
                | (Selected, Assimilated)
                | (Generated, Assimilated)
                | (Assimilated, Emitted)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeStatus::Acquired => "acquired",
            KnowledgeStatus::Represented => "represented",
            KnowledgeStatus::Selected => "selected",
            KnowledgeStatus::Generated => "generated",
            KnowledgeStatus::Assimilated => "assimilated",
            KnowledgeStatus::Emitted => "emitted",
        }
    }
}

impl fmt::Display for KnowledgeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A persisted decision session: the problem as submitted and the
/// pipeline report it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRecord {
    pub id: String,
    pub problem: Value,
    pub report: Value,
    #[serde(default)]
    pub scheme_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeRecord {
    pub id: String,
    pub descriptor: SchemeDescriptor,
    pub method: MethodId,
    pub result_order: Vec<String>,
    pub status: KnowledgeStatus,
    pub version: u64,
    pub created_at: String,
    pub updated_at: String,
}
