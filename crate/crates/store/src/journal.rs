use std::fs::{File, OpenOptions};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Result, StoreError};

pub(crate) const FILE_NAME: &str = "journal.ndjson";
pub(crate) const OP_SESSION: &str = "session.persist";
pub(crate) const OP_SCHEME_PUT: &str = "scheme.put";
pub(crate) const OP_SCHEME_TRANSITION: &str = "scheme.transition";

/// One line of the journal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JournalEntry {
    pub op: String,
    pub id: String,
    pub version: u64,
    pub timestamp: String,
    pub payload: Value,
}

fn parse(bytes: &[u8]) -> Result<Vec<JournalEntry>> {
    bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            serde_json::from_slice(line).map_err(|e| StoreError::Corrupt {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Reads the journal and returns an append handle. A final line without
/// its terminating newline is a write that never completed: it is dropped
/// and truncated away so the next append starts on a clean line.
pub(crate) fn open(path: &Path) -> Result<(Vec<JournalEntry>, File)> {
    let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        file.set_len(complete as u64)?;
        bytes.truncate(complete);
    }
    Ok((parse(&bytes)?, file))
}

pub(crate) fn read_all(path: &Path) -> Result<Vec<JournalEntry>> {
    let bytes = std::fs::read(path)?;
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    parse(&bytes[..complete])
}
