//! Knowledge warehouse and scheme base.
//!
//! A store is a directory holding an append-only journal
//! (`journal.ndjson`, one JSON object per line with fields
//! `op, id, version, timestamp, payload`) plus one document file per
//! persisted session under `sessions/`. Scheme records move through the
//! knowledge lifecycle
//!
//! ```text
//! acquired -> represented -> selected  -> assimilated -> emitted
//!                         \-> generated -/
//! ```
//!
//! and every transition appends a new version; nothing already written is
//! rewritten. Only emitted schemes are offered for retrieval.

mod journal;
mod record;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use gdss_core::rank::compare_scores;
use gdss_core::{MethodId, SchemeDescriptor, SchemeLookup, SimilarScheme};
use thiserror::Error;

pub use journal::JournalEntry;
pub use record::{KnowledgeStatus, SchemeRecord, SessionRecord};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("record {0} already exists")]
    DuplicateId(String),
    #[error("no record {0}")]
    UnknownRecord(String),
    #[error("illegal transition {from} -> {to}")]
    IllegalTransition {
        from: KnowledgeStatus,
        to: KnowledgeStatus,
    },
    #[error("invalid record id {0:?}")]
    InvalidId(String),
    #[error("corrupt journal line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::DuplicateId(_) => "DUPLICATE_ID",
            StoreError::UnknownRecord(_) => "UNKNOWN_RECORD",
            StoreError::IllegalTransition { .. } => "ILLEGAL_TRANSITION",
            StoreError::InvalidId(_) => "INVALID_ID",
            StoreError::Corrupt { .. } => "CORRUPT_JOURNAL",
            StoreError::Io(_) => "IO_FAILURE",
        }
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

/// Time source for record timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    /// Every timestamp reads this instant; used for reproducible output.
    Fixed(DateTime<Utc>),
}

impl Clock {
    pub fn epoch() -> Self {
        Clock::Fixed(DateTime::<Utc>::UNIX_EPOCH)
    }

    fn now(&self) -> String {
        let t = match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        };
        t.to_rfc3339_opts(SecondsFormat::Millis, true)
    }
}

#[derive(Debug, Default)]
struct Index {
    sessions: Vec<String>,
    session_set: BTreeSet<String>,
    /// Every version of every scheme, oldest first.
    schemes: BTreeMap<String, Vec<SchemeRecord>>,
    /// Insertion sequence, used to break retrieval ties newest first.
    scheme_seq: BTreeMap<String, usize>,
}

impl Index {
    fn apply(&mut self, entry: &JournalEntry, line: usize) -> Result<()> {
        let corrupt = |reason: String| StoreError::Corrupt { line, reason };
        match entry.op.as_str() {
            journal::OP_SESSION => {
                if self.session_set.insert(entry.id.clone()) {
                    self.sessions.push(entry.id.clone());
                }
            }
            journal::OP_SCHEME_PUT | journal::OP_SCHEME_TRANSITION => {
                let record: SchemeRecord =
                    serde_json::from_value(entry.payload.clone()).map_err(|e| corrupt(e.to_string()))?;
                let seq = self.scheme_seq.len();
                self.scheme_seq.entry(record.id.clone()).or_insert(seq);
                self.schemes.entry(record.id.clone()).or_default().push(record);
            }
            other => return Err(corrupt(format!("unknown op {other}"))),
        }
        Ok(())
    }
}

pub fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

/// Single-writer, multi-reader file store.
///
/// Mutations serialize on the journal writer; readers work from the
/// in-memory index, which is only updated after a journal line has been
/// fully written.
#[derive(Debug)]
pub struct KnowledgeStore {
    root: PathBuf,
    writer: Mutex<File>,
    index: RwLock<Index>,
    clock: Clock,
}

impl KnowledgeStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        Self::open_with_clock(root, Clock::System)
    }

    pub fn open_with_clock(root: impl AsRef<Path>, clock: Clock) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("sessions"))?;
        let (entries, file) = journal::open(&root.join(journal::FILE_NAME))?;
        let mut index = Index::default();
        for (line, entry) in entries.iter().enumerate() {
            index.apply(entry, line + 1)?;
        }
        Ok(KnowledgeStore {
            root,
            writer: Mutex::new(file),
            index: RwLock::new(index),
            clock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.json"))
    }

    fn append(&self, file: &mut File, entry: &JournalEntry) -> Result<()> {
        let mut line = serde_json::to_vec(entry).expect("journal entries serialize");
        line.push(b'\n');
        file.write_all(&line)?;
        file.sync_data()?;
        Ok(())
    }

    /// Writes the session document and journals it. The document bytes
    /// written here are exactly what [`KnowledgeStore::load_session_bytes`]
    /// returns.
    pub fn persist_session(&self, session: &SessionRecord) -> Result<String> {
        check_id(&session.id)?;
        let mut file = self.writer.lock().expect("writer lock poisoned");
        if self.index.read().expect("index lock poisoned").session_set.contains(&session.id) {
            return Err(StoreError::DuplicateId(session.id.clone()));
        }
        let bytes = serde_json::to_vec(session).expect("session records serialize");
        let path = self.session_path(&session.id);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, &path)?;
        let entry = JournalEntry {
            op: journal::OP_SESSION.into(),
            id: session.id.clone(),
            version: 1,
            timestamp: self.clock.now(),
            payload: serde_json::json!({
                "path": format!("sessions/{}.json", session.id),
                "schemeRefs": session.scheme_refs,
            }),
        };
        self.append(&mut file, &entry)?;
        self.index.write().expect("index lock poisoned").apply(&entry, 0)?;
        Ok(session.id.clone())
    }

    pub fn load_session_bytes(&self, id: &str) -> Result<Vec<u8>> {
        if !self.index.read().expect("index lock poisoned").session_set.contains(id) {
            return Err(StoreError::UnknownRecord(id.to_string()));
        }
        Ok(fs::read(self.session_path(id))?)
    }

    pub fn load_session(&self, id: &str) -> Result<SessionRecord> {
        let bytes = self.load_session_bytes(id)?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            line: 0,
            reason: format!("session {id}: {e}"),
        })
    }

    /// Session ids in insertion order.
    pub fn session_ids(&self) -> Vec<String> {
        self.index.read().expect("index lock poisoned").sessions.clone()
    }

    /// Files a new scheme in the `acquired` state.
    pub fn put_scheme(
        &self,
        id: &str,
        descriptor: SchemeDescriptor,
        method: MethodId,
        result_order: Vec<String>,
    ) -> Result<SchemeRecord> {
        check_id(id)?;
        let mut file = self.writer.lock().expect("writer lock poisoned");
        if self.index.read().expect("index lock poisoned").schemes.contains_key(id) {
            return Err(StoreError::DuplicateId(id.to_string()));
        }
        let now = self.clock.now();
        let record = SchemeRecord {
            id: id.to_string(),
            descriptor,
            method,
            result_order,
            status: KnowledgeStatus::Acquired,
            version: 1,
            created_at: now.clone(),
            updated_at: now,
        };
        self.write_scheme(&mut file, journal::OP_SCHEME_PUT, &record)?;
        Ok(record)
    }

    fn write_scheme(&self, file: &mut File, op: &str, record: &SchemeRecord) -> Result<()> {
        let entry = JournalEntry {
            op: op.into(),
            id: record.id.clone(),
            version: record.version,
            timestamp: record.updated_at.clone(),
            payload: serde_json::to_value(record).expect("scheme records serialize"),
        };
        self.append(file, &entry)?;
        self.index.write().expect("index lock poisoned").apply(&entry, 0)
    }

    /// Moves a scheme along one lifecycle edge, appending a new version.
    pub fn transition_status(&self, id: &str, next: KnowledgeStatus) -> Result<SchemeRecord> {
        let mut file = self.writer.lock().expect("writer lock poisoned");
        let current = self.scheme(id).ok_or_else(|| StoreError::UnknownRecord(id.to_string()))?;
        if !current.status.can_move_to(next) {
            return Err(StoreError::IllegalTransition {
                from: current.status,
                to: next,
            });
        }
        let record = SchemeRecord {
            status: next,
            version: current.version + 1,
            updated_at: self.clock.now(),
            ..current
        };
        self.write_scheme(&mut file, journal::OP_SCHEME_TRANSITION, &record)?;
        Ok(record)
    }

    /// Files a freshly generated scheme and walks it to `emitted`.
    pub fn file_generated_scheme(
        &self,
        id: &str,
        descriptor: SchemeDescriptor,
        method: MethodId,
        result_order: Vec<String>,
    ) -> Result<SchemeRecord> {
        self.put_scheme(id, descriptor, method, result_order)?;
        let mut last = None;
        for status in [
            KnowledgeStatus::Represented,
            KnowledgeStatus::Generated,
            KnowledgeStatus::Assimilated,
            KnowledgeStatus::Emitted,
        ] {
            last = Some(self.transition_status(id, status)?);
        }
        Ok(last.expect("walked at least one edge"))
    }

    /// Latest version of a scheme.
    pub fn scheme(&self, id: &str) -> Option<SchemeRecord> {
        self.index
            .read()
            .expect("index lock poisoned")
            .schemes
            .get(id)
            .and_then(|v| v.last().cloned())
    }

    pub fn scheme_history(&self, id: &str) -> Vec<SchemeRecord> {
        self.index
            .read()
            .expect("index lock poisoned")
            .schemes
            .get(id)
            .cloned()
            .unwrap_or_default()
    }

    /// Emitted schemes ranked by descriptor cosine similarity, ties newest
    /// first.
    pub fn retrieve_similar_schemes(&self, descriptor: &SchemeDescriptor, k: usize) -> Vec<(SchemeRecord, f64)> {
        let index = self.index.read().expect("index lock poisoned");
        let mut hits: Vec<(SchemeRecord, f64, usize)> = index
            .schemes
            .iter()
            .filter_map(|(id, versions)| {
                let latest = versions.last()?;
                (latest.status == KnowledgeStatus::Emitted).then(|| {
                    (latest.clone(), descriptor.similarity(&latest.descriptor), index.scheme_seq[id])
                })
            })
            .collect();
        hits.sort_by(|a, b| {
            compare_scores(a.1, b.1)
                .then_with(|| b.0.created_at.cmp(&a.0.created_at))
                .then_with(|| b.2.cmp(&a.2))
        });
        hits.into_iter().take(k).map(|(r, s, _)| (r, s)).collect()
    }

    /// Raw journal contents, oldest first.
    pub fn journal(&self) -> Result<Vec<JournalEntry>> {
        let _guard = self.writer.lock().expect("writer lock poisoned");
        journal::read_all(&self.root.join(journal::FILE_NAME))
    }
}

impl SchemeLookup for KnowledgeStore {
    fn similar(&self, descriptor: &SchemeDescriptor, k: usize) -> Vec<SimilarScheme> {
        self.retrieve_similar_schemes(descriptor, k)
            .into_iter()
            .map(|(r, similarity)| SimilarScheme {
                id: r.id,
                method: r.method,
                result_order: r.result_order,
                similarity,
            })
            .collect()
    }
}
