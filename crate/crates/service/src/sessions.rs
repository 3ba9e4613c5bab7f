use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use atn_core::classifier::Prediction;

/// One red-team attempt as logged and exported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub session_id: String,
    pub seq: usize,
    /// `{"text": ...}` or `{"premise": ..., "hypothesis": ...}`
    pub input: Value,
    pub attack_applied: Option<String>,
    pub normalized: Option<Value>,
    pub classifier: String,
    pub raw_score: Prediction,
    pub normalized_score: Option<Prediction>,
    pub timestamp_ms: u64,
}

#[derive(Debug)]
pub enum AppendError {
    Full(usize),
    Io(std::io::Error),
}

/// Append-only attempt logs keyed by session id, optionally mirrored to a
/// JSONL file.
pub struct SessionStore {
    max_attempts: usize,
    sessions: Mutex<HashMap<String, Vec<Attempt>>>,
    file: Option<Mutex<File>>,
}

impl SessionStore {
    pub fn new(max_attempts: usize, persist: Option<&Path>) -> std::io::Result<Self> {
        let file = match persist {
            Some(p) => Some(Mutex::new(File::options().create(true).append(true).open(p)?)),
            None => None,
        };
        Ok(SessionStore { max_attempts, sessions: Mutex::new(HashMap::new()), file })
    }

    /// Appends an attempt, filling in its sequence number.
    pub fn append(&self, mut attempt: Attempt) -> Result<Attempt, AppendError> {
        let mut sessions = self.sessions.lock().expect("session lock");
        let log = sessions.entry(attempt.session_id.clone()).or_default();
        if log.len() >= self.max_attempts {
            return Err(AppendError::Full(self.max_attempts));
        }
        attempt.seq = log.len() + 1;
        if let Some(file) = &self.file {
            let line = serde_json::to_string(&attempt).expect("attempt serializes");
            writeln!(file.lock().expect("file lock"), "{line}").map_err(AppendError::Io)?;
        }
        log.push(attempt.clone());
        Ok(attempt)
    }

    /// The session as JSONL, one attempt per line.
    pub fn export(&self, session_id: &str) -> Option<String> {
        let sessions = self.sessions.lock().expect("session lock");
        sessions.get(session_id).map(|log| {
            log.iter()
                .map(|a| serde_json::to_string(a).expect("attempt serializes") + "\n")
                .collect()
        })
    }
}
