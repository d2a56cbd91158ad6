//! Append-only store of submission records, one JSON-lines file per
//! `(student, language)`.
//!
//! Layout: `<root>/<sha256(student_id)>/<language>.jsonl`. The raw student
//! id is never written to disk.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::penalty::SubmissionRecord;
use crate::taxonomy::IssueKey;

#[derive(Debug, thiserror::Error)]
pub enum HistoryError {
    #[error("history I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid submission record: {0}")]
    InvalidRecord(String),
}

/// On-disk line format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredRecord {
    timestamp: DateTime<Utc>,
    language: String,
    issue_keys: Vec<IssueKey>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryWindow {
    /// Newest first.
    pub records: Vec<SubmissionRecord>,
    /// One entry per skipped corrupt line.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct HistoryStore {
    root: PathBuf,
}

pub fn student_token(student_id: &str) -> String {
    hex::encode(Sha256::digest(student_id.as_bytes()))
}

fn valid_language(language: &str) -> bool {
    !language.is_empty()
        && language.chars().all(|c| {
            c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-' || c == '+'
        })
}

impl HistoryStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record_path(&self, student_id: &str, language: &str) -> PathBuf {
        self.root
            .join(student_token(student_id))
            .join(format!("{language}.jsonl"))
    }

    fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HistoryError + '_ {
        move |source| HistoryError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn append(&self, record: &SubmissionRecord) -> Result<(), HistoryError> {
        if record.student_id.is_empty() {
            return Err(HistoryError::InvalidRecord("empty student id".into()));
        }
        if !valid_language(&record.language) {
            return Err(HistoryError::InvalidRecord(format!(
                "invalid language `{}`",
                record.language
            )));
        }
        if record
            .issue_keys
            .iter()
            .any(|k| k.inspector.is_empty() || k.rule_id.is_empty())
        {
            return Err(HistoryError::InvalidRecord("empty issue key".into()));
        }

        let path = self.record_path(&record.student_id, &record.language);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(Self::io_err(dir))?;
        }
        let mut line = serde_json::to_string(&StoredRecord {
            timestamp: record.timestamp,
            language: record.language.clone(),
            issue_keys: record.issue_keys.clone(),
        })
        .map_err(|e| HistoryError::InvalidRecord(e.to_string()))?;
        line.push('\n');

        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(Self::io_err(&path))?;
        file.lock().map_err(Self::io_err(&path))?;
        let written = file
            .write_all(line.as_bytes())
            .and_then(|_| file.sync_data());
        let _ = file.unlock();
        written.map_err(Self::io_err(&path))
    }

    /// Up to `window` most recent records for the key, newest first.
    pub fn load_window(
        &self,
        student_id: &str,
        language: &str,
        window: usize,
    ) -> Result<HistoryWindow, HistoryError> {
        if window == 0 || !valid_language(language) {
            return Ok(HistoryWindow::default());
        }
        let path = self.record_path(student_id, language);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(HistoryWindow::default()),
            Err(e) => return Err(Self::io_err(&path)(e)),
        };
        file.lock_shared().map_err(Self::io_err(&path))?;

        let mut out = HistoryWindow::default();
        let mut records = Vec::new();
        for (i, line) in BufReader::new(&file).lines().enumerate() {
            let line = match line {
                Ok(l) => l,
                Err(e) if e.kind() == ErrorKind::InvalidData => {
                    out.warnings
                        .push(format!("history line {}: not valid UTF-8; skipped", i + 1));
                    continue;
                }
                Err(e) => {
                    let _ = file.unlock();
                    return Err(Self::io_err(&path)(e));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<StoredRecord>(&line) {
                Ok(r) if r.language == language => records.push(SubmissionRecord {
                    student_id: student_id.to_string(),
                    language: r.language,
                    timestamp: r.timestamp,
                    issue_keys: r.issue_keys,
                }),
                Ok(r) => out.warnings.push(format!(
                    "history line {}: record for language `{}`; skipped",
                    i + 1,
                    r.language
                )),
                Err(e) => out.warnings.push(format!(
                    "history line {}: corrupt record ({e}); skipped",
                    i + 1
                )),
            }
        }
        let _ = file.unlock();

        out.records = records.into_iter().rev().take(window).collect();
        Ok(out)
    }
}
