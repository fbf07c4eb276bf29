//! Append-only JSON-lines event logs, one file per session.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{codes, ServiceError};
use crate::event::SessionEvent;

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn path_for(dir: &Path, session: &str) -> PathBuf {
        dir.join(format!("{session}.jsonl"))
    }

    /// Opens (creating if needed) the log for appending.
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EventLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one event as a line and syncs it to disk.
    pub fn append(&mut self, event: &SessionEvent) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(event).map_err(|e| ServiceError::new(codes::INTERNAL_ERROR, e.to_string()))?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    /// Reads every event of a log. A torn final line, left by a crash in the
    /// middle of an append, is dropped; damage anywhere else is an error.
    pub fn read(path: &Path) -> Result<Vec<SessionEvent>, ServiceError> {
        let reader = BufReader::new(File::open(path)?);
        let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
        let mut events = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<SessionEvent>(line) {
                Ok(e) => events.push(e),
                Err(_) if i + 1 == lines.len() => break,
                Err(e) => {
                    return Err(ServiceError::new(
                        codes::CORRUPT_LOG,
                        format!("{} line {}: {e}", path.display(), i + 1),
                    ))
                }
            }
        }
        Ok(events)
    }

    /// Drops a torn tail so later appends start on a fresh line.
    pub fn rewrite(path: &Path, events: &[SessionEvent]) -> Result<(), ServiceError> {
        let tmp = path.with_extension("jsonl.tmp");
        {
            let mut f = File::create(&tmp)?;
            for e in events {
                let line = serde_json::to_string(e).map_err(|e| ServiceError::new(codes::INTERNAL_ERROR, e.to_string()))?;
                writeln!(f, "{line}")?;
            }
            f.sync_all()?;
        }
        std::fs::rename(tmp, path)?;
        Ok(())
    }
}
