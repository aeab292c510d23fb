//! Append-only JSONL event log, one file per session.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;

use crate::session::Event;
use crate::ServerError;

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    /// Log file of session `id` inside `dir`.
    pub fn path_for(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.events.jsonl"))
    }

    /// Opens or creates the log and returns the events already in it.
    ///
    /// A final line cut short by a crash (no trailing newline, unparsable) is dropped.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), ServerError> {
        let io = |e| ServerError::Log {
            path: path.to_path_buf(),
            source: e,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io(e)),
        };
        let mut events = Vec::new();
        let mut good_len = 0;
        let mut offset = 0;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            offset += line.len();
            if line.trim().is_empty() {
                good_len = offset;
                continue;
            }
            match serde_json::from_str::<Event>(line) {
                Ok(e) => {
                    events.push(e);
                    good_len = offset;
                }
                Err(_) if !line.ends_with('\n') && offset == text.len() => {
                    warn!("{}: dropping truncated final record", path.display());
                }
                Err(e) => {
                    return Err(ServerError::Corrupt {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        if good_len < text.len() {
            file.set_len(good_len as u64).map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            events,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one event and syncs it to disk.
    pub fn append(&mut self, event: &Event) -> Result<(), ServerError> {
        let mut line = serde_json::to_string(event).expect("events serialize");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| ServerError::Log {
                path: self.path.clone(),
                source: e,
            })
    }
}
