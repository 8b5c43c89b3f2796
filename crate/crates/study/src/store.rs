use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use meshqa_core::stats::VoteRecord;

use crate::config::DeviceReport;
use crate::order::SlotItem;
use crate::StudyError;

/// One line of the append-only store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        playlist_id: u32,
        device: DeviceReport,
        order: Vec<SlotItem>,
        created_ms: u64,
    },
    TrainingComplete {
        session_id: String,
        at_ms: u64,
    },
    Vote(VoteRecord),
    SessionComplete {
        session_id: String,
        code: String,
        at_ms: u64,
    },
}

/// JSON-lines event log. Every append is flushed and synced before it returns.
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    /// Opens (creating if needed) the log and replays it. A torn final line from an
    /// interrupted write is dropped with a warning and cut from the file.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), StudyError> {
        let io = |e: std::io::Error| StudyError::Store(format!("{}: {e}", path.display()));
        let file = OpenOptions::new().create(true).read(true).append(true).open(path).map_err(io)?;
        let mut events = Vec::new();
        let mut reader = BufReader::new(&file);
        let mut line = String::new();
        let (mut number, mut good_len) = (0, 0u64);
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 {
                break;
            }
            number += 1;
            if !line.ends_with('\n') {
                log::warn!("dropping torn last line {number} of {}", path.display());
                break;
            }
            good_len += n as u64;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str::<Event>(&line).map_err(|e| StudyError::Store(format!("{} line {number}: {e}", path.display())))?;
            events.push(event);
        }
        if file.metadata().map_err(io)?.len() > good_len {
            file.set_len(good_len).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            events,
        ))
    }

    pub fn append(&mut self, event: &Event) -> Result<(), StudyError> {
        let mut line = serde_json::to_string(event).map_err(|e| StudyError::Store(e.to_string()))?;
        line.push('\n');
        let io = |e: std::io::Error| StudyError::Store(format!("{}: {e}", self.path.display()));
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replays_and_tolerates_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        let (mut log, events) = EventLog::open(&path).unwrap();
        assert!(events.is_empty());
        let e = Event::TrainingComplete {
            session_id: "a".into(),
            at_ms: 5,
        };
        log.append(&e).unwrap();
        drop(log);
        std::fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"event\":\"vo").unwrap();
        let (mut log, events) = EventLog::open(&path).unwrap();
        assert_eq!(events, vec![e.clone()]);
        log.append(&e).unwrap();
        drop(log);
        let (_, events) = EventLog::open(&path).unwrap();
        assert_eq!(events, vec![e.clone(), e]);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        std::fs::write(&path, "garbage\n{}\n").unwrap();
        assert!(matches!(EventLog::open(&path), Err(StudyError::Store(_))));
    }
}
