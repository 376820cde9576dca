use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Command, Frame, Session};
use crate::config::BenchConfig;
use crate::{Error, Result};

/// One line of the append-only session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum LogEntry {
    Start { config: BenchConfig },
    Command { t: f64, command: Command },
    Tick { dt: f64, frame: Frame },
}

pub fn write_log<W: Write>(mut writer: W, entries: &[LogEntry]) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut writer, e).map_err(|e| Error::Io(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(reader: R) -> Result<Vec<LogEntry>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| Error::Input(format!("log line {}: {e}", i + 1)))?;
        out.push(entry);
    }
    Ok(out)
}

/// Appends entries to a JSONL file.
pub struct LogWriter {
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(LogWriter {
            out: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, entries: &[LogEntry]) -> Result<()> {
        for e in entries {
            serde_json::to_writer(&mut self.out, e).map_err(|e| Error::Io(e.to_string()))?;
            self.out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Re-runs a recorded session from its `start` entry, checking every recorded frame
/// against the recomputed one.
pub fn replay(entries: &[LogEntry]) -> Result<Session> {
    let mut iter = entries.iter().enumerate();
    let mut session = match iter.next() {
        Some((_, LogEntry::Start { config })) => Session::new(config.clone())?,
        _ => return Err(Error::Input("session log must begin with a start entry".into())),
    };
    for (i, entry) in iter {
        match entry {
            LogEntry::Start { .. } => {
                return Err(Error::Input(format!("entry {i}: unexpected second start entry")));
            }
            LogEntry::Command { command, .. } => {
                session
                    .command(command.clone())
                    .map_err(|e| Error::Input(format!("entry {i}: recorded command rejected on replay: {e}")))?;
            }
            LogEntry::Tick { dt, frame } => {
                let replayed = session.tick(*dt)?;
                if replayed != *frame {
                    return Err(Error::Input(format!("entry {i}: replay diverged at t = {}", frame.t)));
                }
            }
        }
    }
    Ok(session)
}
