//! Line-delimited JSON interchange for sequences, scores and labels.
//!
//! One record per line, UTF-8. Blank lines are skipped; parse errors carry the 1-based
//! line number.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LabelSource, LabelValue};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl IoError {
    pub fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn record(path: &Path, line: usize, message: impl Into<String>) -> Self {
        IoError::Record {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

/// A label as exchanged with the CLI and the label service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub sequence_id: String,
    pub value: LabelValue,
    #[serde(default = "default_source")]
    pub source: LabelSource,
}

fn default_source() -> LabelSource {
    LabelSource::HumanOracle
}

/// Reads every record, paired with its line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, IoError> {
    let file = File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::file(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(&line).map_err(|e| IoError::record(path, i + 1, e.to_string()))?;
        out.push((i + 1, record));
    }
    Ok(out)
}

pub fn write_jsonl<'a, T, I>(path: &Path, records: I) -> Result<(), IoError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)
            .map_err(|e| IoError::file(path, std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| IoError::file(path, e))?;
    }
    w.flush().map_err(|e| IoError::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnomalyScore, Sequence};

    #[test]
    fn reports_line_of_bad_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        std::fs::write(&path, "{\"sequence_id\":\"a\",\"values\":[1.0]}\n\nnot json\n").unwrap();
        let err = read_jsonl::<AnomalyScore>(&path).unwrap_err();
        assert!(matches!(err, IoError::Record { line: 3, .. }), "{err}");
    }

    #[test]
    fn round_trips_sequences() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.jsonl");
        let seqs = vec![
            Sequence {
                id: "a".into(),
                duration_s: 10.0,
                channels: vec![vec![0.1, 0.2], vec![0.3, -0.4]],
                truth: Some(LabelValue::Anomalous),
            },
            Sequence {
                id: "b".into(),
                duration_s: 5.0,
                channels: vec![vec![1.0, 2.0]],
                truth: None,
            },
        ];
        write_jsonl(&path, &seqs).unwrap();
        let back: Vec<Sequence> = read_jsonl(&path).unwrap().into_iter().map(|(_, s)| s).collect();
        assert_eq!(back, seqs);
    }

    #[test]
    fn label_source_defaults_to_human() {
        let r: LabelRecord = serde_json::from_str(r#"{"sequence_id":"x","value":"nominal"}"#).unwrap();
        assert_eq!(r.source, LabelSource::HumanOracle);
    }
}
