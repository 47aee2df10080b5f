//! JSONL corpus files: one JSON object per line, blank lines ignored.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

/// Records that carry a stable string id.
pub trait HasId {
    fn id(&self) -> &str;
}

macro_rules! has_id {
    ($($t:ty => $f:ident),* $(,)?) => {
        $(impl HasId for $t {
            fn id(&self) -> &str {
                &self.$f
            }
        })*
    };
}

has_id!(
    crate::template::DescriptionTemplate => id,
    crate::template::DescriptionPair => id,
    crate::pipeline::BaseLetter => id,
    crate::pipeline::DraftRecord => id,
    crate::pipeline::IdentityRecord => id,
    crate::pipeline::LetterRecord => id,
    crate::pipeline::CotExemplar => id,
);

/// Parse every non-blank line of `path`. Errors cite the 1-based line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let file = File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| IoError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// [`read_jsonl`] plus a uniqueness check on ids.
pub fn read_records<T: DeserializeOwned + HasId>(path: &Path) -> Result<Vec<T>, IoError> {
    let records: Vec<T> = read_jsonl(path)?;
    check_unique(path, &records)?;
    Ok(records)
}

/// Line numbers here count records, which equals file lines when the file
/// has no blank lines.
pub fn check_unique<T: HasId>(path: &Path, records: &[T]) -> Result<(), IoError> {
    let mut seen = HashSet::new();
    for (i, r) in records.iter().enumerate() {
        if !seen.insert(r.id()) {
            return Err(IoError::DuplicateId {
                path: path.to_path_buf(),
                line: i + 1,
                id: r.id().to_string(),
            });
        }
    }
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), IoError> {
    let err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| IoError::Line {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(w, "{line}").map_err(err)?;
    }
    w.flush().map_err(err)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    std::fs::write(path, text).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::BaseLetter;

    #[test]
    fn round_trip_and_line_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/b.jsonl");
        let rows = vec![
            BaseLetter { id: "a".into(), text: "x".into() },
            BaseLetter { id: "b".into(), text: "y".into() },
        ];
        write_jsonl(&p, &rows).unwrap();
        assert_eq!(read_records::<BaseLetter>(&p).unwrap(), rows);

        std::fs::write(&p, "{\"id\":\"a\",\"text\":\"x\"}\n\n{oops\n").unwrap();
        let e = read_jsonl::<BaseLetter>(&p).unwrap_err();
        assert!(matches!(e, IoError::Line { line: 3, .. }), "{e}");

        std::fs::write(&p, "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n").unwrap();
        assert!(matches!(read_records::<BaseLetter>(&p), Err(IoError::DuplicateId { line: 2, .. })));
    }
}
