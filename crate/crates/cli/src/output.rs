//! Atomic output writing with checksum bookkeeping. Every file is staged in
//! a temporary sibling and renamed into place, so an interrupted run never
//! leaves partially written outputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use parasol_core::grid::Field;

use crate::manifest::{sha256_hex, FileRecord};
use crate::CliError;

/// Writes `bytes` to `dir/name` via a temporary file plus rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Pipeline(format!("staging {name}: {e}")))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Pipeline(format!("writing {name}: {e}")))?;
    tmp.flush()
        .map_err(|e| CliError::Pipeline(format!("flushing {name}: {e}")))?;
    tmp.persist(dir.join(name))
        .map_err(|e| CliError::Pipeline(format!("publishing {name}: {e}")))?;
    Ok(())
}

/// Collects output files for one run directory, recording checksums.
pub struct OutputWriter {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Pipeline(format!("creating {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn records(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        write_atomic(&self.dir, name, text.as_bytes())?;
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len() as u64,
        });
        Ok(())
    }

    /// Writes a CSV file from a header and stringified rows.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let mut text = String::new();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    /// Writes a binary field snapshot.
    pub fn write_field(&mut self, name: &str, field: &Field, label: &str) -> Result<(), CliError> {
        let mut buf = Vec::new();
        field
            .write_snapshot(&mut buf, label)
            .map_err(|e| CliError::Pipeline(format!("snapshot {name}: {e}")))?;
        write_atomic(&self.dir, name, &buf)?;
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(&buf),
            bytes: buf.len() as u64,
        });
        Ok(())
    }
}

/// Canonical number rendering for CSV cells: shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
