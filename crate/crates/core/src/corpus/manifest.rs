//! Line-delimited JSON dataset manifest: one header object carrying the
//! schema version, then one object per example.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Label, Split};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub source_url: String,
    pub html_path: PathBuf,
    pub image_path: Option<PathBuf>,
    pub label: Option<Label>,
    pub split: Split,
    pub rows: usize,
    pub cols: usize,
    /// Outcome of the size filter at ingest time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passes_size_filter: Option<bool>,
    /// Set once the example has been rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderRecord>,
}

/// Per-image rendering record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderRecord {
    pub viewport_width: u32,
    pub width: u32,
    pub height: u32,
    /// Failure reason when the table could not be rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Seed and configuration fingerprint of the run that produced an artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub entries: Vec<LabeledExample>,
    pub provenance: Option<Provenance>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        DatasetManifest {
            schema_version: SCHEMA_VERSION,
            entries: Vec::new(),
            provenance: None,
        }
    }
}

impl DatasetManifest {
    pub fn new(entries: Vec<LabeledExample>) -> Self {
        DatasetManifest {
            entries,
            ..Default::default()
        }
    }

    pub fn get(&self, id: &str) -> Option<&LabeledExample> {
        self.entries.iter().find(|e| e.id == id)
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    manifest.check_unique_ids()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = Header {
        schema_version: manifest.schema_version,
        provenance: manifest.provenance.clone(),
    };
    let io = |e| Error::io(path, e);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n").map_err(io)?;
    for entry in &manifest.entries {
        serde_json::to_writer(&mut w, entry)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header_line = loop {
        match lines.next() {
            None => return Err(Error::Manifest { line: 1, reason: "missing header line".into() }),
            Some((_, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let header: Header = serde_json::from_str(&header_line).map_err(|e| Error::Manifest {
        line: 1,
        reason: format!("invalid header: {e}"),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: header.schema_version,
            expected: SCHEMA_VERSION,
        });
    }

    let mut entries = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LabeledExample = serde_json::from_str(&line).map_err(|e| Error::Manifest {
            line: i + 1,
            reason: e.to_string(),
        })?;
        entries.push(entry);
    }
    let manifest = DatasetManifest {
        schema_version: header.schema_version,
        entries,
        provenance: header.provenance,
    };
    manifest.check_unique_ids()?;
    Ok(manifest)
}
