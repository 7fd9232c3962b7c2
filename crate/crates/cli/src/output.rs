//! Result files and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

/// An output directory collecting the files one run writes.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    /// Creates `root` if needed and removes a manifest left by an earlier run,
    /// so the directory is uncommitted until this run finishes.
    pub fn prepare(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let manifest = root.join(MANIFEST);
        match fs::remove_file(&manifest) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(CliError::io(manifest, e)),
        }
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv(&mut self, name: &str) -> Result<CsvFile> {
        let path = self.root.join(name);
        let writer = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        self.written.push(name.to_string());
        Ok(CsvFile { path, writer })
    }

    pub fn text(&mut self, name: &str) -> Result<TextFile> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(TextFile {
            path,
            writer: BufWriter::new(file),
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::io(path, source)
}

pub struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvFile {
    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub struct TextFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl TextFile {
    pub fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.writer, "{s}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    /// SHA-256 of the resolved config as serialized in `config`.
    pub config_digest: String,
    pub root_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn describe_outputs(dir: &OutDir) -> Result<Vec<OutputEntry>> {
    dir.written()
        .iter()
        .map(|name| {
            let path = dir.root().join(name);
            let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            Ok(OutputEntry {
                path: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

/// Writes the manifest through a temporary file and a rename, so readers
/// see either no manifest or a complete one.
pub fn commit(dir: &OutDir, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.root().join(MANIFEST);
    let tmp = dir.root().join(format!(".{MANIFEST}.tmp"));
    let mut body = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    body.push(b'\n');
    fs::write(&tmp, &body).map_err(|e| CliError::io(&tmp, e))?;
    File::open(&tmp)
        .and_then(|f| f.sync_all())
        .map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
