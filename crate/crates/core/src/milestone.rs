//! Persisted stage outputs: line-delimited JSON records, provenance
//! sidecars and stage manifests.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilestoneError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(
        "{input} was produced by stage '{stage}' but its contents no longer match that \
         stage's manifest; rerun the stage or pass --force"
    )]
    StaleInput { input: PathBuf, stage: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MilestoneError + '_ {
    move |source| MilestoneError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Serializes records one JSON object per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, MilestoneError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| MilestoneError::Json {
                path: path.to_owned(),
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, MilestoneError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| MilestoneError::Json {
        path: path.to_owned(),
        line: 0,
        source,
    })
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serializes");
    out.push(b'\n');
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, MilestoneError> {
    Ok(sha256_hex(&fs::read(path).map_err(io_err(path))?))
}

/// Stable digest of a configuration value's JSON form.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("config serializes"))
}

/// Collects a stage's output files and moves them into place only when every
/// one has been written, so a failing stage leaves no partial outputs.
#[derive(Debug, Default)]
pub struct StagedWrite {
    files: Vec<(PathBuf, PathBuf)>,
}

impl StagedWrite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: &Path, bytes: &[u8]) -> Result<(), MilestoneError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".partial");
        let tmp = path.with_file_name(tmp_name);
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(file);
        w.write_all(bytes).map_err(io_err(&tmp))?;
        w.flush().map_err(io_err(&tmp))?;
        self.files.push((tmp, path.to_owned()));
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(_, p)| p.as_path())
    }

    pub fn commit(mut self) -> Result<(), MilestoneError> {
        for (tmp, path) in std::mem::take(&mut self.files) {
            fs::rename(&tmp, &path).map_err(io_err(&path))?;
        }
        Ok(())
    }
}

impl Drop for StagedWrite {
    fn drop(&mut self) {
        for (tmp, _) in &self.files {
            let _ = fs::remove_file(tmp);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Sample,
    Preprocess,
    Compose,
    Weights,
    Evaluate,
    Report,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Sample => "sample",
            Stage::Preprocess => "preprocess",
            Stage::Compose => "compose",
            Stage::Weights => "weights",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one stage run. Files are identified by content digest; no
/// clock time is recorded, so identical reruns produce identical manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: Stage,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub config_digest: String,
}

impl StageManifest {
    pub fn file_name(stage: Stage) -> String {
        format!("{}.manifest.json", stage.name())
    }
}

pub fn input_digest(path: &Path) -> Result<FileDigest, MilestoneError> {
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: file_sha256(path)?,
    })
}

pub fn output_digest(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
    }
}

/// Looks for a manifest next to `input` that lists it as an output and
/// checks the recorded digest against the file's current contents.
/// Returns the producing stage's config digest, if any manifest claims the
/// file.
pub fn verify_input(input: &Path, force: bool) -> Result<Option<String>, MilestoneError> {
    let dir = match input.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_owned(),
        _ => PathBuf::from("."),
    };
    let Ok(entries) = fs::read_dir(&dir) else {
        return Ok(None);
    };
    let mut manifests: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".manifest.json"))
        })
        .collect();
    manifests.sort();
    let name = input.file_name();
    for path in manifests {
        let Ok(manifest) = read_json::<StageManifest>(&path) else {
            continue;
        };
        let Some(out) = manifest
            .outputs
            .iter()
            .find(|o| Path::new(&o.path).file_name() == name)
        else {
            continue;
        };
        if !force && file_sha256(input)? != out.sha256 {
            return Err(MilestoneError::StaleInput {
                input: input.to_owned(),
                stage: manifest.stage.name().to_owned(),
            });
        }
        return Ok(Some(manifest.config_digest));
    }
    Ok(None)
}
