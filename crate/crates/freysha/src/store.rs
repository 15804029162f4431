use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::ClassSpec;

/// Writes `contents` to a sibling temporary file, syncs it and renames it
/// over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = File::create(&tmp).map_err(Error::io(&tmp))?;
    file.write_all(contents).map_err(Error::io(&tmp))?;
    file.sync_all().map_err(Error::io(&tmp))?;
    drop(file);
    fs::rename(&tmp, path).map_err(Error::io(path))
}

/// Files of one job inside the checkpoint directory, keyed by class hash.
#[derive(Clone, Debug)]
pub struct JobFiles {
    pub checkpoint: PathBuf,
    pub manifest: PathBuf,
    pub log: PathBuf,
    pub report: PathBuf,
}

impl JobFiles {
    pub fn new(dir: &Path, class_hash: &str) -> Self {
        let stem = &class_hash[..16.min(class_hash.len())];
        JobFiles {
            checkpoint: dir.join(format!("{stem}.ckpt")),
            manifest: dir.join(format!("{stem}.job.json")),
            log: dir.join(format!("{stem}.log")),
            report: dir.join(format!("{stem}.report.json")),
        }
    }

    /// Files belonging to the checkpoint at `path`.
    pub fn for_checkpoint(path: &Path) -> Self {
        let dir = path.parent().unwrap_or(Path::new("."));
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        JobFiles {
            checkpoint: path.to_path_buf(),
            manifest: dir.join(format!("{stem}.job.json")),
            log: dir.join(format!("{stem}.log")),
            report: dir.join(format!("{stem}.report.json")),
        }
    }
}

/// Parameters a job was started with; stored next to its checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub class: ClassSpec,
    pub class_hash: String,
    pub precision: u32,
    pub step: u64,
    pub k: String,
    pub burden_max: u64,
    pub memory_budget: u64,
    #[serde(default)]
    pub max_terms: Option<u64>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(Error::json(path))?;
    text.push(b'\n');
    write_atomic(path, &text)
}

/// Append-only JSON-lines file shared between concurrent jobs.
#[derive(Debug)]
pub struct JsonLines {
    path: PathBuf,
    lock: Mutex<()>,
}

impl JsonLines {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        JsonLines {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut line = serde_json::to_vec(value).map_err(Error::json(&self.path))?;
        line.push(b'\n');
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(Error::io(dir))?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(Error::io(&self.path))?;
        file.write_all(&line).map_err(Error::io(&self.path))
    }

    pub fn read_all<T: DeserializeOwned>(&self) -> Result<Vec<T>> {
        read_json_lines(&self.path)
    }
}

pub fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path)(e)),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(Error::json(path))?);
    }
    Ok(out)
}
