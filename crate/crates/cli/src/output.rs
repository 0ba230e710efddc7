//! Output directory layout, run manifest and crash-safe file writes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tphase::config::Config;

/// SHA-256 of the resolved configuration. Resolution fills in defaults and
/// fixes key order, so reordered or re-commented files hash the same.
pub fn config_hash(config: &Config) -> String {
    hex::encode(Sha256::digest(config.resolved_toml().as_bytes()))
}

/// Writes `bytes` to a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// `<base>/<command>-<first 12 hex digits of the config hash>/`.
#[derive(Clone, Debug)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(base: &Path, command: &str, hash: &str) -> io::Result<Self> {
        let root = base.join(format!("{command}-{}", &hash[..12]));
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.file(name), bytes)
    }

    /// Header plus rows, newline terminated.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> io::Result<()> {
        let mut text = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
        text.push_str(header);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn write_snapshot(&self, name: &str, field: &str, time: f64, data: &tphase::Field) -> io::Result<()> {
        let mut buf = Vec::new();
        tphase::snapshot::write_snapshot(&mut buf, field, time, data)?;
        self.write(name, &buf)
    }
}

/// Provenance of one invocation, written before any result file and
/// rewritten with the outcome once the command finishes.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: String,
    pub config_hash: String,
    pub output_dir: String,
    pub jobs: usize,
    pub snapshot_every: usize,
    pub started_unix: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_unix: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    /// Resolved parameter dump.
    pub config: Config,
}

impl RunManifest {
    pub const FILE: &'static str = "manifest.toml";

    pub fn write(&self, dir: &OutputDir) -> io::Result<()> {
        let text = toml::to_string(self).map_err(io::Error::other)?;
        dir.write(Self::FILE, text.as_bytes())
    }

    pub fn finish(&mut self, dir: &OutputDir, outcome: &str) -> io::Result<()> {
        self.finished_unix = Some(unix_now());
        self.outcome = Some(outcome.to_owned());
        self.write(dir)
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn hash_ignores_key_order_and_comments() {
        let a = Config::parse("[surface_tensions]\nsigma12 = 1.0\nsigma13 = 2.0\nsigma23 = 2.0\n").unwrap();
        let b = Config::parse(
            "# same thing\n[numerics]\nepsilon = 0.05\n[surface_tensions]\nsigma23 = 2.0\nsigma13 = 2.0\nsigma12 = 1.0\n",
        )
        .unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c = Config::parse("[surface_tensions]\nsigma12 = 1.0\nsigma13 = 2.0\nsigma23 = 2.5\n").unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }
}
