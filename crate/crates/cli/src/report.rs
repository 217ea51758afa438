//! Run reports: deterministic hashed section plus timings, atomic writes.

use serde::Serialize;
use serde_json::Value;
use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub details: Value,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>, details: Value) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Pass,
            details,
        }
    }

    pub fn fail(name: impl Into<String>, details: Value) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            details,
        }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, details: Value) -> Self {
        if ok {
            Self::pass(name, details)
        } else {
            Self::fail(name, details)
        }
    }

    pub fn inconclusive(name: impl Into<String>, details: Value) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Inconclusive,
            details,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub results: Vec<CheckResult>,
    /// Overall verdict: every check passed (inconclusive never passes).
    pub pass: bool,
    /// Hash of the deterministic section (everything above).
    pub hash: String,
    /// Wall-clock timings, excluded from the hash.
    pub timings_ms: Vec<(String, f64)>,
}

impl RunReport {
    pub fn new(
        command: impl Into<String>,
        seed: u64,
        config: Value,
        results: Vec<CheckResult>,
        timings_ms: Vec<(String, f64)>,
    ) -> Self {
        let command = command.into();
        let pass = results.iter().all(|r| r.status == CheckStatus::Pass);
        let hash = hash_section(&command, seed, &config, &results);
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            config,
            results,
            pass,
            hash,
            timings_ms,
        }
    }

    /// The deterministic part serialized canonically: identical runs with
    /// the same (config, seed) produce byte-identical strings.
    pub fn hashed_section(&self) -> String {
        canonical_section(&self.command, self.seed, &self.config, &self.results)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn canonical_section(command: &str, seed: u64, config: &Value, results: &[CheckResult]) -> String {
    let section = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "results": results,
    });
    serde_json::to_string(&section).expect("section serializes")
}

fn hash_section(command: &str, seed: u64, config: &Value, results: &[CheckResult]) -> String {
    let s = canonical_section(command, seed, config, results);
    let mut h = DefaultHasher::new();
    h.write(s.as_bytes());
    format!("{:016x}", h.finish())
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile_path(dir);
    let mut n = 0;
    while tmp.exists() {
        n += 1;
        tmp = dir.join(format!(".microsing-tmp-{n}"));
    }
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn tempfile_path(dir: &Path) -> std::path::PathBuf {
    dir.join(".microsing-tmp-0")
}
