use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::CliError;

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Minimal CSV builder. Fields here are numbers and identifiers, so no
/// quoting is needed.
pub struct Csv(String);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.0, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.0
    }
}

pub fn resolve(out: &Path) -> PathBuf {
    match std::env::var_os("ORTHOSPEC_OUTPUT_DIR") {
        Some(dir) if out.is_relative() => PathBuf::from(dir).join(out),
        _ => out.to_path_buf(),
    }
}

pub fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

#[derive(Serialize)]
pub struct Meta<'a> {
    pub schema: &'a str,
    pub version: &'a str,
    pub command: &'a str,
    pub argv: &'a [String],
    pub seed: u64,
    pub workers: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub elapsed_seconds: f64,
}

/// Write `body` to stdout, or to `path` with a `.meta.json` sidecar.
pub fn emit(body: &str, path: Option<&Path>, meta: &Meta) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout.write_all(body.as_bytes()).map_err(|e| CliError::Io("stdout".into(), e));
    };
    let path = resolve(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(parent.display().to_string(), e))?;
    }
    std::fs::write(&path, body).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let mut sidecar = path.clone().into_os_string();
    sidecar.push(".meta.json");
    let sidecar = PathBuf::from(sidecar);
    std::fs::write(&sidecar, json(meta)?).map_err(|e| CliError::Io(sidecar.display().to_string(), e))
}
