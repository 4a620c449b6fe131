//! Report assembly and atomic artifact writing.
//!
//! Every command can emit a JSON report holding its resolved
//! configuration and results. Wall-clock facts live in a separate `run`
//! object, so two runs with the same configuration produce reports that
//! are byte-identical outside that one field. Files are written to a
//! temporary sibling and renamed into place, so a crash never leaves a
//! partial artifact at the target path.

use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

pub struct Reporter {
    started: Instant,
    timestamp_unix: u64,
}

impl Reporter {
    pub fn new() -> Reporter {
        Reporter {
            started: Instant::now(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Writes `{command, config, result, run}` as pretty JSON if a report
    /// path was requested.
    pub fn write(
        self,
        command: &str,
        config: Value,
        result: Value,
        path: Option<&Path>,
    ) -> std::io::Result<()> {
        let Some(path) = path else { return Ok(()) };
        let report = json!({
            "command": command,
            "config": config,
            "result": result,
            "run": {
                "timestamp_unix": self.timestamp_unix,
                "duration_seconds": self.started.elapsed().as_secs_f64(),
            },
        });
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn print_kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}
