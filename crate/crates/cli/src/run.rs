//! Output directory bookkeeping and the JSON manifest.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub description: String,
    /// Grid sizes, time steps, probe times and the like behind the numbers.
    pub resolution: Value,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    /// The only non-deterministic field.
    created: String,
    config: &'a Value,
    outputs: &'a [OutputEntry],
    results: &'a Map<String, Value>,
    exit_code: i32,
}

/// Collects outputs of one command and writes `manifest.json` at the end.
pub struct Run {
    pub out: PathBuf,
    command: String,
    config: Value,
    outputs: Vec<OutputEntry>,
    pub results: Map<String, Value>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

impl Run {
    pub fn new(out: &Path, command: &str, config: Value) -> CliResult<Run> {
        fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        Ok(Run {
            out: out.to_path_buf(),
            command: command.to_string(),
            config,
            outputs: Vec::new(),
            results: Map::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes a file through `write` and records it.
    pub fn emit(
        &mut self,
        name: &str,
        description: &str,
        resolution: Value,
        write: impl FnOnce(&mut BufWriter<fs::File>) -> exterior_wave_core::Result<()>,
    ) -> CliResult<()> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        write(&mut w).map_err(|e| io_err(&path, e))?;
        std::io::Write::flush(&mut w).map_err(|e| io_err(&path, e))?;
        self.record(name, description, resolution);
        Ok(())
    }

    pub fn emit_json<T: Serialize>(&mut self, name: &str, description: &str, resolution: Value, value: &T) -> CliResult<()> {
        let path = self.path(name);
        exterior_wave_core::io::write_json(&path, value).map_err(|e| io_err(&path, e))?;
        self.record(name, description, resolution);
        Ok(())
    }

    pub fn record(&mut self, name: &str, description: &str, resolution: Value) {
        self.outputs.push(OutputEntry {
            file: name.to_string(),
            description: description.to_string(),
            resolution,
        });
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// Writes the manifest; called on success and on handled failures.
    pub fn finish(&self, exit_code: i32) -> CliResult<()> {
        let manifest = Manifest {
            tool: "exterior-wave-lab",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: &self.config,
            outputs: &self.outputs,
            results: &self.results,
            exit_code,
        };
        let path = self.path("manifest.json");
        exterior_wave_core::io::write_json(&path, &manifest).map_err(|e| io_err(&path, e))
    }
}
