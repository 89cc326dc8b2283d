//! Run configuration: one JSON document, then `--key value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use exterior_wave_core::linear_radiation::{bump, RadiationProfile};
use exterior_wave_core::nonlinearity::{Nonlinearity, PowerWeight};
use exterior_wave_core::LabError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input files (exit 2).
    Config(String),
    /// Non-contraction, unexpected blow-up and similar (exit 3).
    Numerical(String),
    /// A `verify` suite found a failing case (exit 4).
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Check(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::NonContraction { .. }
            | LabError::Numerical(_)
            | LabError::Precondition(_)
            | LabError::Unattainable { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads the config file (if any) and applies the overrides in order.
pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Value> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !doc.is_object() {
        return Err(CliError::Config("config must be a JSON object".into()));
    }
    for (key, raw) in overrides {
        set_path(&mut doc, key, override_value(raw))?;
    }
    Ok(doc)
}

/// JSON if it parses, a list for comma-separated items, otherwise a string.
fn override_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|p| override_value(p.trim())).collect());
    }
    Value::String(raw.to_string())
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("cannot set `{key}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

pub type KeyValue = (String, String);

/// Splits `--key value` / `--key=value` pairs; `--config` is returned apart.
pub fn split_overrides(args: &[String]) -> CliResult<(Option<PathBuf>, Vec<KeyValue>)> {
    let mut config = None;
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Config(format!("expected `--key value`, found `{arg}`")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("`--{key}` needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        if key.is_empty() {
            return Err(CliError::Config("empty override key".into()));
        }
        if key == "config" {
            config = Some(PathBuf::from(value));
        } else {
            pairs.push((key.replace('-', "_"), value));
        }
    }
    Ok((config, pairs))
}

pub fn parse<T: DeserializeOwned>(doc: Value) -> CliResult<T> {
    serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))
}

/// Accepts `1.0` as well as `[0.5, 1, 2]`.
pub fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

pub fn nonlinearity(name: &str, weight: Option<PowerWeight>) -> CliResult<Nonlinearity> {
    Nonlinearity::from_selector(name, weight).map_err(|e| CliError::Config(e.to_string()))
}

/// One polynomial bump `amplitude·(1 - ((s - center)/half_width)²)⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
}

pub fn default_bumps() -> Vec<Bump> {
    vec![
        Bump { amplitude: 1.0, center: 1.0, half_width: 2.5 },
        Bump { amplitude: -0.6, center: -0.5, half_width: 2.0 },
    ]
}

/// Profile from a CSV file, or else from bumps on `[-extent, extent]`.
pub fn profile_source(csv: Option<&Path>, bumps: &[Bump], extent: f64, n: usize) -> CliResult<RadiationProfile> {
    if let Some(p) = csv {
        return exterior_wave_core::io::load_profile(p)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())));
    }
    if bumps.is_empty() {
        return Err(CliError::Config("no profile: give `profile_csv` or a non-empty `bumps` list".into()));
    }
    if bumps.iter().any(|b| b.half_width <= 0.0 || b.half_width.is_nan()) {
        return Err(CliError::Config("bump half widths must be positive".into()));
    }
    Ok(RadiationProfile::symmetric(extent, n, |s| {
        bumps.iter().map(|b| b.amplitude * bump((s - b.center) / b.half_width)).sum()
    })?)
}
