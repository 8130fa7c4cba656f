//! Layered settings: command-line flags, then the config file, then
//! environment variables, then built-in defaults.

use std::path::{Path, PathBuf};

use graphblocks_harness::EndpointConfig;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// Contents of `--config FILE` (TOML, or JSON when the name ends in `.json`).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub bench: BenchSection,
    /// Any subset of the endpoint fields.
    pub endpoint: Option<Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub max_ticks: Option<u64>,
    pub max_iterations_per_loop: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub ablations: Option<String>,
    pub mode: Option<String>,
    pub runs: Option<u32>,
    pub parallel: Option<usize>,
    pub fixtures: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
}

pub const ENV_SEED: &str = "GRAPHBLOCKS_SEED";
pub const ENV_MAX_TICKS: &str = "GRAPHBLOCKS_MAX_TICKS";
pub const ENV_PARALLEL: &str = "GRAPHBLOCKS_PARALLEL";
pub const ENV_FIXTURES: &str = "GRAPHBLOCKS_FIXTURES";
pub const ENV_BASE_URL: &str = "GRAPHBLOCKS_BASE_URL";
pub const ENV_MODEL: &str = "GRAPHBLOCKS_MODEL";

fn parse_structured<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = crate::read(path)?;
    let bad = |message: String| CliError::Usage(format!("{}: {message}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    path.map_or_else(|| Ok(FileConfig::default()), parse_structured)
}

/// Reads a variable, treating unset and empty alike. A value that does not
/// parse is a usage error rather than silently ignored.
pub fn env<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError> {
    match std::env::var(name) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{name}: cannot parse `{v}`"))),
        _ => Ok(None),
    }
}

/// Defaults, overlaid by env, then the `[endpoint]` section, then the
/// dedicated endpoint file.
pub fn endpoint(section: Option<&Value>, file: Option<&Path>) -> Result<EndpointConfig, CliError> {
    let mut base = EndpointConfig::default();
    if let Some(url) = env::<String>(ENV_BASE_URL)? {
        base.base_url = url;
    }
    if let Some(model) = env::<String>(ENV_MODEL)? {
        base.model = model;
    }
    let mut merged = serde_json::to_value(&base).expect("config serializes");
    let from_file = file.map(parse_structured::<Value>).transpose()?;
    for layer in [section, from_file.as_ref()].into_iter().flatten() {
        let Value::Object(fields) = layer else {
            return Err(CliError::Usage("endpoint config must be a table".into()));
        };
        for (k, v) in fields {
            merged[k] = v.clone();
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(format!("endpoint config: {e}")))
}
