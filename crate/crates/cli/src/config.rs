//! Versioned JSON run configs.
//!
//! Every file is a JSON object with `"schema": 1`; the remaining keys are the
//! command's parameters. Omitted optional keys take their documented
//! defaults, and running without `--config` uses the built-in default for
//! the command, identical to the files under `configs/`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use hql_core::pde::{BoundaryData, Operator, ProblemSpec, SolverOptions};

use crate::error::CliError;

pub const SCHEMA_VERSION: u64 = 1;

/// Parameters of `hql solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::new(2, 33, 1.0, Operator::Quotient21, 1.0, BoundaryData::ExactCubic { a: 3.0 }),
            solver: SolverOptions::default(),
        }
    }
}

/// A parsed config and whether it carries a seed (from the file or `--seed`).
#[derive(Debug)]
pub struct Loaded<T> {
    pub config: T,
    pub seeded: bool,
}

/// Reads `path` (or the default), checks the schema field, applies a
/// `--seed` override, and deserializes.
pub fn load<T>(path: Option<&Path>, seed: Option<u64>) -> Result<Loaded<T>, CliError>
where
    T: DeserializeOwned + Serialize + Default,
{
    let mut map = match path {
        None => match serde_json::to_value(T::default()) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("configs serialize to objects"),
        },
        Some(p) => read_object(p)?,
    };
    let seeded = seed.is_some() || map.contains_key("seed");
    if let Some(s) = seed {
        map.insert("seed".into(), Value::from(s));
    }
    let config = serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    Ok(Loaded { config, seeded })
}

fn read_object(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Usage(format!("{}: config must be a JSON object", path.display())));
    };
    match map.remove("schema") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(map),
        Some(v) => Err(CliError::Usage(format!("unsupported config schema {v}, expected {SCHEMA_VERSION}"))),
        None => Err(CliError::Usage(format!("config is missing \"schema\": {SCHEMA_VERSION}"))),
    }
}

/// `value` as a JSON object with the schema field first, for echoing the
/// effective config into outputs.
pub fn with_schema<T: Serialize>(value: &T) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), Value::from(SCHEMA_VERSION));
    if let Ok(Value::Object(m)) = serde_json::to_value(value) {
        out.extend(m);
    }
    Value::Object(out)
}
