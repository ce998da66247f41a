//! Run configs: `{"scenario": name, "seed": u64, "params": {...}}`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Scenario parameter block; omitted fields take their defaults.
    #[serde(default)]
    pub params: Value,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::invalid(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Deserializes a parameter block, reporting the offending field as
/// `params.<path>`.
pub fn parse_params<T: DeserializeOwned>(value: &Value) -> Result<T, CliError> {
    let value = match value {
        Value::Null => Value::Object(Default::default()),
        v => v.clone(),
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "params".to_string() } else { format!("params.{inner}") };
        CliError::invalid(path, e.into_inner().to_string())
    })
}

/// Fails with `params.<field>` unless `ok`.
pub(crate) fn ensure(ok: bool, field: &str, message: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(format!("params.{field}"), message))
    }
}
