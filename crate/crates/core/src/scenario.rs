//! JSON scenario files and the bundled reference dataset.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_instance, AttackerParams, DefenderBudgets, DefenderWeights, EncryptionAlgorithm,
    GameInstance, ValidationReport,
};
use crate::robust::{RobustError, ScenarioSet};

pub const SCHEMA_VERSION: &str = "1";

/// Source of the bundled dataset with eight algorithms and 38 attack rows.
pub const PAPER_DATASET_JSON: &str = include_str!("../data/paper_dataset.json");

/// On-disk form of a [`GameInstance`] plus an optional scenario budget list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: String,
    pub algorithms: Vec<EncryptionAlgorithm>,
    pub weights: DefenderWeights,
    pub budgets: DefenderBudgets,
    pub attacker: AttackerParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_budgets: Option<Vec<f64>>,
}

impl ScenarioFile {
    pub fn from_instance(instance: &GameInstance, scenarios: Option<&ScenarioSet>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            algorithms: instance.algorithms.clone(),
            weights: instance.weights,
            budgets: instance.budgets.clone(),
            attacker: instance.attacker,
            scenario_budgets: scenarios.map(|s| s.budgets().to_vec()),
        }
    }

    pub fn instance(&self) -> GameInstance {
        GameInstance {
            algorithms: self.algorithms.clone(),
            weights: self.weights,
            budgets: self.budgets.clone(),
            attacker: self.attacker,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version \"{0}\" (expected \"1\")")]
    UnsupportedVersion(String),
    #[error("invalid scenario:\n{0}")]
    Validation(ValidationReport),
    #[error("scenario_budgets: {0}")]
    Scenarios(RobustError),
}

/// A validated instance and its scenario budgets, if the file lists any.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub instance: GameInstance,
    pub scenarios: Option<ScenarioSet>,
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<LoadedScenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::UnsupportedVersion(file.schema_version));
    }
    let instance = file.instance();
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(ScenarioError::Validation(report));
    }
    let scenarios = file
        .scenario_budgets
        .map(ScenarioSet::new)
        .transpose()
        .map_err(ScenarioError::Scenarios)?;
    Ok(LoadedScenario {
        instance,
        scenarios,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn scenario_json(instance: &GameInstance, scenarios: Option<&ScenarioSet>) -> String {
    let file = ScenarioFile::from_instance(instance, scenarios);
    serde_json::to_string_pretty(&file).expect("scenario files always serialize")
}

pub fn save_scenario(
    path: impl AsRef<Path>,
    instance: &GameInstance,
    scenarios: Option<&ScenarioSet>,
) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    let mut text = scenario_json(instance, scenarios);
    text.push('\n');
    fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The bundled dataset: Table-style parameters for eight algorithms, attacker
/// budget 40, breach value 300 and scenario budgets 11, 15, 20, 25, 30.
pub fn paper_dataset() -> LoadedScenario {
    parse_scenario(PAPER_DATASET_JSON).expect("bundled dataset is valid")
}
