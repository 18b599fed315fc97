//! JSON configuration file. Every key is optional; flags and environment
//! variables win over the file, the file wins over built-in defaults.

use std::path::Path;

use serde::Deserialize;

use prompt_matcher::engine::{ErrorPolicy, RunConfig};
use prompt_matcher::oracle::OracleConfig;
use prompt_matcher::selection::Strategy;
use prompt_matcher::Error;

pub const VALID_KEYS: &[&str] = &[
    "allow_requery",
    "budget",
    "chars_per_token",
    "error_policy",
    "exact_cap",
    "log_level",
    "mc_samples",
    "oracle",
    "planning_accuracy",
    "rounds",
    "seed",
    "stop_entropy",
    "strategy",
];

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub log_level: Option<String>,
    pub budget: Option<u64>,
    pub rounds: Option<u32>,
    pub strategy: Option<Strategy>,
    pub planning_accuracy: Option<f64>,
    pub exact_cap: Option<u32>,
    pub stop_entropy: Option<f64>,
    pub allow_requery: Option<bool>,
    pub error_policy: Option<ErrorPolicy>,
    pub mc_samples: Option<usize>,
    pub chars_per_token: Option<u32>,
    pub oracle: Option<OracleConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::MalformedInput(msg) => Error::MalformedInput(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::json("config", e))?;
        let Some(map) = value.as_object() else {
            return Err(Error::MalformedInput("config must be a JSON object".into()));
        };
        let unknown: Vec<&str> = map
            .keys()
            .map(String::as_str)
            .filter(|k| !VALID_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::MalformedInput(format!(
                "unknown config key(s) {}; valid keys: {}",
                unknown.join(", "),
                VALID_KEYS.join(", ")
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::MalformedInput(format!("config: {e}")))
    }
}

/// Run settings given on the command line (or through the environment).
#[derive(Debug, Default, Clone)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub rounds: Option<u32>,
    pub strategy: Option<Strategy>,
    pub planning_accuracy: Option<f64>,
    pub exact_cap: Option<u32>,
    pub stop_entropy: Option<f64>,
    pub allow_requery: bool,
    pub error_policy: Option<ErrorPolicy>,
    pub mc_samples: Option<usize>,
    pub chars_per_token: Option<u32>,
}

/// flags > file > defaults
pub fn merge(file: &FileConfig, flags: &RunOverrides) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        total_budget: flags.budget.or(file.budget).unwrap_or(d.total_budget),
        rounds_k: flags.rounds.or(file.rounds).unwrap_or(d.rounds_k),
        strategy: flags.strategy.or(file.strategy).unwrap_or(d.strategy),
        planning_accuracy: flags
            .planning_accuracy
            .or(file.planning_accuracy)
            .unwrap_or(d.planning_accuracy),
        seed: flags.seed.or(file.seed).unwrap_or(d.seed),
        exact_cap: flags.exact_cap.or(file.exact_cap).unwrap_or(d.exact_cap),
        stop_entropy: flags.stop_entropy.or(file.stop_entropy).or(d.stop_entropy),
        allow_requery: flags.allow_requery || file.allow_requery.unwrap_or(d.allow_requery),
        error_policy: flags.error_policy.or(file.error_policy).unwrap_or(d.error_policy),
        mc_samples: flags.mc_samples.or(file.mc_samples).or(d.mc_samples),
        chars_per_token: flags
            .chars_per_token
            .or(file.chars_per_token)
            .unwrap_or(d.chars_per_token),
    }
}
