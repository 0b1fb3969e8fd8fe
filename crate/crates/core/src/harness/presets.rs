//! Named built-in experiment configurations, embedded at compile time.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use std::path::Path;

/// Built-in experiment names accepted anywhere a config path is expected.
pub const PRESET_NAMES: [&str; 6] = [
    "ring-logistic",
    "clustered-least-squares",
    "wide-random-logistic",
    "gossip-line-fit",
    "pair-static",
    "quad-periodic",
];

/// Loads a built-in configuration by name.
pub fn load_preset(name: &str) -> Result<ExperimentConfig> {
    let text = match name {
        "ring-logistic" => include_str!("../../presets/ring-logistic.toml"),
        "clustered-least-squares" => include_str!("../../presets/clustered-least-squares.toml"),
        "wide-random-logistic" => include_str!("../../presets/wide-random-logistic.toml"),
        "gossip-line-fit" => include_str!("../../presets/gossip-line-fit.toml"),
        "pair-static" => include_str!("../../presets/pair-static.toml"),
        "quad-periodic" => include_str!("../../presets/quad-periodic.toml"),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    ExperimentConfig::parse(text)
}

/// Resolves a preset name or a filesystem path to a configuration.
pub fn resolve(name_or_path: &str) -> Result<ExperimentConfig> {
    if PRESET_NAMES.contains(&name_or_path) {
        return load_preset(name_or_path);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return ExperimentConfig::load(path);
    }
    Err(Error::Config(format!(
        "'{name_or_path}' is neither a preset nor an existing file; presets: {}",
        PRESET_NAMES.join(", ")
    )))
}
