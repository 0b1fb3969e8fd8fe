//! Experiment configuration, built-in presets, a batch runner with CSV
//! output, rate estimation, and plot-script emission.

pub mod config;
pub mod plots;
pub mod presets;
pub mod ratefit;
pub mod runner;

pub use config::{ExperimentConfig, GraphConfig, ProblemConfig, RunConfig};
pub use plots::emit_plot_script;
pub use presets::{load_preset, resolve, PRESET_NAMES};
pub use ratefit::{fit_rate, grid_search_eta, GridOutcome, RateFit};
pub use runner::{run_experiment, ExperimentOutcome, RunKey, RunRecord};
