//! Expands an experiment's run grid, executes every run, and writes residual
//! histories plus a summary as CSV.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::objectives::solve_centralized;
use crate::optimizer::{run, Method, RunTrace};
use ndarray::{Array1, Array2};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Coordinates of one run inside the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub method: Method,
    pub eta: f64,
    pub seed: u64,
}

/// One executed run; `trace` is absent when the iterates blew past the
/// divergence guard.
#[derive(Debug)]
pub struct RunRecord {
    pub key: RunKey,
    pub trace: Option<RunTrace>,
    pub wall_secs: f64,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.trace.is_none()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.trace.as_ref().and_then(|t| t.residuals.last().copied())
    }
}

/// Everything produced by one experiment.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub x_star: Array1<f64>,
    pub f_star: f64,
    pub records: Vec<RunRecord>,
    pub written: Vec<PathBuf>,
}

impl ExperimentOutcome {
    pub fn record(&self, method: Method, eta: f64, seed: u64) -> Option<&RunRecord> {
        self.records
            .iter()
            .find(|r| r.key.method == method && r.key.eta == eta && r.key.seed == seed)
    }
}

/// Runs the full grid of an experiment. When `out_dir` is given, writes one
/// `<name>-<method>-eta<eta>-s<seed>.csv` per run plus `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let n = cfg.graph.n();
    let problem = cfg.build_problem()?;
    let (x_star, f_star) = solve_centralized(&problem)?;
    let x0 = Array2::<f64>::zeros((n, problem.dim));
    let methods = cfg.methods()?;
    let mut records = Vec::new();
    for &seed in &cfg.run_seeds() {
        let seq = cfg.build_graphs(seed)?;
        for &method in &methods {
            for &eta in &cfg.run.etas {
                let started = Instant::now();
                let trace = match run(&problem, &seq, method, eta, &x0, &x_star.view(), cfg.horizon)
                {
                    Ok(trace) => Some(trace),
                    Err(Error::Diverged { .. }) => None,
                    Err(e) => return Err(e),
                };
                records.push(RunRecord {
                    key: RunKey { method, eta, seed },
                    trace,
                    wall_secs: started.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let mut outcome = ExperimentOutcome { x_star, f_star, records, written: Vec::new() };
    if let Some(dir) = out_dir {
        outcome.written = write_outputs(cfg, &outcome.records, dir)?;
    }
    Ok(outcome)
}

fn run_csv_name(cfg: &ExperimentConfig, key: &RunKey) -> String {
    format!("{}-{}-eta{}-s{}.csv", cfg.name, key.method.name(), key.eta, key.seed)
}

fn write_outputs(cfg: &ExperimentConfig, records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut summary = String::from("method,eta,seed,iters,final_residual,wall_secs,diverged\n");
    for record in records {
        let key = &record.key;
        match &record.trace {
            Some(trace) => {
                let path = dir.join(run_csv_name(cfg, key));
                fs::write(&path, trace_csv(trace))?;
                written.push(path);
                summary.push_str(&format!(
                    "{},{},{},{},{},{},false\n",
                    key.method.name(),
                    key.eta,
                    key.seed,
                    trace.residuals.len() - 1,
                    record.final_residual().unwrap_or(f64::NAN),
                    record.wall_secs,
                ));
            }
            None => {
                summary.push_str(&format!(
                    "{},{},{},0,,{},true\n",
                    key.method.name(),
                    key.eta,
                    key.seed,
                    record.wall_secs,
                ));
            }
        }
    }
    let summary_path = dir.join("summary.csv");
    fs::write(&summary_path, summary)?;
    written.push(summary_path);
    Ok(written)
}

fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("k,residual,tracking_gap\n");
    for (k, r) in trace.residuals.iter().enumerate() {
        if let Some(gap) = trace.tracking_gaps.get(k) {
            out.push_str(&format!("{k},{r},{gap}\n"));
        } else {
            out.push_str(&format!("{k},{r},\n"));
        }
    }
    out
}
