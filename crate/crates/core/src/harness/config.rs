//! TOML-backed experiment descriptions: problem family, graph family, and the
//! grid of methods, step sizes, and replicate seeds to run.

use crate::error::{Error, Result};
use crate::graphs::{make_clustered, Digraph, GraphSequence};
use crate::objectives::{
    make_least_squares_problem, make_line_fit_problem, make_logistic_problem, Problem,
};
use crate::optimizer::Method;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One experiment: a fixed problem and graph family plus a run grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Base seed for problem data; also the default run seed.
    pub seed: u64,
    pub horizon: usize,
    pub problem: ProblemConfig,
    pub graph: GraphConfig,
    pub run: RunConfig,
}

/// Local objective family and its generator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    Logistic { samples: usize, dim: usize, lambda: f64 },
    LeastSquares { rows: usize, dim: usize },
    LineFit { noise_std: f64 },
}

impl ProblemConfig {
    pub fn dim(&self) -> usize {
        match self {
            ProblemConfig::Logistic { dim, .. } => *dim,
            ProblemConfig::LeastSquares { dim, .. } => *dim,
            ProblemConfig::LineFit { .. } => 2,
        }
    }

    pub fn build(&self, n: usize, seed: u64) -> Result<Problem> {
        match *self {
            ProblemConfig::Logistic { samples, dim, lambda } => {
                make_logistic_problem(n, samples, dim, lambda, seed)
            }
            ProblemConfig::LeastSquares { rows, dim } => {
                make_least_squares_problem(n, rows, dim, seed)
            }
            ProblemConfig::LineFit { noise_std } => make_line_fit_problem(n, noise_std, seed),
        }
    }
}

/// Communication graph family. Every variant exposes the window length `c`
/// over which unions are strongly connected (a declared hint for gossip).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphConfig {
    StaticComplete { n: usize },
    CycleSplit { n: usize, phases: usize },
    Clustered { clusters: usize, cluster_size: usize, c: usize },
    RandomCBounded { n: usize, c: usize },
    Gossip { n: usize, c_hint: usize },
}

impl GraphConfig {
    pub fn n(&self) -> usize {
        match self {
            GraphConfig::StaticComplete { n } => *n,
            GraphConfig::CycleSplit { n, .. } => *n,
            GraphConfig::Clustered { clusters, cluster_size, .. } => clusters * cluster_size,
            GraphConfig::RandomCBounded { n, .. } => *n,
            GraphConfig::Gossip { n, .. } => *n,
        }
    }

    pub fn c(&self) -> usize {
        match self {
            GraphConfig::StaticComplete { .. } => 1,
            GraphConfig::CycleSplit { phases, .. } => *phases,
            GraphConfig::Clustered { c, .. } => *c,
            GraphConfig::RandomCBounded { c, .. } => *c,
            GraphConfig::Gossip { c_hint, .. } => *c_hint,
        }
    }

    pub fn build(&self, seed: u64) -> Result<GraphSequence> {
        match *self {
            GraphConfig::StaticComplete { n } => Ok(GraphSequence::Static(Digraph::complete(n))),
            GraphConfig::CycleSplit { n, phases } => GraphSequence::cycle_split(n, phases),
            GraphConfig::Clustered { clusters, cluster_size, c } => {
                make_clustered(clusters, cluster_size, c, seed)
            }
            GraphConfig::RandomCBounded { n, c } => GraphSequence::random_c_bounded(n, c, seed),
            GraphConfig::Gossip { n, .. } => GraphSequence::gossip(n, seed),
        }
    }
}

/// Grid of runs: methods x etas x seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<String>,
    pub etas: Vec<f64>,
    /// Replicate seeds for randomized graph families; defaults to the base
    /// seed when empty.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("experiment name must not be empty".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.graph.n() == 0 {
            return Err(Error::Config("graph must have at least one node".into()));
        }
        if self.run.methods.is_empty() {
            return Err(Error::Config("run.methods must not be empty".into()));
        }
        self.methods()?;
        if self.run.etas.is_empty() {
            return Err(Error::Config("run.etas must not be empty".into()));
        }
        for &eta in &self.run.etas {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::Config(format!("step size {eta} must be finite and positive")));
            }
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.run.methods.iter().map(|s| Method::parse(s)).collect()
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        if self.run.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.run.seeds.clone()
        }
    }

    pub fn build_problem(&self) -> Result<Problem> {
        self.problem.build(self.graph.n(), self.seed)
    }

    pub fn build_graphs(&self, run_seed: u64) -> Result<GraphSequence> {
        self.graph.build(run_seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "sample"
seed = 7
horizon = 500

[problem]
kind = "logistic"
samples = 10
dim = 4
lambda = 0.5

[graph]
kind = "cycle-split"
n = 6
phases = 3

[run]
methods = ["tvab", "push-diging"]
etas = [0.01, 0.02]
seeds = [1, 2]
"#;

    #[test]
    fn sample_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.graph.n(), 6);
        assert_eq!(cfg.graph.c(), 3);
        assert_eq!(cfg.problem.dim(), 4);
        assert_eq!(cfg.run_seeds(), vec![1, 2]);
        assert_eq!(cfg.methods().unwrap().len(), 2);
        let text = cfg.to_toml().unwrap();
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(again.name, cfg.name);
        assert_eq!(again.run.etas, cfg.run.etas);
    }

    #[test]
    fn built_pieces_have_consistent_shapes() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let problem = cfg.build_problem().unwrap();
        assert_eq!(problem.n(), 6);
        assert_eq!(problem.dim, 4);
        let seq = cfg.build_graphs(1).unwrap();
        assert_eq!(seq.n(), 6);
    }

    #[test]
    fn unknown_method_is_rejected() {
        let text = SAMPLE.replace("push-diging", "warp-drive");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn empty_step_grid_is_rejected() {
        let text = SAMPLE.replace("etas = [0.01, 0.02]", "etas = []");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{SAMPLE}\n[extra]\nwat = 1\n");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn negative_step_is_rejected() {
        let text = SAMPLE.replace("etas = [0.01, 0.02]", "etas = [-0.5]");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn clustered_dimensions_multiply() {
        let text = SAMPLE.replace(
            "kind = \"cycle-split\"\nn = 6\nphases = 3",
            "kind = \"clustered\"\nclusters = 2\ncluster_size = 3\nc = 4",
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.graph.n(), 6);
        assert_eq!(cfg.graph.c(), 4);
        let seq = cfg.build_graphs(9).unwrap();
        assert_eq!(seq.n(), 6);
    }
}
