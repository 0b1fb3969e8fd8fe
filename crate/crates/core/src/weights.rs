//! Mixing matrices built from a communication graph.
//!
//! The row-stochastic matrix A weighs what a receiver averages; the
//! column-stochastic matrix B splits what a sender pushes out. Uniform rule:
//! A[i][j] = 1/in_degree(i) and B[i][j] = 1/out_degree(j) on each edge (i, j),
//! degrees counting the mandatory self-loop.

use crate::error::{Error, Result};
use crate::graphs::Digraph;
use ndarray::Array2;

/// Row-stochastic / column-stochastic matrix pair for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

/// Measured properties of a weight pair against its graph.
#[derive(Debug, Clone, Copy)]
pub struct WeightDiagnostics {
    /// Smallest positive entry of A.
    pub alpha_hat: f64,
    /// Smallest positive entry of B.
    pub beta_hat: f64,
    /// Largest |row sum - 1| of A.
    pub row_err: f64,
    /// Largest |column sum - 1| of B.
    pub col_err: f64,
    /// Zero patterns of both matrices match the graph exactly.
    pub pattern_ok: bool,
    /// All diagonal entries of both matrices are positive.
    pub diag_ok: bool,
}

/// Builds the uniform weight pair for a graph. Every node must carry a
/// self-loop so both degree counts are positive and the diagonals are too.
pub fn uniform_weights(g: &Digraph) -> Result<WeightPair> {
    let n = g.n();
    for i in 0..n {
        if !g.has_edge(i, i) {
            return Err(Error::MissingSelfLoop { node: i });
        }
    }
    let in_deg: Vec<f64> = (0..n).map(|i| g.in_degree(i) as f64).collect();
    let out_deg: Vec<f64> = (0..n).map(|j| g.out_degree(j) as f64).collect();
    let mut a = Array2::<f64>::zeros((n, n));
    let mut b = Array2::<f64>::zeros((n, n));
    for (i, j) in g.edges() {
        a[[i, j]] = 1.0 / in_deg[i];
        b[[i, j]] = 1.0 / out_deg[j];
    }
    Ok(WeightPair { a, b })
}

/// Measures stochasticity, positivity, and pattern agreement of a pair.
pub fn validate_weights(pair: &WeightPair, g: &Digraph) -> WeightDiagnostics {
    let n = g.n();
    let mut alpha_hat = f64::INFINITY;
    let mut beta_hat = f64::INFINITY;
    let mut pattern_ok = pair.a.nrows() == n && pair.a.ncols() == n && pair.b.nrows() == n && pair.b.ncols() == n;
    let mut diag_ok = true;
    let mut row_err = 0.0f64;
    let mut col_err = 0.0f64;
    if pattern_ok {
        for i in 0..n {
            let mut row_sum = 0.0;
            let mut col_sum = 0.0;
            for j in 0..n {
                let av = pair.a[[i, j]];
                let bv = pair.b[[j, i]];
                row_sum += av;
                col_sum += bv;
                let edge = g.has_edge(i, j);
                if (av != 0.0) != edge || (pair.b[[i, j]] != 0.0) != edge {
                    pattern_ok = false;
                }
                if av > 0.0 {
                    alpha_hat = alpha_hat.min(av);
                }
                if pair.b[[i, j]] > 0.0 {
                    beta_hat = beta_hat.min(pair.b[[i, j]]);
                }
            }
            row_err = row_err.max((row_sum - 1.0).abs());
            col_err = col_err.max((col_sum - 1.0).abs());
            if pair.a[[i, i]] <= 0.0 || pair.b[[i, i]] <= 0.0 {
                diag_ok = false;
            }
        }
    }
    if !alpha_hat.is_finite() {
        alpha_hat = 0.0;
    }
    if !beta_hat.is_finite() {
        beta_hat = 0.0;
    }
    WeightDiagnostics { alpha_hat, beta_hat, row_err, col_err, pattern_ok, diag_ok }
}
