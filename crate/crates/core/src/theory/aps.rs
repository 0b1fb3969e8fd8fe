//! Averaging limits of the time-varying weight sequences.
//!
//! The column-stochastic side pushes a mass vector forward:
//! v_{k+1} = B_k v_k with v_0 = 1, so sum(v_k) = n for every k. The
//! row-stochastic side has a backward recursion phi_k' = phi_{k+1}' A_k whose
//! solution is pinned down by ergodicity: long products of the A matrices
//! collapse to rank one, and phi_k is the common row of that limit.

use crate::error::{Error, Result};
use crate::graphs::GraphSequence;
use crate::weights::uniform_weights;
use ndarray::{Array1, Array2};

/// Weighted-mean functionals phi_0 .. phi_horizon plus how hard the tail
/// product had to work to pin down the top one.
#[derive(Debug, Clone)]
pub struct PhiApprox {
    /// phis[k] sums to one; phis[k] = A_k' phis[k+1] holds by construction.
    pub phis: Vec<Array1<f64>>,
    /// Steps of tail product consumed beyond `horizon`.
    pub tail_steps: usize,
    /// Row disagreement of the tail product when it was accepted; bounds the
    /// distance of phis[horizon] from the true limit functional.
    pub tail_disagreement: f64,
}

/// Largest column spread of a matrix: max_j (max_i P_ij - min_i P_ij).
pub fn column_spread(p: &Array2<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..p.ncols() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in p.column(j) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

/// Forward mass vectors v_0 .. v_horizon under the column-stochastic weights.
pub fn compute_v(seq: &GraphSequence, horizon: usize) -> Result<Vec<Array1<f64>>> {
    let n = seq.n();
    let mut vs = Vec::with_capacity(horizon + 1);
    let mut v = Array1::<f64>::ones(n);
    vs.push(v.clone());
    for k in 0..horizon {
        let w = uniform_weights(&seq.graph_at(k))?;
        v = w.b.dot(&v);
        vs.push(v.clone());
    }
    Ok(vs)
}

/// Weighted-mean functionals with the default tail tolerance of 1e-12.
pub fn approx_phi(seq: &GraphSequence, c: usize, horizon: usize) -> Result<PhiApprox> {
    approx_phi_with(seq, c, horizon, 1e-12)
}

/// Runs the tail product at `horizon` until its rows agree to `tol`, takes
/// the common row as phis[horizon], then fills downward with the exact
/// recursion phi_k = A_k' phi_{k+1}.
pub fn approx_phi_with(seq: &GraphSequence, c: usize, horizon: usize, tol: f64) -> Result<PhiApprox> {
    if c == 0 {
        return Err(Error::Config("connectivity window must be at least 1".into()));
    }
    let n = seq.n();
    let block = (n * c).max(1);
    let max_steps = (50 * block).max(20_000);
    let mut prod = Array2::<f64>::eye(n);
    let mut steps = 0usize;
    let mut spread = column_spread(&prod);
    while spread > tol && steps < max_steps {
        for _ in 0..block {
            let w = uniform_weights(&seq.graph_at(horizon + steps))?;
            prod = w.a.dot(&prod);
            steps += 1;
        }
        spread = column_spread(&prod);
    }
    if spread > tol {
        return Err(Error::NotConverged {
            what: "row agreement of the averaging tail product".into(),
            achieved: spread,
            wanted: tol,
        });
    }
    let row = prod.row(0);
    let sum: f64 = row.sum();
    let top = row.mapv(|v| v / sum);

    let mut phis = vec![Array1::<f64>::zeros(n); horizon + 1];
    phis[horizon] = top;
    for k in (0..horizon).rev() {
        let w = uniform_weights(&seq.graph_at(k))?;
        phis[k] = w.a.t().dot(&phis[k + 1]);
    }
    Ok(PhiApprox {
        phis,
        tail_steps: steps,
        tail_disagreement: spread,
    })
}

/// Normalized overlap of a weighted-mean functional with a mass vector,
/// phi' v / n. Stays in [n^{-nC}, 1] for weight sequences that mix.
pub fn overlap(phi: &Array1<f64>, v: &Array1<f64>) -> f64 {
    phi.dot(v) / v.len() as f64
}

/// Column spread of the forward row-stochastic product after each block of
/// n*c steps starting at `start`. Ergodic sequences drive this to zero
/// geometrically.
pub fn consensus_decay(seq: &GraphSequence, c: usize, start: usize, blocks: usize) -> Result<Vec<f64>> {
    let n = seq.n();
    let block = (n * c).max(1);
    let mut prod = Array2::<f64>::eye(n);
    let mut out = Vec::with_capacity(blocks);
    let mut k = start;
    for _ in 0..blocks {
        for _ in 0..block {
            let w = uniform_weights(&seq.graph_at(k))?;
            prod = w.a.dot(&prod);
            k += 1;
        }
        out.push(column_spread(&prod));
    }
    Ok(out)
}

/// Smallest positive entry of each weight family over steps 0..horizon.
pub fn measured_weight_floor(seq: &GraphSequence, horizon: usize) -> Result<(f64, f64)> {
    let mut alpha = f64::INFINITY;
    let mut beta = f64::INFINITY;
    for k in 0..horizon.max(1) {
        let w = uniform_weights(&seq.graph_at(k))?;
        for &v in w.a.iter() {
            if v > 0.0 {
                alpha = alpha.min(v);
            }
        }
        for &v in w.b.iter() {
            if v > 0.0 {
                beta = beta.min(v);
            }
        }
    }
    Ok((alpha, beta))
}
