//! Measured error triples along a run and numeric verification of every
//! comparison-system row against them.
//!
//! Component 1 is the Frobenius spread around the weighted mean, component 2
//! the scaled distance of the weighted mean from the minimizer, component 3
//! the spread of the mass-normalized trackers around the average gradient.

use super::aps::{approx_phi, compute_v, overlap};
use super::constants::ContractionConstants;
use super::system::PerturbationSystem;
use crate::error::{Error, Result};
use crate::graphs::{stream_rng, GraphSequence};
use crate::objectives::Problem;
use crate::optimizer::{tvab_step, TvAbState};
use crate::weights::uniform_weights;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

/// Error triple per iteration of one tracked-gradient run.
#[derive(Debug, Clone)]
pub struct TkTrace {
    pub eta: f64,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
    /// Frobenius norm of the tracker matrix at each step.
    pub y_norm: Vec<f64>,
    /// Overlap of the weighted-mean functional with the mass vector.
    pub theta: Vec<f64>,
}

/// Outcome of a per-step bound check.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: usize,
    /// Rows whose measured left side sat at or below the noise floor and were
    /// therefore not scored.
    pub floored: usize,
    /// Largest signed excess (lhs - rhs) / scale seen; negative means slack
    /// everywhere.
    pub max_excess: f64,
}

/// Largest deviation ratio seen against the multistep window bound.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub bound: f64,
}

/// Which weight family a multistep product uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixSide {
    Rows,
    Columns,
}

fn frob(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs the tracked-gradient method and records the error triple, tracker
/// norm, and functional overlap at every iteration.
pub fn trace_t(
    problem: &Problem,
    seq: &GraphSequence,
    c: usize,
    eta: f64,
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<TkTrace> {
    let n = problem.n();
    if seq.n() != n {
        return Err(Error::Dimension {
            what: format!("graph sequence has {} nodes, problem has {} agents", seq.n(), n),
        });
    }
    let pa = approx_phi(seq, c, horizon + 1)?;
    let vs = compute_v(seq, horizon)?;
    let nf = n as f64;
    let mut state = TvAbState::new(problem, x0);
    let mut tr = TkTrace {
        eta,
        t1: Vec::with_capacity(horizon + 1),
        t2: Vec::with_capacity(horizon + 1),
        t3: Vec::with_capacity(horizon + 1),
        y_norm: Vec::with_capacity(horizon + 1),
        theta: Vec::with_capacity(horizon + 1),
    };
    for k in 0..=horizon {
        let phi = &pa.phis[k];
        let v = &vs[k];
        let xbar = state.x.t().dot(phi);
        let spread = &state.x - &outer_rows(&xbar, n);
        let t1 = frob(&spread);
        let dist = &xbar - &x_star.to_owned();
        let t2 = nf.sqrt() * dist.dot(&dist).sqrt();
        let col_mean = state.y.sum_axis(Axis(0)) / nf;
        let mut tracker = state.y.clone();
        for (i, mut row) in tracker.outer_iter_mut().enumerate() {
            let vi = v[i];
            for (d, cell) in row.iter_mut().enumerate() {
                *cell = *cell / vi - col_mean[d];
            }
        }
        let t3 = frob(&tracker);
        if !(t1.is_finite() && t2.is_finite() && t3.is_finite()) {
            return Err(Error::Diverged { k, magnitude: f64::INFINITY });
        }
        tr.t1.push(t1);
        tr.t2.push(t2);
        tr.t3.push(t3);
        tr.y_norm.push(frob(&state.y));
        tr.theta.push(overlap(&pa.phis[k + 1], v));
        if k < horizon {
            let w = uniform_weights(&seq.graph_at(k))?;
            tvab_step(&mut state, &w, eta, problem);
        }
    }
    Ok(tr)
}

fn outer_rows(row: &Array1<f64>, n: usize) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((n, row.len()));
    for mut r in out.outer_iter_mut() {
        r.assign(row);
    }
    out
}

/// Verifies |y_k|_F <= nL (t1 + t2) + t3 at every recorded step.
pub fn tracker_norm_bound_check(tr: &TkTrace, n: usize, big_l: f64, rel_tol: f64) -> BoundReport {
    let nl = n as f64 * big_l;
    let mut report = BoundReport { checked: 0, violations: 0, floored: 0, max_excess: f64::NEG_INFINITY };
    for k in 0..tr.y_norm.len() {
        let rhs = nl * (tr.t1[k] + tr.t2[k]) + tr.t3[k];
        let excess = (tr.y_norm[k] - rhs) / rhs.max(1e-300);
        report.checked += 1;
        report.max_excess = report.max_excess.max(excess);
        if excess > rel_tol {
            report.violations += 1;
        }
    }
    report
}

/// Verifies the one-step pull of the weighted-mean distance:
/// t2_{k+1} <= eta nL t1 + (1 - eta mu / n^{nc-1}) t2 + eta sqrt(n) t3,
/// which requires eta < 1/(nL).
///
/// Steps whose next distance is at or below `floor` are counted but not
/// scored; once the iteration stalls at roundoff scale the exact-arithmetic
/// pull no longer binds bitwise.
pub fn distance_contraction_check(
    tr: &TkTrace,
    n: usize,
    c: usize,
    mu: f64,
    big_l: f64,
    rel_tol: f64,
    floor: f64,
) -> Result<BoundReport> {
    let nf = n as f64;
    let nl = nf * big_l;
    if !(tr.eta < 1.0 / nl) {
        return Err(Error::Config(format!(
            "step {} is not below the contraction range bound {}",
            tr.eta,
            1.0 / nl
        )));
    }
    let pull = 1.0 - tr.eta * mu / nf.powf((n * c) as f64 - 1.0);
    let mut report = BoundReport { checked: 0, violations: 0, floored: 0, max_excess: f64::NEG_INFINITY };
    for k in 0..tr.t2.len().saturating_sub(1) {
        let rhs = tr.eta * nl * tr.t1[k] + pull * tr.t2[k] + tr.eta * nf.sqrt() * tr.t3[k];
        let lhs = tr.t2[k + 1];
        report.checked += 1;
        if lhs <= floor {
            report.floored += 1;
            continue;
        }
        let excess = (lhs - rhs) / rhs.max(1e-300);
        report.max_excess = report.max_excess.max(excess);
        if excess > rel_tol {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Verifies n^{-nc} <= theta_k <= 1 up to `slack` at every step.
pub fn overlap_bounds_check(tr: &TkTrace, n: usize, c: usize, slack: f64) -> BoundReport {
    let lower = (n as f64).powf(-((n * c) as f64));
    let mut report = BoundReport { checked: 0, violations: 0, floored: 0, max_excess: f64::NEG_INFINITY };
    for &th in &tr.theta {
        let excess = (lower - th).max(th - 1.0);
        report.checked += 1;
        report.max_excess = report.max_excess.max(excess);
        if excess > slack {
            report.violations += 1;
        }
    }
    report
}

/// Verifies every full stacked transition of the comparison system against
/// the measured triple: for k with a complete history window,
/// t_{k+1} <= N1 t_k + N2 (t_{k-1} + .. + t_{k-cbar+2}) + NC t_{k-cbar+1}.
///
/// Rows whose measured left side is at or below `floor` are counted in
/// `floored` instead of being scored.
pub fn inequality_system_check(
    tr: &TkTrace,
    sys: &PerturbationSystem,
    rel_tol: f64,
    floor: f64,
) -> Result<BoundReport> {
    if !(sys.cbar <= 1e9) {
        return Err(Error::Unrepresentable {
            what: format!("stacked history of depth {:e}", sys.cbar),
        });
    }
    let cbar = sys.cbar as usize;
    let len = tr.t1.len();
    if len < cbar + 1 {
        return Err(Error::InsufficientData {
            what: format!("need at least {} recorded steps for one stacked transition, have {}", cbar + 1, len),
        });
    }
    let (n1, n2, nc) = sys.top_blocks(tr.eta)?;
    let comp = |k: usize| [tr.t1[k], tr.t2[k], tr.t3[k]];
    let mut report = BoundReport { checked: 0, violations: 0, floored: 0, max_excess: f64::NEG_INFINITY };
    for k in (cbar - 1)..len - 1 {
        let head = comp(k);
        let mut mid = [0.0f64; 3];
        for j in 1..=cbar - 2 {
            let t = comp(k - j);
            for r in 0..3 {
                mid[r] += t[r];
            }
        }
        let tail = comp(k + 1 - cbar);
        let lhs = comp(k + 1);
        report.checked += 1;
        for r in 0..3 {
            if lhs[r] <= floor {
                report.floored += 1;
                continue;
            }
            let mut rhs = 0.0;
            for s in 0..3 {
                rhs += n1[r][s] * head[s] + n2[r][s] * mid[s] + nc[r][s] * tail[s];
            }
            let excess = (lhs[r] - rhs) / rhs.max(1e-300);
            report.max_excess = report.max_excess.max(excess);
            if excess > rel_tol {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Measures the worst contraction ratio of a W-step weight product toward its
/// rank-one limit over random probe vectors and compares it to the window
/// factor gamma(W).
pub fn multistep_contraction_check(
    seq: &GraphSequence,
    c: usize,
    cc: &ContractionConstants,
    side: MixSide,
    start: usize,
    window: usize,
    trials: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if window == 0 || trials == 0 {
        return Err(Error::Config("window and trials must be positive".into()));
    }
    let n = seq.n();
    let nf = n as f64;
    let mut prod = Array2::<f64>::eye(n);
    for k in start..start + window {
        let w = uniform_weights(&seq.graph_at(k))?;
        prod = match side {
            MixSide::Rows => w.a.dot(&prod),
            MixSide::Columns => w.b.dot(&prod),
        };
    }
    let (limit_out, limit_in): (Array1<f64>, Array1<f64>) = match side {
        MixSide::Rows => {
            let pa = approx_phi(seq, c, start + window)?;
            let phi_end = &pa.phis[start + window];
            let phi_start = prod.t().dot(phi_end);
            (phi_start.clone(), phi_start)
        }
        MixSide::Columns => {
            let vs = compute_v(seq, start)?;
            let v_start = vs[start].clone();
            let v_end = prod.dot(&v_start);
            (v_end / nf, v_start / nf)
        }
    };
    let bound = match side {
        MixSide::Rows => cc.gamma_a_at(window as f64),
        MixSide::Columns => cc.gamma_b_at(window as f64),
    };
    let mut rng = stream_rng(seed, 424_242);
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let b = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
        let (num_vec, den_vec) = match side {
            MixSide::Rows => {
                let lim = limit_out.dot(&b);
                (prod.dot(&b) - lim, &b - &(Array1::from_elem(n, lim)))
            }
            MixSide::Columns => {
                let total = b.sum();
                (
                    prod.dot(&b) - &(&limit_out * total),
                    &b - &(&limit_in * total),
                )
            }
        };
        let den = den_vec.dot(&den_vec).sqrt();
        if den < 1e-12 {
            continue;
        }
        let num = num_vec.dot(&num_vec).sqrt();
        max_ratio = max_ratio.max(num / den);
    }
    Ok(ContractionReport { max_ratio, bound })
}
