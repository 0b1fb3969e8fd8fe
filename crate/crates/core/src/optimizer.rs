//! Decentralized first-order methods over a time-varying digraph sequence.
//!
//! All methods keep one row per agent: `x` is n x p, row i belonging to
//! agent i. Mixing happens through the row-stochastic / column-stochastic
//! weight pair produced by [`crate::weights::uniform_weights`] for the graph
//! active at each step.

use crate::error::{Error, Result};
use crate::graphs::GraphSequence;
use crate::objectives::Problem;
use crate::weights::{uniform_weights, WeightPair};
use ndarray::{Array1, Array2, ArrayView1, Axis};

const DIVERGENCE_CAP: f64 = 1e12;

/// Available methods. `eta` is supplied separately so one method value can be
/// swept over a step-size grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Row-stochastic mixing of states, column-stochastic gradient tracking.
    TvAb,
    /// Push-sum consensus with a constant gradient step.
    SubgradPushConst,
    /// Push-sum consensus with step eta / sqrt(k + 1).
    SubgradPushDimin,
    /// Push-sum ratio states with gradient tracking.
    PushDiging,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::TvAb,
        Method::SubgradPushConst,
        Method::SubgradPushDimin,
        Method::PushDiging,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::TvAb => "tvab",
            Method::SubgradPushConst => "subgrad-push-const",
            Method::SubgradPushDimin => "subgrad-push-dimin",
            Method::PushDiging => "push-diging",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {:?}", s)))
    }

    /// True when the method maintains a gradient tracker whose column sum
    /// must equal the column sum of the current local gradients.
    pub fn tracks_gradients(&self) -> bool {
        matches!(self, Method::TvAb | Method::PushDiging)
    }
}

/// Mutable state of the tracked-gradient method.
#[derive(Debug, Clone)]
pub struct TvAbState {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub grad: Array2<f64>,
}

impl TvAbState {
    /// Starts from the given stacked iterate; the tracker is seeded with the
    /// local gradients so its column sum matches them exactly at step zero.
    pub fn new(problem: &Problem, x0: &Array2<f64>) -> TvAbState {
        let grad = problem.stack_gradient(x0);
        TvAbState {
            x: x0.clone(),
            y: grad.clone(),
            grad,
        }
    }
}

/// One update of the tracked-gradient method:
/// x' = A x - eta y, then y' = B y + grad(x') - grad(x).
pub fn tvab_step(state: &mut TvAbState, w: &WeightPair, eta: f64, problem: &Problem) {
    let x_next = w.a.dot(&state.x) - &(&state.y * eta);
    let grad_next = problem.stack_gradient(&x_next);
    let y_next = w.b.dot(&state.y) + &grad_next - &state.grad;
    state.x = x_next;
    state.y = y_next;
    state.grad = grad_next;
}

/// Norm of the column-sum mismatch between the tracker and the current local
/// gradients, relative to max(1, sum of local gradient norms).
pub fn tracking_gap(y: &Array2<f64>, grad: &Array2<f64>) -> f64 {
    let sum_y = y.sum_axis(Axis(0));
    let sum_g = grad.sum_axis(Axis(0));
    let diff = &sum_y - &sum_g;
    let num = diff.dot(&diff).sqrt();
    let scale = grad
        .outer_iter()
        .map(|r| r.dot(&r).sqrt())
        .sum::<f64>()
        .max(1.0);
    num / scale
}

/// Mean distance of the agents' rows from `x_star`.
pub fn residual(x: &Array2<f64>, x_star: &ArrayView1<f64>) -> f64 {
    let mut s = 0.0;
    for row in x.outer_iter() {
        let mut d2 = 0.0;
        for (a, b) in row.iter().zip(x_star.iter()) {
            let d = a - b;
            d2 += d * d;
        }
        s += d2.sqrt();
    }
    s / x.nrows() as f64
}

/// Per-step record of one run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub method: Method,
    pub eta: f64,
    /// residuals[k] is the distance at iteration k; length horizon + 1.
    pub residuals: Vec<f64>,
    /// Tracker conservation gap per step for tracking methods, empty otherwise.
    pub tracking_gaps: Vec<f64>,
    /// Final stacked estimate (the consensus-ratio estimate for push methods).
    pub x: Array2<f64>,
}

fn check_magnitude(x: &Array2<f64>, k: usize) -> Result<()> {
    let mut worst = 0.0f64;
    for &v in x.iter() {
        if !v.is_finite() {
            return Err(Error::Diverged { k, magnitude: f64::INFINITY });
        }
        worst = worst.max(v.abs());
    }
    if worst > DIVERGENCE_CAP {
        return Err(Error::Diverged { k, magnitude: worst });
    }
    Ok(())
}

/// Runs `method` for `horizon` steps over the graph sequence, measuring the
/// distance to `x_star` at every iteration.
pub fn run(
    problem: &Problem,
    seq: &GraphSequence,
    method: Method,
    eta: f64,
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<RunTrace> {
    let n = problem.n();
    if seq.n() != n {
        return Err(Error::Dimension {
            what: format!("graph sequence has {} nodes, problem has {} agents", seq.n(), n),
        });
    }
    if x0.nrows() != n || x0.ncols() != problem.dim {
        return Err(Error::Dimension {
            what: format!(
                "initial iterate is {}x{}, expected {}x{}",
                x0.nrows(),
                x0.ncols(),
                n,
                problem.dim
            ),
        });
    }
    if eta < 0.0 || !eta.is_finite() {
        return Err(Error::Config(format!("step size {} must be nonnegative", eta)));
    }
    match method {
        Method::TvAb => run_tvab(problem, seq, eta, x0, x_star, horizon),
        Method::SubgradPushConst => run_subgrad_push(problem, seq, eta, false, x0, x_star, horizon),
        Method::SubgradPushDimin => run_subgrad_push(problem, seq, eta, true, x0, x_star, horizon),
        Method::PushDiging => run_push_diging(problem, seq, eta, x0, x_star, horizon),
    }
}

fn run_tvab(
    problem: &Problem,
    seq: &GraphSequence,
    eta: f64,
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<RunTrace> {
    let mut state = TvAbState::new(problem, x0);
    let mut residuals = Vec::with_capacity(horizon + 1);
    let mut gaps = Vec::with_capacity(horizon + 1);
    residuals.push(residual(&state.x, x_star));
    gaps.push(tracking_gap(&state.y, &state.grad));
    for k in 0..horizon {
        let w = uniform_weights(&seq.graph_at(k))?;
        tvab_step(&mut state, &w, eta, problem);
        check_magnitude(&state.x, k + 1)?;
        residuals.push(residual(&state.x, x_star));
        gaps.push(tracking_gap(&state.y, &state.grad));
    }
    Ok(RunTrace {
        method: Method::TvAb,
        eta,
        residuals,
        tracking_gaps: gaps,
        x: state.x,
    })
}

fn run_subgrad_push(
    problem: &Problem,
    seq: &GraphSequence,
    eta: f64,
    diminishing: bool,
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<RunTrace> {
    let n = problem.n();
    let mut w_state = x0.clone();
    let mut mass = Array1::<f64>::ones(n);
    let mut z = x0.clone();
    let mut residuals = Vec::with_capacity(horizon + 1);
    residuals.push(residual(&z, x_star));
    for k in 0..horizon {
        let wp = uniform_weights(&seq.graph_at(k))?;
        let x_next = wp.b.dot(&w_state);
        mass = wp.b.dot(&mass);
        for i in 0..n {
            let m = mass[i];
            for d in 0..problem.dim {
                z[[i, d]] = x_next[[i, d]] / m;
            }
        }
        let step = if diminishing { eta / ((k + 1) as f64).sqrt() } else { eta };
        let grad = problem.stack_gradient(&z);
        w_state = &x_next - &(&grad * step);
        check_magnitude(&z, k + 1)?;
        residuals.push(residual(&z, x_star));
    }
    let method = if diminishing { Method::SubgradPushDimin } else { Method::SubgradPushConst };
    Ok(RunTrace {
        method,
        eta,
        residuals,
        tracking_gaps: Vec::new(),
        x: z,
    })
}

fn run_push_diging(
    problem: &Problem,
    seq: &GraphSequence,
    eta: f64,
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<RunTrace> {
    let n = problem.n();
    let mut u = x0.clone();
    let mut v = Array1::<f64>::ones(n);
    let mut z = x0.clone();
    let mut grad = problem.stack_gradient(&z);
    let mut y = grad.clone();
    let mut residuals = Vec::with_capacity(horizon + 1);
    let mut gaps = Vec::with_capacity(horizon + 1);
    residuals.push(residual(&z, x_star));
    gaps.push(tracking_gap(&y, &grad));
    for k in 0..horizon {
        let wp = uniform_weights(&seq.graph_at(k))?;
        u = wp.b.dot(&(&u - &(&y * eta)));
        v = wp.b.dot(&v);
        for i in 0..n {
            let m = v[i];
            for d in 0..problem.dim {
                z[[i, d]] = u[[i, d]] / m;
            }
        }
        let grad_next = problem.stack_gradient(&z);
        y = wp.b.dot(&y) + &grad_next - &grad;
        grad = grad_next;
        check_magnitude(&z, k + 1)?;
        residuals.push(residual(&z, x_star));
        gaps.push(tracking_gap(&y, &grad));
    }
    Ok(RunTrace {
        method: Method::PushDiging,
        eta,
        residuals,
        tracking_gaps: gaps,
        x: z,
    })
}
