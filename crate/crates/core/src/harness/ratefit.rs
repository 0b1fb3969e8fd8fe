//! Geometric rate estimation from residual histories and a step-size grid
//! search.

use crate::error::{Error, Result};
use crate::graphs::GraphSequence;
use crate::objectives::Problem;
use crate::optimizer::{run, Method};
use ndarray::{Array2, ArrayView1};

/// Least-squares line through (k, log10 residual_k).
#[derive(Debug, Clone)]
pub struct RateFit {
    /// Per-iteration change of log10 residual; negative means decay.
    pub slope_log10: f64,
    pub intercept_log10: f64,
    /// Coefficient of determination of the line fit.
    pub r2: f64,
    pub points: usize,
}

impl RateFit {
    /// Multiplicative contraction factor per iteration implied by the fit.
    pub fn factor(&self) -> f64 {
        10f64.powf(self.slope_log10)
    }
}

/// Fits a line to log10 residuals, skipping the first fifth as burn-in and
/// ignoring entries at or below `floor` where the history has stagnated on
/// noise.
pub fn fit_rate(residuals: &[f64], floor: f64) -> Result<RateFit> {
    let burn = residuals.len() / 5;
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .enumerate()
        .skip(burn)
        .filter(|(_, r)| r.is_finite() && **r > floor)
        .map(|(k, r)| (k as f64, r.log10()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData {
            what: format!("{} usable residuals above the floor, need 10", pts.len()),
        });
    }
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit { slope_log10: slope, intercept_log10: intercept, r2, points: pts.len() })
}

/// Result of scanning a step-size grid with one method.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best_eta: f64,
    pub best_final: f64,
    /// Every tried step with its final residual; `None` marks divergence.
    pub tried: Vec<(f64, Option<f64>)>,
}

/// Runs the method once per step size and picks the smallest final residual.
pub fn grid_search_eta(
    problem: &Problem,
    seq: &GraphSequence,
    method: Method,
    etas: &[f64],
    x0: &Array2<f64>,
    x_star: &ArrayView1<f64>,
    horizon: usize,
) -> Result<GridOutcome> {
    if etas.is_empty() {
        return Err(Error::Config("step-size grid must not be empty".into()));
    }
    let mut tried = Vec::with_capacity(etas.len());
    for &eta in etas {
        match run(problem, seq, method, eta, x0, x_star, horizon) {
            Ok(trace) => {
                let last = trace.residuals.last().copied().unwrap_or(f64::NAN);
                tried.push((eta, if last.is_finite() { Some(last) } else { None }));
            }
            Err(Error::Diverged { .. }) => tried.push((eta, None)),
            Err(e) => return Err(e),
        }
    }
    let best = tried
        .iter()
        .filter_map(|&(eta, fin)| fin.map(|f| (eta, f)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((best_eta, best_final)) => Ok(GridOutcome { best_eta, best_final, tried }),
        None => Err(Error::AllDiverged),
    }
}
