//! Worst-case mixing constants for weight sequences whose graphs are jointly
//! strongly connected over windows of c steps.
//!
//! Products of W consecutive row-stochastic weights deviate from their rank-
//! one limit by at most gamma_A(W) = Q_A (1 - alpha^{nc})^{(W-1)/(nc)}, and
//! the column-stochastic side obeys the same shape with tau = beta / n^{nc+1}
//! in place of alpha. The smallest window with a sub-unit factor is kept in
//! f64 because it can exceed every integer type for plausible n and c.

use crate::error::{Error, Result};

const MAX_EXACT_INT: f64 = 9007199254740992.0;

#[derive(Debug, Clone)]
pub struct ContractionConstants {
    pub n: usize,
    pub c: usize,
    /// Lower bound on positive entries of the row-stochastic weights.
    pub alpha: f64,
    /// Lower bound on positive entries of the column-stochastic weights.
    pub beta: f64,
    pub q_a: f64,
    /// Entry floor of the normalized column-stochastic products.
    pub tau: f64,
    pub q_b: f64,
    /// Smallest window with gamma_A below one.
    pub cbar_a: f64,
    /// Smallest window with gamma_B below one.
    pub cbar_b: f64,
    /// Common window used by the comparison system: max of the two.
    pub cbar: f64,
    /// True when cbar is an exactly representable integer count.
    pub representable: bool,
    /// ln gamma_A(cbar) and ln gamma_B(cbar) at the common window.
    pub ln_gamma_a: f64,
    pub ln_gamma_b: f64,
    /// exp of the above; may underflow to zero for extreme windows.
    pub gamma_a: f64,
    pub gamma_b: f64,
    ln_shrink_a: f64,
    ln_shrink_b: f64,
}

fn ln_shrink(entry_floor: f64, nc: f64) -> f64 {
    // ln(1 - entry_floor^{nc}), which is 0 when the power underflows and the
    // bound degenerates.
    (-(nc * entry_floor.ln()).exp()).ln_1p()
}

fn q_factor(n: f64, entry_floor: f64, nc: f64) -> f64 {
    let pow = (nc * entry_floor.ln()).exp();
    let inv_pow = (-(nc * entry_floor.ln())).exp();
    2.0 * n * (1.0 + inv_pow) / (1.0 - pow)
}

fn min_window(ln_q: f64, ln_shrink: f64, nc: f64) -> f64 {
    if !ln_q.is_finite() || ln_shrink >= 0.0 {
        return f64::INFINITY;
    }
    let t_tilde = nc * ln_q / (-ln_shrink);
    if !t_tilde.is_finite() {
        return f64::INFINITY;
    }
    let mut w = (t_tilde + 1.0).floor() + 1.0;
    if w < 2.0 {
        w = 2.0;
    }
    if w <= MAX_EXACT_INT {
        let mut bumps = 0;
        while ln_q + (w - 1.0) / nc * ln_shrink >= 0.0 && bumps < 64 {
            w += 1.0;
            bumps += 1;
        }
    }
    w
}

impl ContractionConstants {
    pub fn from_bounds(n: usize, c: usize, alpha: f64, beta: f64) -> Result<ContractionConstants> {
        if n < 2 {
            return Err(Error::Config("mixing constants need at least two agents".into()));
        }
        if c == 0 {
            return Err(Error::Config("connectivity window must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::Config("weight entry floors must lie in (0, 1)".into()));
        }
        let nf = n as f64;
        let nc = (n * c) as f64;
        let q_a = q_factor(nf, alpha, nc);
        let tau = beta / nf.powf(nc + 1.0);
        let q_b = q_factor(nf, tau, nc);
        let ln_shrink_a = ln_shrink(alpha, nc);
        let ln_shrink_b = ln_shrink(tau, nc);
        let cbar_a = min_window(q_a.ln(), ln_shrink_a, nc);
        let cbar_b = min_window(q_b.ln(), ln_shrink_b, nc);
        let cbar = cbar_a.max(cbar_b);
        let representable = cbar.is_finite() && cbar <= MAX_EXACT_INT;
        let ln_gamma_a = q_a.ln() + (cbar - 1.0) / nc * ln_shrink_a;
        let ln_gamma_b = q_b.ln() + (cbar - 1.0) / nc * ln_shrink_b;
        Ok(ContractionConstants {
            n,
            c,
            alpha,
            beta,
            q_a,
            tau,
            q_b,
            cbar_a,
            cbar_b,
            cbar,
            representable,
            ln_gamma_a,
            ln_gamma_b,
            gamma_a: ln_gamma_a.exp(),
            gamma_b: ln_gamma_b.exp(),
            ln_shrink_a,
            ln_shrink_b,
        })
    }

    fn nc(&self) -> f64 {
        (self.n * self.c) as f64
    }

    pub fn ln_gamma_a_at(&self, w: f64) -> f64 {
        self.q_a.ln() + (w - 1.0) / self.nc() * self.ln_shrink_a
    }

    pub fn ln_gamma_b_at(&self, w: f64) -> f64 {
        self.q_b.ln() + (w - 1.0) / self.nc() * self.ln_shrink_b
    }

    pub fn gamma_a_at(&self, w: f64) -> f64 {
        self.ln_gamma_a_at(w).exp()
    }

    pub fn gamma_b_at(&self, w: f64) -> f64 {
        self.ln_gamma_b_at(w).exp()
    }

    /// Amplification constant n^{nc} Q_B L of the tracker coupling.
    pub fn coupling_bound(&self, big_l: f64) -> f64 {
        (self.n as f64).powf(self.nc()) * self.q_b * big_l
    }
}
