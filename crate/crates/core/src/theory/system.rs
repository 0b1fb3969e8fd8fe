//! Linear comparison system for the coupled error recursion.
//!
//! The three error measures (consensus spread, weighted-mean distance,
//! tracker spread) obey a blockwise bound T_{k+1} <= M(eta) T_k on stacked
//! histories of depth cbar. M(eta) = M0 + eta*ME is a nonnegative block
//! companion matrix of side 3*cbar: a top row of 3x3 blocks [M1, M2, ..,
//! M2, MC] and identity blocks on the subdiagonal.
//!
//! Because cbar can be astronomically large, the spectral radius is never
//! read off the dense matrix. For lambda > 0 and the aggregated 3x3 matrix
//! S(lambda) = M1/lambda + M2 * sum_{j=2}^{cbar-1} lambda^{-j} + MC *
//! lambda^{-cbar}, the companion structure gives rho(M) < lambda exactly when
//! rho(S(lambda)) < 1, and the latter is a leading-principal-minor test on
//! I - S. Off-diagonal entries are handled in log form so nothing overflows,
//! while the diagonal deficits 1 - S_ii are assembled from expm1 and the raw
//! step so the test still resolves stability windows far below the f64
//! rounding radius of 1.

use super::constants::ContractionConstants;
use crate::error::{Error, Result};
use crate::linalg::{dominant_real_eigenvalue, matrix_power};
use ndarray::{Array1, Array2};

const DENSE_CBAR_LIMIT: f64 = 512.0;
const POWER_CBAR_LIMIT: f64 = 64.0;
const VECTOR_CBAR_LIMIT: f64 = 1e6;

type Block = [[f64; 3]; 3];

/// Residuals and derivative of the unit eigenpair of M(0), plus the radius of
/// the deflated matrix when it is small enough to build.
#[derive(Debug, Clone)]
pub struct StationaryPair {
    pub right_residual: f64,
    pub left_residual: f64,
    pub inner: f64,
    /// d/d eta of the tracked eigenvalue at eta = 0.
    pub derivative: f64,
    /// rho(M(0) - u w') computed densely; None when cbar is too large.
    pub deflated_radius: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PerturbationSystem {
    pub n: usize,
    pub c: usize,
    pub mu: f64,
    pub big_l: f64,
    pub q_a: f64,
    /// Window factors at depth cbar, carried both linearly and in logs.
    pub gamma_a: f64,
    pub gamma_b: f64,
    ln_gamma_a: f64,
    ln_gamma_b: f64,
    /// Tracker coupling amplitude n^{nc} Q_B L.
    pub m: f64,
    /// History depth; kept in f64 because it may exceed usize.
    pub cbar: f64,
    /// n^{nc - 1}, the divisor of the curvature pull.
    n_pow_minus: f64,
}

fn logsumexp3(a: f64, b: f64, c: f64) -> f64 {
    let m = a.max(b).max(c);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp() + (c - m).exp()).ln()
}

impl PerturbationSystem {
    pub fn from_constants(cc: &ContractionConstants, mu: f64, big_l: f64) -> Result<PerturbationSystem> {
        let m = cc.coupling_bound(big_l);
        if !cc.representable || !m.is_finite() {
            return Err(Error::Unrepresentable {
                what: format!(
                    "comparison system for n = {}, c = {} has window {:e} and coupling {:e}; \
                     the window factors cancel below f64 resolution, so only the log-domain \
                     constants remain meaningful",
                    cc.n, cc.c, cc.cbar, m
                ),
            });
        }
        let mut sys =
            PerturbationSystem::from_parts(cc.n, cc.c, mu, big_l, cc.q_a, cc.gamma_a, cc.gamma_b, m, cc.cbar)?;
        sys.ln_gamma_a = cc.ln_gamma_a;
        sys.ln_gamma_b = cc.ln_gamma_b;
        Ok(sys)
    }

    /// Builds a system from explicit ingredients; used to exercise the matrix
    /// machinery on instances whose window depth stays small.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        c: usize,
        mu: f64,
        big_l: f64,
        q_a: f64,
        gamma_a: f64,
        gamma_b: f64,
        m: f64,
        cbar: f64,
    ) -> Result<PerturbationSystem> {
        if n < 2 || c == 0 {
            return Err(Error::Config("comparison system needs n >= 2 and c >= 1".into()));
        }
        if !(mu > 0.0 && big_l >= mu) {
            return Err(Error::Config("curvature must satisfy 0 < mu <= L".into()));
        }
        if !(q_a > 0.0 && m > 0.0) {
            return Err(Error::Config("mixing amplitudes must be positive".into()));
        }
        if !(0.0..1.0).contains(&gamma_a) || !(0.0..1.0).contains(&gamma_b) {
            return Err(Error::Config("window factors must lie in [0, 1)".into()));
        }
        if !(cbar.is_finite() && cbar >= 2.0 && cbar.fract() == 0.0) {
            return Err(Error::Config("window depth must be an integer of at least 2".into()));
        }
        let n_pow_minus = (n as f64).powf((n * c) as f64 - 1.0);
        Ok(PerturbationSystem {
            n,
            c,
            mu,
            big_l,
            q_a,
            gamma_a,
            gamma_b,
            ln_gamma_a: gamma_a.ln(),
            ln_gamma_b: gamma_b.ln(),
            m,
            cbar,
            n_pow_minus,
        })
    }

    /// Largest step the nonnegative comparison matrix can represent.
    pub fn eta_cap(&self) -> f64 {
        self.n_pow_minus / self.mu
    }

    fn check_eta(&self, eta: f64) -> Result<()> {
        if !(eta >= 0.0) || eta > self.eta_cap() {
            return Err(Error::Config(format!(
                "step {} outside the representable range [0, {}]",
                eta,
                self.eta_cap()
            )));
        }
        Ok(())
    }

    /// Top blocks (N1, N2, NC) of the companion matrix at the given step.
    pub fn top_blocks(&self, eta: f64) -> Result<(Block, Block, Block)> {
        self.check_eta(eta)?;
        let nf = self.n as f64;
        let nl = nf * self.big_l;
        let rn = nf.sqrt();
        let pull = 1.0 - eta * self.mu / self.n_pow_minus;
        let shared_row0 = [self.q_a * nl * eta, self.q_a * nl * eta, self.q_a * eta];
        let shared_row2 = [
            2.0 * self.m * rn + self.m * rn * self.big_l * eta,
            self.m * nl * eta,
            self.m * eta,
        ];
        let n1 = [shared_row0, [nl * eta, pull, rn * eta], shared_row2];
        let n2 = [shared_row0, [0.0, 0.0, 0.0], shared_row2];
        let nc = [
            [
                self.gamma_a + shared_row0[0],
                shared_row0[1],
                shared_row0[2],
            ],
            [0.0, 0.0, 0.0],
            [shared_row2[0], shared_row2[1], self.gamma_b + shared_row2[2]],
        ];
        Ok((n1, n2, nc))
    }

    fn dense_depth(&self) -> Option<usize> {
        if self.cbar <= DENSE_CBAR_LIMIT {
            Some(self.cbar as usize)
        } else {
            None
        }
    }

    /// Dense companion matrix; only for small window depths.
    pub fn build_m(&self, eta: f64) -> Result<Array2<f64>> {
        let cbar = self.dense_depth().ok_or_else(|| Error::Unrepresentable {
            what: format!("dense companion of side 3 * {:e}", self.cbar),
        })?;
        let (n1, n2, nc) = self.top_blocks(eta)?;
        let dim = 3 * cbar;
        let mut m = Array2::<f64>::zeros((dim, dim));
        for j in 0..cbar {
            let block = if j == 0 {
                &n1
            } else if j + 1 == cbar {
                &nc
            } else {
                &n2
            };
            for r in 0..3 {
                for s in 0..3 {
                    m[[r, 3 * j + s]] = block[r][s];
                }
            }
        }
        for j in 0..cbar - 1 {
            for r in 0..3 {
                m[[3 * (j + 1) + r, 3 * j + r]] = 1.0;
            }
        }
        Ok(m)
    }

    /// Applies M(eta) to a stacked vector without materializing the matrix.
    pub fn matvec(&self, eta: f64, v: &Array1<f64>) -> Result<Array1<f64>> {
        if self.cbar > VECTOR_CBAR_LIMIT {
            return Err(Error::Unrepresentable {
                what: format!("stacked vector of length 3 * {:e}", self.cbar),
            });
        }
        let cbar = self.cbar as usize;
        if v.len() != 3 * cbar {
            return Err(Error::Dimension {
                what: format!("stacked vector has {} entries, expected {}", v.len(), 3 * cbar),
            });
        }
        let (n1, n2, nc) = self.top_blocks(eta)?;
        let mut out = Array1::<f64>::zeros(3 * cbar);
        let mut mid = [0.0f64; 3];
        for j in 1..cbar - 1 {
            for r in 0..3 {
                mid[r] += v[3 * j + r];
            }
        }
        for r in 0..3 {
            let mut acc = 0.0;
            for s in 0..3 {
                acc += n1[r][s] * v[s];
                acc += n2[r][s] * mid[s];
                acc += nc[r][s] * v[3 * (cbar - 1) + s];
            }
            out[r] = acc;
        }
        for j in 0..cbar - 1 {
            for r in 0..3 {
                out[3 * (j + 1) + r] = v[3 * j + r];
            }
        }
        Ok(out)
    }

    /// ln of sum_{j=2}^{cbar-1} r^j where ln_r = ln r, robust for any window.
    fn ln_middle_sum(&self, ln_r: f64) -> f64 {
        let terms = self.cbar - 2.0;
        if terms <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if ln_r == 0.0 || ln_r.abs() * self.cbar < 1e-9 {
            return terms.ln() + 2.0 * ln_r;
        }
        if ln_r < 0.0 {
            2.0 * ln_r + (-(terms * ln_r).exp()).ln_1p() - (-ln_r.exp()).ln_1p()
        } else {
            let ln_denom = if ln_r > 30.0 { ln_r } else { ln_r.exp_m1().ln() };
            (terms + 2.0) * ln_r + (-(-terms * ln_r).exp()).ln_1p() - ln_denom
        }
    }

    /// Decides rho(M(eta)) < lambda through the aggregated minor test.
    ///
    /// All six independent off-diagonal entries of S live in logs; the
    /// diagonal is represented by its deficit d_i = 1 - S_ii computed without
    /// catastrophic cancellation, so stability windows of order 1e-18 in eta
    /// are still decided correctly.
    pub fn rho_less_than(&self, lambda: f64, eta: f64) -> Result<bool> {
        self.check_eta(eta)?;
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("comparison point {} must be positive", lambda)));
        }
        let nf = self.n as f64;
        let nl = nf * self.big_l;
        let rn = nf.sqrt();
        let ln_r = -lambda.ln();
        let ln_g = self.ln_middle_sum(ln_r);
        let ln_tail = self.cbar * ln_r;
        let ln_sum = logsumexp3(ln_r, ln_g, ln_tail);

        // Off-diagonal log-entries of S(lambda, eta).
        let s01 = (self.q_a * nl * eta).ln() + ln_sum;
        let s02 = (self.q_a * eta).ln() + ln_sum;
        let s10 = (nl * eta).ln() + ln_r;
        let s12 = (rn * eta).ln() + ln_r;
        let s20 = (2.0 * self.m * rn + self.m * rn * self.big_l * eta).ln() + ln_sum;
        let s21 = (self.m * nl * eta).ln() + ln_sum;

        // Diagonal deficits 1 - S_ii.
        let d0 = {
            let coupling = (self.q_a * nl * eta).ln() + ln_sum;
            if coupling >= 0.0 {
                f64::NEG_INFINITY
            } else {
                -(self.ln_gamma_a + ln_tail).exp_m1() - coupling.exp()
            }
        };
        let d1 = ((lambda - 1.0) + eta * self.mu / self.n_pow_minus) / lambda;
        let d2 = {
            let coupling = (self.m * eta).ln() + ln_sum;
            if coupling >= 0.0 {
                f64::NEG_INFINITY
            } else {
                -(self.ln_gamma_b + ln_tail).exp_m1() - coupling.exp()
            }
        };
        if d0 <= 0.0 || d1 <= 0.0 || d2 <= 0.0 {
            return Ok(false);
        }
        if s01 + s10 >= 0.0 || s02 + s20 >= 0.0 || s12 + s21 >= 0.0 {
            return Ok(false);
        }
        if s01 + s12 + s20 >= 0.0 || s02 + s21 + s10 >= 0.0 {
            return Ok(false);
        }
        let minor2 = d0 * d1 - (s01 + s10).exp();
        let det3 = d0 * d1 * d2
            - d0 * (s12 + s21).exp()
            - (s01 + s10).exp() * d2
            - (s01 + s12 + s20).exp()
            - (s02 + s21 + s10).exp()
            - (s02 + s20).exp() * d1;
        Ok(minor2 > 0.0 && det3 > 0.0)
    }

    /// Spectral radius of M(eta) by bisecting the minor test.
    pub fn spectral_radius(&self, eta: f64, rel_tol: f64) -> Result<f64> {
        let (n1, n2, nc) = self.top_blocks(eta)?;
        let mut hi = 1.0f64;
        for r in 0..3 {
            let mut row_sum = 0.0;
            for s in 0..3 {
                row_sum += n1[r][s] + (self.cbar - 2.0) * n2[r][s] + nc[r][s];
            }
            hi = hi.max(row_sum);
        }
        hi += 1.0;
        let mut lo = 0.0f64;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if self.rho_less_than(mid, eta)? {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= rel_tol * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Exact unit eigenpair of M(0) and the slope of its eigenvalue in eta.
    ///
    /// The right vector repeats (0, 1, 0) in every block, the left vector is
    /// the second coordinate functional; both residuals are identically zero
    /// for any valid system, so nonzero values flag broken block assembly.
    pub fn stationary_pair_check(&self) -> Result<StationaryPair> {
        let (n1_0, n2_0, nc_0) = self.top_blocks(0.0)?;
        let mut right = 0.0;
        for r in 0..3 {
            let combined = n1_0[r][1] + (self.cbar - 2.0) * n2_0[r][1] + nc_0[r][1];
            let expect = if r == 1 { 1.0 } else { 0.0 };
            right += (combined - expect).abs();
        }
        let mut left = (n1_0[1][1] - 1.0).abs() + n1_0[1][0].abs() + n1_0[1][2].abs();
        for s in 0..3 {
            left += n2_0[1][s].abs() + nc_0[1][s].abs();
        }
        let derivative = -(self.mu / self.n_pow_minus);
        let deflated_radius = if self.cbar <= POWER_CBAR_LIMIT {
            let cbar = self.cbar as usize;
            let mut m0 = self.build_m(0.0)?;
            for j in 0..cbar {
                m0[[3 * j + 1, 1]] -= 1.0;
            }
            let powered = matrix_power(&m0.view(), cbar as usize);
            let dominant = dominant_real_eigenvalue(&powered.view(), 1e-13, 20_000)?;
            Some(dominant.max(0.0).powf(1.0 / self.cbar))
        } else {
            None
        };
        Ok(StationaryPair {
            right_residual: right,
            left_residual: left,
            inner: 1.0,
            derivative,
            deflated_radius,
        })
    }

    /// One-sided difference quotient of the spectral radius at zero step.
    pub fn fd_slope(&self, h: f64) -> Result<f64> {
        let base = self.spectral_radius(0.0, 1e-13)?;
        let bumped = self.spectral_radius(h, 1e-13)?;
        Ok((bumped - base) / h)
    }

    /// Largest step with rho(M(eta)) < 1, found by probing the stability dip
    /// and geometrically bisecting the upper crossing. Capped at 2/(nL).
    pub fn eta_threshold(&self, rel_tol: f64) -> Result<f64> {
        let eta_max = 2.0 / (self.n as f64 * self.big_l);
        if self.rho_less_than(1.0, eta_max)? {
            return Ok(eta_max);
        }
        let mut probe = None;
        for t in 1..=1000 {
            let e = eta_max * (0.5f64).powi(t);
            if e < f64::MIN_POSITIVE * 1e16 {
                break;
            }
            if self.rho_less_than(1.0, e)? {
                probe = Some(e);
                break;
            }
        }
        let mut lo = probe.ok_or(Error::NotConverged {
            what: "search for a stable step below the comparison threshold".into(),
            achieved: f64::INFINITY,
            wanted: 1.0,
        })?;
        let mut hi = eta_max;
        while hi / lo - 1.0 > rel_tol {
            let mid = (lo * hi).sqrt();
            if self.rho_less_than(1.0, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}
