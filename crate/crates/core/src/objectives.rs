//! Local objective functions, problem generators, and the centralized solver
//! used as the ground-truth reference.
//!
//! The network minimizes f(x) = (1/n) * sum_i f_i(x). Agents only ever touch
//! their own f_i through `local_gradient`.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, sym_eigenvalues};
use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Regularized logistic loss over one agent's samples.
///
/// f_i(w, b) = sum_j ln(1 + exp((-w'c_j + b) y_j)) + (lambda/2)(|w|^2 + b^2)
/// with x = (w, b) stacked. Row j of `a` stores y_j * (-c_j, 1), so the
/// exponent is the plain inner product a_j' x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticLocal {
    pub a: Array2<f64>,
    pub lambda: f64,
}

impl LogisticLocal {
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn value(&self, x: &ArrayView1<f64>) -> f64 {
        let u = self.a.dot(x);
        let mut s = 0.0;
        for &uj in u.iter() {
            // ln(1 + e^u) = max(u, 0) + ln(1 + e^{-|u|})
            s += uj.max(0.0) + (-uj.abs()).exp().ln_1p();
        }
        s + 0.5 * self.lambda * x.dot(x)
    }

    pub fn gradient(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        let u = self.a.dot(x);
        let sig = u.mapv(|v| 1.0 / (1.0 + (-v).exp()));
        self.a.t().dot(&sig) + &(x.to_owned() * self.lambda)
    }

    /// Smoothness bound lambda + sigma_max(A'A)/4.
    pub fn smoothness(&self) -> Result<f64> {
        let gram = self.a.t().dot(&self.a);
        let eig = sym_eigenvalues(&gram.view())?;
        Ok(self.lambda + 0.25 * eig.last().copied().unwrap_or(0.0))
    }
}

/// Linear least squares over one agent's rows: f_i(x) = 0.5 |H x - b|^2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeastSquaresLocal {
    pub h: Array2<f64>,
    pub b: Array1<f64>,
}

impl LeastSquaresLocal {
    pub fn dim(&self) -> usize {
        self.h.ncols()
    }

    pub fn value(&self, x: &ArrayView1<f64>) -> f64 {
        let r = self.h.dot(x) - &self.b;
        0.5 * r.dot(&r)
    }

    pub fn gradient(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        let r = self.h.dot(x) - &self.b;
        self.h.t().dot(&r)
    }

    pub fn smoothness(&self) -> Result<f64> {
        let gram = self.h.t().dot(&self.h);
        let eig = sym_eigenvalues(&gram.view())?;
        Ok(eig.last().copied().unwrap_or(0.0))
    }
}

/// One agent's private objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum LocalObjective {
    Logistic(LogisticLocal),
    LeastSquares(LeastSquaresLocal),
}

impl LocalObjective {
    pub fn dim(&self) -> usize {
        match self {
            LocalObjective::Logistic(l) => l.dim(),
            LocalObjective::LeastSquares(l) => l.dim(),
        }
    }

    pub fn value(&self, x: &ArrayView1<f64>) -> f64 {
        match self {
            LocalObjective::Logistic(l) => l.value(x),
            LocalObjective::LeastSquares(l) => l.value(x),
        }
    }

    pub fn gradient(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        match self {
            LocalObjective::Logistic(l) => l.gradient(x),
            LocalObjective::LeastSquares(l) => l.gradient(x),
        }
    }
}

/// A full decentralized problem instance with its curvature constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Problem {
    pub locals: Vec<LocalObjective>,
    pub dim: usize,
    /// Strong convexity modulus of the averaged objective.
    pub mu: f64,
    /// Largest per-agent smoothness constant.
    pub big_l: f64,
    /// Per-agent smoothness constants.
    pub ell: Vec<f64>,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.locals.len()
    }

    /// Average objective value (1/n) sum_i f_i(x).
    pub fn value(&self, x: &ArrayView1<f64>) -> f64 {
        let n = self.locals.len() as f64;
        self.locals.iter().map(|l| l.value(x)).sum::<f64>() / n
    }

    /// Gradient of the average objective.
    pub fn gradient(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.locals.len() as f64;
        let mut g = Array1::<f64>::zeros(self.dim);
        for l in &self.locals {
            g += &l.gradient(x);
        }
        g / n
    }

    /// Gradient of agent i's own objective at its own iterate.
    pub fn local_gradient(&self, i: usize, x: &ArrayView1<f64>) -> Array1<f64> {
        self.locals[i].gradient(x)
    }

    /// Stacks local gradients row-wise: row i is grad f_i(x_i).
    pub fn stack_gradient(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut g = Array2::<f64>::zeros((self.n(), self.dim));
        for (i, l) in self.locals.iter().enumerate() {
            g.row_mut(i).assign(&l.gradient(&x.row(i)));
        }
        g
    }

    /// Writes the instance as self-describing JSON.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Reads an instance back from JSON.
    pub fn load(path: &std::path::Path) -> Result<Problem> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Serde(e.to_string()))
    }
}

fn normal_sample(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    Normal::new(0.0, std).unwrap().sample(rng)
}

/// Logistic instance: features N(0, 9), truth (w, b) uniform on [0, 1),
/// labels Bernoulli with the model's own probability at the truth.
pub fn make_logistic_problem(n: usize, samples: usize, dim: usize, lambda: f64, seed: u64) -> Result<Problem> {
    if n == 0 || samples == 0 || dim < 2 {
        return Err(Error::Config("logistic problem needs n >= 1, samples >= 1, dim >= 2".into()));
    }
    if lambda <= 0.0 {
        return Err(Error::Config("logistic problem needs lambda > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = dim - 1;
    let w_true: Vec<f64> = (0..features).map(|_| rng.random::<f64>()).collect();
    let b_true: f64 = rng.random();
    let mut locals = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = Array2::<f64>::zeros((samples, dim));
        for s in 0..samples {
            let c: Vec<f64> = (0..features).map(|_| normal_sample(&mut rng, 3.0)).collect();
            let score: f64 = -w_true.iter().zip(&c).map(|(w, cv)| w * cv).sum::<f64>() + b_true;
            let p_plus = 1.0 / (1.0 + score.exp());
            let y: f64 = if rng.random::<f64>() < p_plus { 1.0 } else { -1.0 };
            for (f, cv) in c.iter().enumerate() {
                a[[s, f]] = -cv * y;
            }
            a[[s, features]] = y;
        }
        locals.push(LocalObjective::Logistic(LogisticLocal { a, lambda }));
    }
    finish_problem(locals, dim, lambda)
}

/// Least-squares instance with deliberately rank-deficient per-agent blocks
/// (rows < dim) whose summed Gram matrix is still positive definite.
pub fn make_least_squares_problem(n: usize, rows: usize, dim: usize, seed: u64) -> Result<Problem> {
    if n == 0 || rows == 0 || dim == 0 {
        return Err(Error::Config("least-squares problem needs n, rows, dim >= 1".into()));
    }
    if rows >= dim {
        return Err(Error::Config(format!(
            "per-agent rows {} must be below dim {} to keep local blocks rank-deficient",
            rows, dim
        )));
    }
    for attempt in 0..64u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let x_true: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let x_true = Array1::from(x_true);
        let mut locals = Vec::with_capacity(n);
        let mut gram = Array2::<f64>::zeros((dim, dim));
        for _ in 0..n {
            let mut h = Array2::<f64>::zeros((rows, dim));
            for r in 0..rows {
                for c in 0..dim {
                    h[[r, c]] = normal_sample(&mut rng, 1.0);
                }
            }
            let noise = Array1::from((0..rows).map(|_| normal_sample(&mut rng, 0.05)).collect::<Vec<_>>());
            let b = h.dot(&x_true) + &noise;
            gram += &h.t().dot(&h);
            locals.push(LocalObjective::LeastSquares(LeastSquaresLocal { h, b }));
        }
        gram /= n as f64;
        let eig = sym_eigenvalues(&gram.view())?;
        if eig[0] >= 1e-6 {
            return finish_problem(locals, dim, eig[0]);
        }
    }
    Err(Error::NotPositiveDefinite {
        what: "summed least-squares Gram stayed near-singular after 64 regenerations".into(),
    })
}

/// Scalar line fit shared across agents: each agent holds one noisy sample of
/// y = slope * t + intercept, so dim = 2 and every local block is rank one.
pub fn make_line_fit_problem(n: usize, noise_std: f64, seed: u64) -> Result<Problem> {
    if n < 2 {
        return Err(Error::Config("line fit needs at least two agents".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slope: f64 = rng.random::<f64>() * 2.0 - 1.0;
    let intercept: f64 = rng.random::<f64>() * 2.0 - 1.0;
    let mut locals = Vec::with_capacity(n);
    let mut gram = Array2::<f64>::zeros((2, 2));
    for i in 0..n {
        // Spread sample abscissas deterministically so the summed Gram is
        // well conditioned for every n.
        let t = -1.0 + 2.0 * (i as f64) / ((n - 1) as f64);
        let y = slope * t + intercept + normal_sample(&mut rng, noise_std);
        let h = Array2::from_shape_vec((1, 2), vec![t, 1.0]).unwrap();
        gram += &h.t().dot(&h);
        locals.push(LocalObjective::LeastSquares(LeastSquaresLocal {
            h,
            b: Array1::from(vec![y]),
        }));
    }
    gram /= n as f64;
    let eig = sym_eigenvalues(&gram.view())?;
    finish_problem(locals, 2, eig[0])
}

fn finish_problem(locals: Vec<LocalObjective>, dim: usize, mu: f64) -> Result<Problem> {
    let mut ell = Vec::with_capacity(locals.len());
    for l in &locals {
        let s = match l {
            LocalObjective::Logistic(ll) => ll.smoothness()?,
            LocalObjective::LeastSquares(ls) => ls.smoothness()?,
        };
        ell.push(s);
    }
    let big_l = ell.iter().cloned().fold(0.0f64, f64::max);
    Ok(Problem { locals, dim, mu, big_l, ell })
}

/// Minimizer and optimal value of the averaged objective.
///
/// Least-squares instances solve the normal equations directly; logistic
/// instances run Newton's method to |grad| <= 1e-12.
pub fn solve_centralized(problem: &Problem) -> Result<(Array1<f64>, f64)> {
    let n = problem.n() as f64;
    let all_ls = problem
        .locals
        .iter()
        .all(|l| matches!(l, LocalObjective::LeastSquares(_)));
    if all_ls {
        let mut gram = Array2::<f64>::zeros((problem.dim, problem.dim));
        let mut rhs = Array1::<f64>::zeros(problem.dim);
        for l in &problem.locals {
            if let LocalObjective::LeastSquares(ls) = l {
                gram += &ls.h.t().dot(&ls.h);
                rhs += &ls.h.t().dot(&ls.b);
            }
        }
        gram /= n;
        rhs /= n;
        let x = solve_spd(&gram.view(), &rhs)?;
        let f = problem.value(&x.view());
        return Ok((x, f));
    }

    let mut x = Array1::<f64>::zeros(problem.dim);
    for _ in 0..200 {
        let g = problem.gradient(&x.view());
        let gnorm = g.dot(&g).sqrt();
        if gnorm <= 1e-12 {
            let f = problem.value(&x.view());
            return Ok((x, f));
        }
        let mut hess = Array2::<f64>::zeros((problem.dim, problem.dim));
        for l in &problem.locals {
            match l {
                LocalObjective::Logistic(ll) => {
                    let u = ll.a.dot(&x);
                    for (row, &uj) in ll.a.outer_iter().zip(u.iter()) {
                        let s = 1.0 / (1.0 + (-uj).exp());
                        let wgt = s * (1.0 - s);
                        for p in 0..problem.dim {
                            for q in 0..problem.dim {
                                hess[[p, q]] += wgt * row[p] * row[q];
                            }
                        }
                    }
                    for p in 0..problem.dim {
                        hess[[p, p]] += ll.lambda;
                    }
                }
                LocalObjective::LeastSquares(ls) => {
                    hess += &ls.h.t().dot(&ls.h);
                }
            }
        }
        hess /= n;
        let step = solve_spd(&hess.view(), &g)?;
        x -= &step;
    }
    let g = problem.gradient(&x.view());
    Err(Error::NotConverged {
        what: "Newton solve of the averaged objective".into(),
        achieved: g.dot(&g).sqrt(),
        wanted: 1e-12,
    })
}

/// Strongly convex quadratic g(x) = 0.5 x'Px - q'x with known curvature box.
#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    pub p: Array2<f64>,
    pub q: Array1<f64>,
}

impl QuadraticSpec {
    pub fn gradient(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        self.p.dot(x) - &self.q
    }

    pub fn minimizer(&self) -> Result<Array1<f64>> {
        solve_spd(&self.p.view(), &self.q)
    }

    pub fn curvature(&self) -> Result<(f64, f64)> {
        let eig = sym_eigenvalues(&self.p.view())?;
        Ok((eig[0], *eig.last().unwrap()))
    }
}

/// Verifies the single-step contraction of x - zeta * grad g(x) toward the
/// minimizer: the distance shrinks by chi = max(|1 - zeta mu|, |1 - zeta ell|)
/// for any 0 < zeta < 2/ell.
pub fn gradient_step_contraction_check(g: &QuadraticSpec, zeta: f64, x: &ArrayView1<f64>) -> Result<(f64, f64)> {
    let (mu, ell) = g.curvature()?;
    if zeta <= 0.0 || zeta >= 2.0 / ell {
        return Err(Error::Config(format!(
            "step {} outside the contraction range (0, {})",
            zeta,
            2.0 / ell
        )));
    }
    let x_star = g.minimizer()?;
    let chi = (1.0 - zeta * mu).abs().max((1.0 - zeta * ell).abs());
    let before = (&x.to_owned() - &x_star).mapv(|v| v * v).sum().sqrt();
    let stepped = x.to_owned() - g.gradient(x) * zeta;
    let after = (&stepped - &x_star).mapv(|v| v * v).sum().sqrt();
    if after > chi * before + 1e-12 {
        return Err(Error::NotConverged {
            what: "gradient-step contraction".into(),
            achieved: after,
            wanted: chi * before,
        });
    }
    Ok((after, chi * before))
}
