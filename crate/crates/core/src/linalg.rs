//! Small dense linear-algebra helpers used by the objective generators and the
//! certification routines. Everything here targets matrices of at most a few
//! thousand rows, so plain O(n^3) algorithms are fine.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2};

/// Eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &ArrayView2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            what: format!("sym_eigenvalues expects a square matrix, got {}x{}", n, a.ncols()),
        });
    }
    let mut m = a.to_owned();
    let off = |m: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[[i, j]] * m[[i, j]];
                }
            }
        }
        s.sqrt()
    };
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for _sweep in 0..100 {
        if off(&m) <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eig)
}

/// Cholesky factor L of a symmetric positive definite matrix, lower triangular.
pub fn cholesky(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        what: format!("pivot {} is {:e}", i, s),
                    });
                }
                l[[i, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves A x = b for symmetric positive definite A via Cholesky.
pub fn solve_spd(a: &ArrayView2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::Dimension {
            what: format!("solve_spd rhs length {} vs matrix order {}", b.len(), n),
        });
    }
    let l = cholesky(a)?;
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Ok(x)
}

/// Spectral radius of a nonnegative matrix by power iteration.
///
/// Iterates on M + I so the Perron root becomes the strictly dominant
/// eigenvalue in modulus; the +1 shift is removed from the returned value.
/// Restarts from a perturbed vector if the residual stalls.
pub fn spectral_radius(m: &ArrayView2<f64>, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n || n == 0 {
        return Err(Error::Dimension {
            what: format!("spectral_radius expects a nonempty square matrix, got {}x{}", n, m.ncols()),
        });
    }
    let mut x = Array1::<f64>::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut best_res = f64::INFINITY;
    let mut stalled = 0usize;
    for it in 0..max_iter {
        let mut y = m.dot(&x);
        y += &x;
        let norm = y.iter().fold(0.0f64, |a, v| a + v * v).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotConverged {
                what: "power iteration".into(),
                achieved: norm,
                wanted: rel_tol,
            });
        }
        let xn = &y / norm;
        let lambda = x.dot(&y) / x.dot(&x);
        let res = {
            let r = &y - &(&x * lambda);
            r.iter().fold(0.0f64, |a, v| a + v * v).sqrt() / lambda.abs().max(1e-300)
        };
        x = xn;
        if res <= rel_tol {
            return Ok(lambda - 1.0);
        }
        if res < best_res * 0.999 {
            best_res = res;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled > 800 {
            let jitter = 1e-6 * (1.0 + (it as f64).sin().abs());
            x.mapv_inplace(|v| v.abs() + jitter);
            let nrm = x.iter().fold(0.0f64, |a, v| a + v * v).sqrt();
            x /= nrm;
            stalled = 0;
        }
    }
    Err(Error::NotConverged {
        what: "power iteration".into(),
        achieved: best_res,
        wanted: rel_tol,
    })
}

/// Dense matrix power by repeated squaring.
pub fn matrix_power(m: &ArrayView2<f64>, mut e: usize) -> Array2<f64> {
    let n = m.nrows();
    let mut result = Array2::<f64>::eye(n);
    let mut base = m.to_owned();
    while e > 0 {
        if e & 1 == 1 {
            result = result.dot(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.dot(&base);
        }
    }
    result
}

/// Largest eigenvalue magnitude of a matrix whose spectrum is real and
/// nonnegative, by plain power iteration with a Rayleigh estimate.
pub fn dominant_real_eigenvalue(m: &ArrayView2<f64>, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.nrows();
    let mut x = Array1::<f64>::from_elem(n, 1.0 / (n as f64).sqrt());
    for i in 0..n {
        x[i] += 1e-3 * ((i as f64) + 1.0).sin();
    }
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        let y = m.dot(&x);
        let norm = y.iter().fold(0.0f64, |a, v| a + v * v).sqrt();
        if norm <= 1e-300 {
            return Ok(0.0);
        }
        let next = &y / norm;
        lambda = x.dot(&y) / x.dot(&x);
        let res = {
            let r = &y - &(&x * lambda);
            r.iter().fold(0.0f64, |a, v| a + v * v).sqrt()
        };
        x = next;
        if res <= rel_tol * lambda.abs().max(1e-30) {
            return Ok(lambda);
        }
    }
    Ok(lambda)
}
