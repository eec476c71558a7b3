//! Dense SVD least squares with explicit singular-value truncation.
//!
//! Tall systems are first reduced with a Householder QR so that the SVD only
//! runs on the small triangular factor. The singular values are the same and
//! the solve is much cheaper for the 1000-row systems of the interior step.

use nalgebra::{DMatrix, DVector};

use crate::Error;

// nalgebra's own default; at exactly one epsilon the implicit-shift
// iteration occasionally reports success with a wrong factorization.
const SVD_EPS: f64 = 5.0 * f64::EPSILON;
const RECONSTRUCTION_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Which singular values take part in the pseudoinverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep `sigma > eps_rel * sigma_max`.
    Relative(f64),
    /// Keep `sigma > tau`.
    Absolute(f64),
}

impl Truncation {
    /// `Relative(rows * machine epsilon)`, the usual pseudoinverse cutoff.
    pub fn machine(rows: usize) -> Self {
        Truncation::Relative(rows.max(1) as f64 * f64::EPSILON)
    }

    fn threshold(&self, sigma_max: f64) -> f64 {
        match *self {
            Truncation::Relative(eps) => eps * sigma_max,
            Truncation::Absolute(tau) => tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqResult {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    /// Sorted descending.
    pub singular_values: Vec<f64>,
    pub rank_used: usize,
}

/// Minimum-norm least-squares solution of `a * x ~= b`.
pub fn svd_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, trunc: Truncation) -> Result<LstsqResult, Error> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("empty {m}x{n} system")));
    }
    if b.len() != m {
        return Err(Error::InvalidParameter(format!(
            "right-hand side has {} entries for {m} rows",
            b.len()
        )));
    }

    // Reduce to a square-or-wide core `core * x ~= rhs`.
    let (core, rhs) = if m > n {
        let qr = a.clone().qr();
        let q = qr.q();
        (qr.r(), q.transpose() * b)
    } else {
        (a.clone(), b.clone())
    };

    let svd = checked_svd(&core)?;
    let (u, v_t) = (&svd.u, &svd.v_t);

    let mut order: Vec<usize> = (0..svd.sigma.len()).collect();
    order.sort_by(|&i, &j| svd.sigma[j].total_cmp(&svd.sigma[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.sigma[i]).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = trunc.threshold(sigma_max);

    let mut x = DVector::<f64>::zeros(n);
    let mut rank_used = 0;
    for &i in &order {
        let sigma = svd.sigma[i];
        if !(sigma > cutoff) || sigma == 0.0 {
            continue;
        }
        rank_used += 1;
        let coef = u.column(i).dot(&rhs) / sigma;
        x.axpy(coef, &v_t.row(i).transpose(), 1.0);
    }

    let residual_norm = (a * &x - b).norm();
    Ok(LstsqResult {
        solution: x.as_slice().to_vec(),
        residual_norm,
        singular_values,
        rank_used,
    })
}

struct Factors {
    sigma: Vec<f64>,
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
}

fn reconstructs(a: &DMatrix<f64>, f: &Factors) -> bool {
    let rebuilt = &f.u * DMatrix::from_diagonal(&DVector::from_column_slice(&f.sigma)) * &f.v_t;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    (rebuilt - a).norm() <= RECONSTRUCTION_TOL * scale * (a.ncols() as f64).sqrt()
}

fn try_factor(a: &DMatrix<f64>) -> Option<Factors> {
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, SVD_EPS, 0)?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let f = Factors { sigma, u: svd.u?, v_t: svd.v_t? };
    reconstructs(a, &f).then_some(f)
}

/// One-sided (Hestenes) Jacobi SVD of a matrix with at least as many rows
/// as columns. Slower than bidiagonal QR but accurate on the nearly
/// rank-deficient interior systems where the latter can lose digits.
fn jacobi_svd(a: &DMatrix<f64>) -> Option<Factors> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = f64::EPSILON * m as f64;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + zeta.hypot(1.0)) };
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for w in [&mut u, &mut v] {
                    for i in 0..w.nrows() {
                        let (wp, wq) = (w[(i, p)], w[(i, q)]);
                        w[(i, p)] = c * wp - s * wq;
                        w[(i, q)] = s * wp + c * wq;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let mut sigma = Vec::with_capacity(n);
    for j in 0..n {
        let norm = u.column(j).norm();
        if norm > 0.0 {
            u.column_mut(j).unscale_mut(norm);
        }
        sigma.push(norm);
    }
    let f = Factors { sigma, u, v_t: v.transpose() };
    reconstructs(a, &f).then_some(f)
}

fn transposed(f: Factors) -> Factors {
    Factors { sigma: f.sigma, u: f.v_t.transpose(), v_t: f.u.transpose() }
}

/// SVD whose reconstruction has been verified. Tries bidiagonal QR on the
/// matrix and on its transpose, then one-sided Jacobi.
fn checked_svd(a: &DMatrix<f64>) -> Result<Factors, Error> {
    if let Some(f) = try_factor(a) {
        return Ok(f);
    }
    if let Some(f) = try_factor(&a.transpose()) {
        log::debug!("direct SVD of a {}x{} matrix inaccurate, used the transpose", a.nrows(), a.ncols());
        return Ok(transposed(f));
    }
    log::debug!("bidiagonal SVD of a {}x{} matrix inaccurate, using Jacobi", a.nrows(), a.ncols());
    let f = if a.nrows() >= a.ncols() { jacobi_svd(a) } else { jacobi_svd(&a.transpose()).map(transposed) };
    f.ok_or(Error::SvdFailure)
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>, Error> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let core = if m > n { a.clone().qr().r() } else { a.clone() };
    let mut sv = checked_svd(&core)?.sigma;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of singular values strictly greater than `tau`.
pub fn rank_abs_tol(a: &DMatrix<f64>, tau: f64) -> Result<usize, Error> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("rank tolerance must be positive, got {tau}")));
    }
    Ok(singular_values(a)?.into_iter().filter(|&s| s > tau).count())
}
