//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order; `vectors` holds the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    /// Frobenius norm of `M V - V diag(λ)`.
    pub fn residual(&self, m: &Matrix<T>) -> T {
        let mv = m.matmul(&self.vectors);
        let mut acc = T::zero();
        for i in 0..mv.rows() {
            for (k, &lambda) in self.values.iter().enumerate() {
                let d = mv[(i, k)] - self.vectors[(i, k)] * lambda;
                acc = acc + d * d;
            }
        }
        acc.sqrt()
    }

    /// Largest entry of `|VᵀV - 1|`.
    pub fn orthonormality_defect(&self) -> T {
        let vtv = self.vectors.transpose().matmul(&self.vectors);
        vtv.sub(&Matrix::identity(vtv.rows())).max_abs()
    }
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc = acc + a[(p, q)] * a[(p, q)];
            }
        }
    }
    acc.sqrt()
}

/// Diagonalize a real symmetric matrix.
///
/// Sweeps over all `(p, q)` pairs, annihilating each off-diagonal entry
/// with a plane rotation, until the off-diagonal Frobenius norm drops
/// below `1e-12` of the matrix norm (or machine epsilon for `f32`).
pub fn eigh_symmetric<T: Real>(m: &Matrix<T>) -> Result<Eigen<T>> {
    if !m.is_square() {
        return Err(Error::Precondition(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let scale = m.max_abs();
    if m.asymmetry() > T::lit(1e-9) * scale {
        return Err(Error::Precondition(format!(
            "matrix is not symmetric (asymmetry {:e} at scale {:e})",
            m.asymmetry().as_f64(),
            scale.as_f64()
        )));
    }

    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let tol = T::lit(1e-12).max(T::epsilon()) * norm;

    let mut converged = norm == T::zero();
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::max_value().sqrt() {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // A <- A P
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                // A <- Pᵀ A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            dim: n,
            off_norm: off_diagonal_norm(&a).as_f64(),
            norm: norm.as_f64(),
        });
    }

    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}
