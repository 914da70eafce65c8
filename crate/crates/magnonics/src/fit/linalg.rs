//! Minimal dense matrix support for the least-squares engine. Problems here
//! have at most a handful of parameters, so a plain row-major buffer and a
//! Cholesky factorization cover everything the solver needs.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    /// AᵀA for this matrix (cols × cols, symmetric).
    pub fn normal_matrix(&self) -> Mat {
        let n = self.cols;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for r in 0..self.rows {
                    acc += self.at(r, i) * self.at(r, j);
                }
                *out.at_mut(i, j) = acc;
                *out.at_mut(j, i) = acc;
            }
        }
        out
    }

    /// Aᵀb for this matrix.
    pub fn transpose_mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let br = b[r];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * br;
            }
        }
        out
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix; returns the
/// lower factor, or `None` if the matrix is not positive definite.
fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.at(i, j);
            for k in 0..j {
                sum -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                *l.at_mut(i, j) = sum.sqrt();
            } else {
                *l.at_mut(i, j) = sum / l.at(j, j);
            }
        }
    }
    Some(l)
}

/// Solve A x = b for symmetric positive-definite A via Cholesky.
pub fn solve_spd(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a)?;
    let n = a.rows();
    // Forward substitution L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.at(i, k) * y[k];
        }
        y[i] = sum / l.at(i, i);
    }
    // Back substitution Lᵀ x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l.at(k, i) * x[k];
        }
        x[i] = sum / l.at(i, i);
    }
    Some(x)
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvector columns).
pub fn eigh(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m.at(i, j) * m.at(i, j);
            }
        }
        let scale: f64 = (0..n).map(|i| m.at(i, i) * m.at(i, i)).sum();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (m.at(q, q) - m.at(p, p)) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.at(k, p);
                    let mkq = m.at(k, q);
                    *m.at_mut(k, p) = c * mkp - s * mkq;
                    *m.at_mut(k, q) = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m.at(p, k);
                    let mqk = m.at(q, k);
                    *m.at_mut(p, k) = c * mpk - s * mqk;
                    *m.at_mut(q, k) = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    *v.at_mut(k, p) = c * vkp - s * vkq;
                    *v.at_mut(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m.at(i, i)).collect(), v)
}

/// Inverse of a symmetric matrix via its eigendecomposition; `None` when any
/// eigenvalue falls below `rel_tol` times the largest (rank deficient).
pub fn invert_sym_eigh(a: &Mat, rel_tol: f64) -> Option<Mat> {
    let n = a.rows();
    let (vals, vecs) = eigh(a);
    let max = vals.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    if max <= 0.0 || vals.iter().any(|&v| v <= rel_tol * max) {
        return None;
    }
    let mut inv = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += vecs.at(i, k) * vecs.at(j, k) / vals[k];
            }
            *inv.at_mut(i, j) = acc;
        }
    }
    Some(inv)
}
