//! Dense kernels for the small (dim <= 16) matrices used throughout.
//!
//! Matrices are row-major `Vec<f64>` wrapped in [`Mat`]. Nothing here is
//! tuned for large dimensions; the design envelope is `n + 1 <= 16`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::F64Ext;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Mat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn transpose(&self) -> Mat {
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        let n = self.dim;
        debug_assert_eq!(n, other.dim);
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `self * v` for a column vector.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.data[i * n + j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &Mat) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
        det
    }

    /// Solve `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut x: Vec<f64> = b.to_vec();
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                x.swap(col, pivot);
            }
            let p = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Some(x)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Orthonormalizes `vectors` in order, in place. Returns the residual norm of
/// each vector before normalization (callers use these for degeneracy
/// detection).
pub fn orthonormalize(vectors: &mut [Vec<f64>]) -> Vec<f64> {
    let mut residuals = Vec::with_capacity(vectors.len());
    for i in 0..vectors.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = vectors.split_at_mut(i);
                let c = dot(&tail[0], &head[j]);
                axpy(&mut tail[0], -c, &head[j]);
            }
        }
        let r = norm(&vectors[i]);
        residuals.push(r);
        if r > 0.0 {
            let inv = 1.0 / r;
            for v in vectors[i].iter_mut() {
                *v *= inv;
            }
        }
    }
    residuals
}

/// Gram matrix of a set of vectors.
pub fn gram(vectors: &[Vec<f64>]) -> Mat {
    let n = vectors.len();
    let mut g = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, dot(&vectors[i], &vectors[j]));
        }
    }
    g
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and
/// eigenvectors as rows of the returned matrix (row `i` pairs with
/// `eigenvalues[i]`). Deterministic; accurate to near machine precision for
/// the small matrices used here.
pub fn jacobi_eigen(sym: &Mat) -> (Vec<f64>, Mat) {
    let n = sym.dim;
    let mut a = sym.clone();
    let mut v = Mat::identity(n);
    let max_sweeps = 64;
    for _sweep in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.at(p, q) * a.at(p, q);
            }
        }
        let scale = a.max_abs().max(1e-300);
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(p, k);
                    let vkq = v.at(q, k);
                    v.set(p, k, c * vkp - s * vkq);
                    v.set(q, k, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Mat::zeros(n);
    for (row, &idx) in order.iter().enumerate() {
        vals.push(diag[idx]);
        for k in 0..n {
            vecs.set(row, k, v.at(idx, k));
        }
    }
    (vals, vecs)
}

/// Matrix exponential of a skew-symmetric matrix via scaling and squaring
/// with a diagonal Pade(6,6) approximant.
///
/// For skew input the Pade approximant is exactly orthogonal in exact
/// arithmetic, so repeated frame transport does not drift away from the
/// orthogonal group.
pub fn exp_skew(k: &Mat) -> Mat {
    let n = k.dim;
    let norm = k.max_abs() * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let mut a = k.clone();
    a.scale(scale);

    // Pade(6,6): p(A) = sum c_m A^m, exp(A) ~ p(-A)^{-1} p(A).
    let c = [
        1.0,
        0.5,
        0.11363636363636365,
        0.015151515151515152,
        0.0012626262626262627,
        6.313131313131313e-5,
        1.5031264916467781e-6,
    ];
    let mut term = Mat::identity(n);
    let mut p_plus = Mat::identity(n);
    let mut p_minus = Mat::identity(n);
    for (m, &cm) in c.iter().enumerate().skip(1) {
        term = term.matmul(&a);
        let mut t = term.clone();
        t.scale(cm);
        p_plus.add_assign(&t);
        if m % 2 == 1 {
            t.scale(-1.0);
        }
        p_minus.add_assign(&t);
    }
    let mut result = solve_matrix(&p_minus, &p_plus);
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// phi(A) = sum_{m>=0} A^m / (m+1)!  (= (exp(A) - I) A^{-1} when invertible).
///
/// Uses the same scaling as `exp_skew` with the doubling identity
/// `phi(2A) = (exp(A) + I) phi(A) / 2`.
pub fn phi_matrix(k: &Mat) -> Mat {
    let n = k.dim;
    let norm = k.max_abs() * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let mut a = k.clone();
    a.scale(scale);

    let mut phi = Mat::identity(n);
    let mut term = Mat::identity(n);
    let mut factorial = 1.0;
    for m in 1..=12 {
        term = term.matmul(&a);
        factorial *= (m + 1) as f64;
        let mut t = term.clone();
        t.scale(1.0 / factorial);
        phi.add_assign(&t);
    }
    let mut expa = exp_skew(&a);
    for _ in 0..squarings {
        // phi(2A) = (exp(A) + I) phi(A) / 2, exp(2A) = exp(A)^2
        let mut e_plus_i = expa.clone();
        for i in 0..n {
            e_plus_i.data[i * n + i] += 1.0;
        }
        phi = e_plus_i.matmul(&phi);
        phi.scale(0.5);
        expa = expa.matmul(&expa);
    }
    phi
}

/// Principal logarithm of a rotation matrix close to the identity.
///
/// Valid for `||Q - I|| < 1`; the result is projected onto the skew part to
/// keep downstream exponentials exactly orthogonal.
pub fn log_rotation_near_identity(q: &Mat) -> Mat {
    let n = q.dim;
    let mut x = q.clone();
    for i in 0..n {
        x.data[i * n + i] -= 1.0;
    }
    // log(I + X) = X - X^2/2 + X^3/3 - ...
    let mut result = Mat::zeros(n);
    let mut power = Mat::identity(n);
    let mut sign = 1.0;
    for m in 1..=24 {
        power = power.matmul(&x);
        let mut t = power.clone();
        t.scale(sign / m as f64);
        result.add_assign(&t);
        sign = -sign;
        if power.max_abs() / (m as f64) < 1e-18 {
            break;
        }
    }
    // Skew projection.
    let rt = result.transpose();
    for i in 0..n * n {
        result.data[i] = 0.5 * (result.data[i] - rt.data[i]);
    }
    result
}

fn solve_matrix(a: &Mat, b: &Mat) -> Mat {
    let n = a.dim;
    let mut out = Mat::zeros(n);
    // Solve a * x_col = b_col for each column.
    let bt = b.transpose();
    for col in 0..n {
        let x = a
            .solve(bt.row(col))
            .expect("Pade denominator is nonsingular for scaled input");
        for row in 0..n {
            out.set(row, col, x[row]);
        }
    }
    out
}
