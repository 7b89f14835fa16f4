//! Small dense and sparse linear-algebra kernels for Laplacian systems.

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![T::zero(); dim * dim] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.dim + j]
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix, or
    /// `None` if a pivot is not positive.
    pub fn cholesky(&self) -> Option<DenseMatrix<T>> {
        let n = self.dim;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = self.at(j, j);
            for k in 0..j {
                let x = l.at(j, k);
                d -= x * x;
            }
            if !(d > T::zero()) {
                return None;
            }
            let d = d.sqrt();
            *l.at_mut(j, j) = d;
            for i in j + 1..n {
                let mut s = self.at(i, j);
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    s -= l.data[ri + k] * l.data[rj + k];
                }
                *l.at_mut(i, j) = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of an SPD matrix through its Cholesky factor.
    pub fn spd_inverse(&self) -> Option<DenseMatrix<T>> {
        let n = self.dim;
        let l = self.cholesky()?;
        // W = L^{-1}, lower triangular; stored transposed so columns are rows.
        let mut wt = DenseMatrix::zeros(n);
        for c in 0..n {
            // Solve L w = e_c; w[i] = 0 for i < c.
            let row = c * n;
            wt.data[row + c] = T::one() / l.at(c, c);
            for i in c + 1..n {
                let mut s = T::zero();
                let li = i * n;
                for k in c..i {
                    s -= l.data[li + k] * wt.data[row + k];
                }
                wt.data[row + i] = s / l.at(i, i);
            }
        }
        // A^{-1} = W^T W, entry (a, b) = sum_i W[i][a] W[i][b] = <wt_a, wt_b>.
        let mut inv = DenseMatrix::zeros(n);
        for a in 0..n {
            for b in a..n {
                let start = b; // wt_a[i] and wt_b[i] vanish for i < max(a, b) = b.
                let (ra, rb) = (a * n, b * n);
                let mut s = T::zero();
                for i in start..n {
                    s += wt.data[ra + i] * wt.data[rb + i];
                }
                *inv.at_mut(a, b) = s;
                *inv.at_mut(b, a) = s;
            }
        }
        Some(inv)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        self.symmetric_eigen(false).0
    }

    /// Eigenvalues (ascending) and, if requested, column eigenvectors.
    pub fn symmetric_eigen(&self, vectors: bool) -> (Vec<T>, Option<DenseMatrix<T>>) {
        let n = self.dim;
        let mut a = self.clone();
        let mut v = if vectors {
            let mut id = DenseMatrix::zeros(n);
            for i in 0..n {
                *id.at_mut(i, i) = T::one();
            }
            Some(id)
        } else {
            None
        };
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let mut off = T::zero();
            let mut total = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let x = a.at(i, j) * a.at(i, j);
                    total += x;
                    if i != j {
                        off += x;
                    }
                }
            }
            if off <= eps * eps * total || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.at(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a.at(p, p);
                    let aqq = a.at(q, q);
                    let theta = (aqq - app) / (apq + apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.at(k, p);
                        let akq = a.at(k, q);
                        *a.at_mut(k, p) = c * akp - s * akq;
                        *a.at_mut(k, q) = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a.at(p, k);
                        let aqk = a.at(q, k);
                        *a.at_mut(p, k) = c * apk - s * aqk;
                        *a.at_mut(q, k) = s * apk + c * aqk;
                    }
                    if let Some(v) = v.as_mut() {
                        for k in 0..n {
                            let vkp = v.at(k, p);
                            let vkq = v.at(k, q);
                            *v.at_mut(k, p) = c * vkp - s * vkq;
                            *v.at_mut(k, q) = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.at(i, i).partial_cmp(&a.at(j, j)).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| a.at(i, i)).collect();
        let vectors = v.map(|v| {
            let mut out = DenseMatrix::zeros(n);
            for (new, &old) in order.iter().enumerate() {
                for k in 0..n {
                    *out.at_mut(k, new) = v.at(k, old);
                }
            }
            out
        });
        (values, vectors)
    }
}

/// Symmetric sparse matrix in compressed rows, used for grounded Laplacians.
#[derive(Clone, Debug)]
pub struct SparseSym<T> {
    pub dim: usize,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Scalar> SparseSym<T> {
    pub fn mul(&self, x: &[T], out: &mut [T]) {
        for i in 0..self.dim {
            let mut s = T::zero();
            for k in self.row_start[i]..self.row_start[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            out[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                (self.row_start[i]..self.row_start[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map(|k| self.vals[k])
                    .unwrap_or_else(T::zero)
            })
            .collect()
    }

    /// Jacobi-preconditioned conjugate gradient; stops once the residual norm
    /// drops below `tol` times the right-hand-side norm.
    pub fn solve_cg(&self, b: &[T], tol: T, max_iter: usize) -> Vec<T> {
        let n = self.dim;
        let diag = self.diagonal();
        let mut x = vec![T::zero(); n];
        let mut r = b.to_vec();
        let mut z: Vec<T> = r.iter().zip(&diag).map(|(&ri, &d)| ri / d).collect();
        let mut p = z.clone();
        let mut ap = vec![T::zero(); n];
        let bnorm = b.iter().map(|&v| v * v).sum::<T>().sqrt();
        if bnorm == T::zero() {
            return x;
        }
        let mut rz: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        for _ in 0..max_iter {
            self.mul(&p, &mut ap);
            let pap: T = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
            if pap == T::zero() {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rnorm = r.iter().map(|&v| v * v).sum::<T>().sqrt();
            if rnorm <= tol * bnorm {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    }
}
