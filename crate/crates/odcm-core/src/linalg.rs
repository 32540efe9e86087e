//! Minimal dense linear algebra: LU solve with partial pivoting and a
//! cyclic Jacobi symmetric eigendecomposition. Matrices are row-major
//! `Vec<f64>` of length `n*n`; problem sizes here stay at desk scale
//! (N <= a few thousand), so direct dense routines are adequate.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Solves `A x = b` in place by LU with partial pivoting; `b` becomes `x`.
/// `a` is destroyed. Errors with a condition estimate when a pivot
/// underflows relative to the largest one.
pub fn lu_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut max_pivot = 0.0_f64;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        // pivot search in column k
        let mut p = k;
        let mut best = libm::fabs(a[k * n + k]);
        for i in (k + 1)..n {
            let v = libm::fabs(a[i * n + k]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let pivot = a[k * n + k];
        let abs_pivot = libm::fabs(pivot);
        max_pivot = max_pivot.max(abs_pivot);
        min_pivot = min_pivot.min(abs_pivot);
        if abs_pivot <= f64::EPSILON * max_pivot {
            return Err(Error::IllPosed {
                detail: alloc::format!("zero pivot at column {k} of {n}"),
                condition_estimate: if min_pivot > 0.0 {
                    max_pivot / min_pivot
                } else {
                    f64::INFINITY
                },
            });
        }
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            a[i * n + k] = factor;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
                b[i] -= factor * b[k];
            }
        }
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in (i + 1)..n {
            acc -= a[i * n + j] * b[j];
        }
        b[i] = acc / a[i * n + i];
    }
    Ok(())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored row-major
/// as columns of `v` (`v[i*n + k]` is component `i` of eigenvector `k`), so
/// `A = V diag(w) V^T`.
pub fn sym_eigen(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a_in.len(), n * n);
    let mut a = a_in.to_vec();
    let mut v = alloc::vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob: f64 = libm::sqrt(a.iter().map(|x| x * x).sum());
    if frob == 0.0 || n == 1 {
        let w = (0..n).map(|i| a[i * n + i]).collect();
        return (w, v);
    }
    let tol = 1e-14 * frob;
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if libm::sqrt(2.0 * off) < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if libm::fabs(apq) < tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // rows/columns p and q of A
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let w = (0..n).map(|i| a[i * n + i]).collect();
    (w, v)
}
