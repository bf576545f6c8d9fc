//! Cyclic Jacobi eigenvalue iteration.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius threshold relative to `‖M‖_F`.
pub const JACOBI_REL_THRESHOLD: f64 = 1e-14;
/// Maximal number of full sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Diagonalizes the symmetric matrix stored row-major in `a` (dimension `n`).
///
/// On return the diagonal of `a` holds the (unsorted) eigenvalues and `v`
/// (row-major, `n × n`) holds the eigenvectors as columns.
pub(crate) fn jacobi_in_place(a: &mut [f64], v: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(v.len(), n * n);
    v.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 || n == 1 {
        return Ok(());
    }
    let threshold = JACOBI_REL_THRESHOLD * frob;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(a, n) <= threshold {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if off_diagonal_norm(a, n) <= threshold {
        Ok(())
    } else {
        Err(Error::IterationLimit {
            sweeps: JACOBI_MAX_SWEEPS,
        })
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}
