//! Test-side oracles that share no code with the library's eigensolvers.

#![allow(dead_code)]

use gapmm::symmat::{Mat, SymMatrix};

/// Number of eigenvalues of `m` strictly below `x`, by Sylvester's law of
/// inertia applied to an unpivoted `LDLᵀ` of `m − x` (lower triangle only).
pub fn count_below(m: &Mat, x: f64) -> usize {
    let n = m.nrows();
    let mut a: Vec<f64> = (0..n * n).map(|i| m[(i / n, i % n)]).collect();
    for i in 0..n {
        a[i * n + i] -= x;
    }
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
    let mut negatives = 0;
    for k in 0..n {
        let mut p = a[k * n + k];
        if p == 0.0 {
            p = -f64::EPSILON * scale;
        }
        if p < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let l = a[i * n + k] / p;
            if l == 0.0 {
                continue;
            }
            for j in k + 1..=i {
                a[i * n + j] -= l * a[j * n + k];
            }
        }
    }
    negatives
}

/// `index`-th smallest eigenvalue (0-based) by bisection on [`count_below`].
pub fn bisect_eigenvalue(m: &SymMatrix, index: usize) -> f64 {
    let mm = m.as_mat();
    let n = mm.nrows();
    let radius = (0..n)
        .map(|i| (0..n).map(|j| mm[(i, j)].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if count_below(mm, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn power_norm(m: &Mat, iters: usize) -> f64 {
    let mut x = nalgebra::DVector::from_fn(m.ncols(), |i, _| 1.0 + (i as f64 * 0.37).sin());
    let mut est = 0.0;
    for _ in 0..iters {
        let y = m.transpose() * (m * &x);
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        est = norm.sqrt();
        x = y / norm;
    }
    est
}
