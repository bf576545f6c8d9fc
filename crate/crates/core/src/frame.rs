//! Orthonormal frames: Gram–Schmidt and Haar-distributed sampling.

use rand_distr::{Distribution, StandardNormal};

use crate::rng::Rng;
use crate::symmat::{Mat, Vector};

/// Orthonormalizes the columns of `m` by modified Gram–Schmidt with one
/// reorthogonalization pass. Columns whose residual norm drops below
/// `rel_tol` times their original norm are discarded.
///
/// Returns the orthonormal columns; their count is the numerical rank.
pub fn orthonormalize(m: &Mat, rel_tol: f64) -> Mat {
    let mut kept: Vec<Vector> = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut v: Vector = m.column(j).into_owned();
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &kept {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let r = v.norm();
        if r > rel_tol * original {
            kept.push(v / r);
        }
    }
    if kept.is_empty() {
        return Mat::zeros(m.nrows(), 0);
    }
    Mat::from_columns(&kept)
}

/// `rows × cols` matrix of independent standard normal entries.
pub fn gaussian(rng: &mut Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed `n × k` frame: orthonormalized Gaussian matrix.
pub fn haar_frame(rng: &mut Rng, n: usize, k: usize) -> Mat {
    loop {
        let q = orthonormalize(&gaussian(rng, n, k), 1e-8);
        if q.ncols() == k {
            return q;
        }
    }
}

/// Uniformly distributed unit vector in `ℝⁿ`.
pub fn unit_vector(rng: &mut Rng, n: usize) -> Vector {
    loop {
        let v: Vector = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let r = v.norm();
        if r > 1e-12 {
            return v / r;
        }
    }
}
