//! Interpolation of `‖Λ₂Sx‖ ≤ C‖Λ₁x‖` to fractional powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::{spectral_norm, Mat, SymMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeinzRow {
    pub nu: f64,
    /// `‖Λ₂^ν S Λ₁^{−ν}‖`.
    pub lhs: f64,
    /// `C^ν ‖S‖^{1−ν}`.
    pub rhs: f64,
    pub tol: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeinzReport {
    /// `‖Λ₂ S Λ₁⁻¹‖`.
    pub c: f64,
    pub norm_s: f64,
    pub rows: Vec<HeinzRow>,
    /// Largest relative endpoint mismatch at `ν ∈ {0, 1}`.
    pub endpoint_residual: f64,
    pub endpoints_hold: bool,
}

impl HeinzReport {
    pub fn passed(&self) -> bool {
        self.endpoints_hold && self.rows.iter().all(|r| r.holds)
    }

    /// Smallest `rhs + tol − lhs` over the grid.
    pub fn min_slack(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.rhs - r.lhs)
            .fold(f64::INFINITY, f64::min)
    }
}

fn require_pd(m: &SymMatrix, tol: &Tolerances) -> Result<()> {
    let low = m.min_eigenvalue()?;
    if low <= tol.pd {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: low });
    }
    Ok(())
}

/// `S` maps the space of `Λ₁` into the space of `Λ₂`.
pub fn check_heinz(
    lambda1: &SymMatrix,
    lambda2: &SymMatrix,
    s: &Mat,
    nu_grid: &[f64],
    tol: &Tolerances,
) -> Result<HeinzReport> {
    if s.ncols() != lambda1.n() {
        return Err(Error::DimensionMismatch {
            expected: lambda1.n(),
            found: s.ncols(),
        });
    }
    if s.nrows() != lambda2.n() {
        return Err(Error::DimensionMismatch {
            expected: lambda2.n(),
            found: s.nrows(),
        });
    }
    if let Some(&nu) = nu_grid.iter().find(|nu| !(0.0..=1.0).contains(*nu)) {
        return Err(Error::InvalidArgument(format!("exponent {nu} outside [0, 1]")));
    }
    require_pd(lambda1, tol)?;
    require_pd(lambda2, tol)?;
    let e1 = lambda1.eig()?;
    let e2 = lambda2.eig()?;
    let norm_s = spectral_norm(s);
    let weighted = |nu: f64| -> Result<f64> {
        let right = e1.apply(|l| l.powf(-nu))?;
        let left = e2.apply(|l| l.powf(nu))?;
        Ok(spectral_norm(&(left.as_mat() * s * right.as_mat())))
    };
    let c = weighted(1.0)?;
    let heinz_tol = tol.heinz * (1.0 + c + norm_s);
    let mut rows = Vec::with_capacity(nu_grid.len());
    let mut endpoint_residual = 0.0_f64;
    for &nu in nu_grid {
        let lhs = weighted(nu)?;
        let rhs = c.powf(nu) * norm_s.powf(1.0 - nu);
        if nu == 0.0 {
            endpoint_residual = endpoint_residual.max((lhs - norm_s).abs() / norm_s.max(1.0));
        }
        if nu == 1.0 {
            endpoint_residual = endpoint_residual.max((lhs - c).abs() / c.max(1.0));
        }
        rows.push(HeinzRow {
            nu,
            lhs,
            rhs,
            tol: heinz_tol,
            holds: lhs <= rhs + heinz_tol,
        });
    }
    Ok(HeinzReport {
        c,
        norm_s,
        rows,
        endpoint_residual,
        endpoints_hold: endpoint_residual <= tol.endpoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }

    #[test]
    fn identity_weights_give_equality() {
        let s = Mat::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let r = check_heinz(&SymMatrix::identity(3), &SymMatrix::identity(2), &s, &grid(), &Tolerances::default())
            .unwrap();
        assert!(r.passed());
        assert!((r.c - r.norm_s).abs() < 1e-14);
        for row in &r.rows {
            assert!((row.lhs - row.rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_weights() {
        let l1 = SymMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let l2 = SymMatrix::from_diagonal(&[9.0, 1.0]).unwrap();
        let s = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let r = check_heinz(&l1, &l2, &s, &grid(), &Tolerances::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.endpoint_residual <= 1e-14);
    }

    #[test]
    fn rejects_singular_weight() {
        let l1 = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let s = Mat::identity(2, 2);
        assert!(matches!(
            check_heinz(&l1, &SymMatrix::identity(2), &s, &grid(), &Tolerances::default()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
