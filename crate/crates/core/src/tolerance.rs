//! Default numerical tolerances.
//!
//! Relative tolerances are stored as bare factors; the call sites apply the
//! scale (`1 + ‖A‖`, `1 + |direct|`, ...) that belongs to each check. The
//! environment variable `GAPMM_TOL_SCALE` multiplies every factor.

use serde::{Deserialize, Serialize};

pub const TOL_SCALE_ENV: &str = "GAPMM_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Reconstruction residuals, relative to `1 + ‖M‖`.
    pub recon: f64,
    /// Orthonormality of eigenvector and basis matrices.
    pub ortho: f64,
    /// Agreement between form evaluation and direct quadratic evaluation.
    pub form: f64,
    /// Minimal distance of eigenvalues from a split point, relative to `1 + ‖A‖`.
    pub gap: f64,
    /// `‖P₊ − Q₊‖` must stay below `1 − graph`.
    pub graph: f64,
    /// Smallest admissible singular value of `P₊Q₊|Ran P₊`.
    pub sv: f64,
    /// Minimax agreement, relative to `1 + |direct|`.
    pub minimax: f64,
    /// Negativity on `Ran P₋`, relative to `1 + ‖B‖`.
    pub neg: f64,
    /// Off-diagonality residuals, relative to `1 + ‖B‖`.
    pub offdiag: f64,
    /// Block diagonalization, relative to `(1 + ‖A‖ + ‖V‖)(1 + ‖Y‖)`.
    pub block_diag: f64,
    /// Heinz inequality, relative to `1 + C + ‖S‖`.
    pub heinz: f64,
    /// Positive definiteness threshold.
    pub pd: f64,
    /// Eigenvalue ordering and Lipschitz estimates, relative to `1 + |λ|`.
    pub order: f64,
    /// Slack on the sine bound for the projector distance.
    pub projector: f64,
    /// Slack on the `√2/2` bound for off-diagonal perturbations.
    pub projector_offdiag: f64,
    /// Heinz endpoint agreement, relative to `max(1, value)`.
    pub endpoint: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            recon: 1e-10,
            ortho: 1e-10,
            form: 1e-9,
            gap: 1e-8,
            graph: 1e-8,
            sv: 1e-10,
            minimax: 1e-7,
            neg: 1e-10,
            offdiag: 1e-10,
            block_diag: 1e-9,
            heinz: 1e-9,
            pd: 1e-10,
            order: 1e-8,
            projector: 1e-10,
            projector_offdiag: 1e-12,
            endpoint: 1e-10,
        }
    }
}

impl Tolerances {
    /// Every factor multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            recon: self.recon * factor,
            ortho: self.ortho * factor,
            form: self.form * factor,
            gap: self.gap * factor,
            graph: self.graph * factor,
            sv: self.sv * factor,
            minimax: self.minimax * factor,
            neg: self.neg * factor,
            offdiag: self.offdiag * factor,
            block_diag: self.block_diag * factor,
            heinz: self.heinz * factor,
            pd: self.pd * factor,
            order: self.order * factor,
            projector: self.projector * factor,
            projector_offdiag: self.projector_offdiag * factor,
            endpoint: self.endpoint * factor,
        }
    }

    /// Defaults, scaled by `GAPMM_TOL_SCALE` when it is set to a positive number.
    pub fn from_env() -> Self {
        let base = Self::default();
        match std::env::var(TOL_SCALE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
        {
            Some(f) if f.is_finite() && f > 0.0 => base.scaled(f),
            _ => base,
        }
    }

    /// Residual tolerances of conclusions set to `value`; the hypothesis
    /// gates (`gap`, `graph`, `sv`, `neg`, `offdiag`, `pd`) keep their values.
    pub fn with_conclusions(&self, value: f64) -> Self {
        Self {
            recon: value,
            ortho: value,
            form: value,
            minimax: value,
            block_diag: value,
            heinz: value,
            order: value,
            projector: value,
            projector_offdiag: value,
            endpoint: value,
            ..*self
        }
    }

    /// Every factor set to the same value; used for tolerance sensitivity studies.
    pub fn uniform(value: f64) -> Self {
        Self {
            recon: value,
            ortho: value,
            form: value,
            gap: value,
            graph: value,
            sv: value,
            minimax: value,
            neg: value,
            offdiag: value,
            block_diag: value,
            heinz: value,
            pd: value,
            order: value,
            projector: value,
            projector_offdiag: value,
            endpoint: value,
        }
    }
}
