//! Compressions of `P₊Q₋` to `Ran P₊`: spectral radius, bijectivity margin
//! and the weighted norm condition.

use serde::{Deserialize, Serialize};

use super::CheckConfig;
use crate::error::Result;
use crate::spectral::{split, SpectralSplit};
use crate::symmat::{eigvals_sym, spectral_norm, Mat, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRadReport {
    /// `‖ΛS − SΛ − K‖` on `Ran P₊`.
    pub commutator_residual: f64,
    pub commutator_tol: f64,
    pub norm_s: f64,
    pub spectral_radius: f64,
    pub norm_k: f64,
    /// Certified `(a, β)` with `‖Kx‖ ≤ a‖x‖ + β‖Λx‖`.
    pub k_bound_a: f64,
    pub beta: f64,
    pub radius_bound_holds: bool,
    pub pq_norm: f64,
    /// Threshold `(1 − 2b − b²)/(1 − b²)` for an `A`-bound `b`.
    pub a_bound_threshold: f64,
    pub a_bound_gate: bool,
    /// Threshold `1 − 2b` for a `B`-bound `b`.
    pub b_bound_threshold: f64,
    pub b_bound_gate: bool,
    pub notes: Vec<String>,
}

impl SpecRadReport {
    pub fn passed(&self) -> bool {
        self.commutator_residual <= self.commutator_tol && self.radius_bound_holds
    }
}

/// Smallest `a` with `KᵀK ⪯ a²I + β²Λ²`, for a not necessarily symmetric `K`.
fn relative_bound_a(k: &Mat, lam: &SymMatrix, beta: f64) -> Result<f64> {
    let l = lam.as_mat();
    let m = k.transpose() * k - (l * l) * (beta * beta);
    Ok(SymMatrix::symmetrized(m).max_eigenvalue()?.max(0.0).sqrt())
}

fn splits(a: &SymMatrix, b: &SymMatrix, gamma: f64, cfg: &CheckConfig) -> Result<(SpectralSplit, SpectralSplit)> {
    Ok((split(a, gamma, &cfg.tol)?, split(b, gamma, &cfg.tol)?))
}

pub fn check_specrad(a: &SymMatrix, v: &SymMatrix, gamma: f64, cfg: &CheckConfig) -> Result<SpecRadReport> {
    let b = a.add(v)?;
    let (sa, sb) = splits(a, &b, gamma, cfg)?;
    let wp = &sa.basis_p;
    let qm = &sb.pm;
    let vm = v.as_mat();
    let s = wp.transpose() * qm * wp;
    let k = wp.transpose() * (qm * vm - vm * qm) * wp;
    let lam = wp.transpose() * a.as_mat() * wp;
    let comm = &lam * &s - &s * &lam - &k;
    let commutator_residual = spectral_norm(&comm);
    let commutator_tol = cfg.tol.block_diag * (1.0 + a.norm() + v.norm());

    let s_sym = SymMatrix::symmetrized(s);
    let norm_s = s_sym.norm();
    let spectral_radius = eigvals_sym(&s_sym)?.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let beta = cfg.small_b;
    let norm_k = spectral_norm(&k);
    let k_bound_a = relative_bound_a(&k, &SymMatrix::symmetrized(lam), beta)?;
    let radius_bound_holds = spectral_radius <= norm_s + beta + 1e-9;

    let pq_norm = spectral_norm(&(&sa.pp * &sb.pm));
    let a_bound_threshold = (1.0 - 2.0 * beta - beta * beta) / (1.0 - beta * beta);
    let b_bound_threshold = 1.0 - 2.0 * beta;
    Ok(SpecRadReport {
        commutator_residual,
        commutator_tol,
        norm_s,
        spectral_radius,
        norm_k,
        k_bound_a,
        beta,
        radius_bound_holds,
        pq_norm,
        a_bound_threshold,
        a_bound_gate: pq_norm < a_bound_threshold,
        b_bound_threshold,
        b_bound_gate: pq_norm < b_bound_threshold,
        notes: vec![
            "finite-dim collapse: S is self-adjoint on Ran P+, so r(S) = ‖S‖".into(),
            "finite-dim collapse: K is Λ-bounded with arbitrarily small relative bound".into(),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlsReport {
    /// `σ_min(P₊Q₊|Ran P₊)`, the bijectivity margin.
    pub sigma_min: f64,
    pub pq_norm: f64,
    /// `σ_min ≥ 1 − ‖P₊Q₋‖`, evaluated only when `‖P₊Q₋‖ < 1`.
    pub neumann_holds: Option<bool>,
    /// `(α, ‖(|A−γ|+α)^{1/2} P₊Q₋ (|A−γ|+α)^{−1/2}‖)`.
    pub weighted: Vec<(f64, f64)>,
    /// Whether each weighted quantity is below 1; reported, not asserted.
    pub weighted_gate: Vec<bool>,
}

impl GlsReport {
    pub fn passed(&self) -> bool {
        self.neumann_holds != Some(false)
    }
}

pub fn check_gls_conditions(a: &SymMatrix, b: &SymMatrix, gamma: f64, cfg: &CheckConfig) -> Result<GlsReport> {
    let (sa, sb) = splits(a, b, gamma, cfg)?;
    let wp = &sa.basis_p;
    let c = SymMatrix::symmetrized(wp.transpose() * &sb.pp * wp);
    let sigma_min = if wp.ncols() == 0 { 1.0 } else { c.min_eigenvalue()? };
    let pq = &sa.pp * &sb.pm;
    let pq_norm = spectral_norm(&pq);
    let neumann_holds = (pq_norm < 1.0).then(|| sigma_min >= 1.0 - pq_norm - 1e-10);
    let eig = a.eig()?;
    let mut weighted = Vec::new();
    for alpha in [0.0, 1.0] {
        let up = eig.apply(|l| ((l - gamma).abs() + alpha).sqrt())?;
        let down = eig.apply(|l| 1.0 / ((l - gamma).abs() + alpha).sqrt())?;
        weighted.push((alpha, spectral_norm(&(up.as_mat() * &pq * down.as_mat()))));
    }
    let weighted_gate = weighted.iter().map(|&(_, q)| q < 1.0).collect();
    Ok(GlsReport {
        sigma_min,
        pq_norm,
        neumann_holds,
        weighted,
        weighted_gate,
    })
}
