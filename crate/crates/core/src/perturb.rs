//! Perturbation splittings and certified relative bounds.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::SpectralSplit;
use crate::symmat::{check_dim, spectral_norm, Mat, SymMatrix};

/// Positive/negative and diagonal/off-diagonal parts of a perturbation.
#[derive(Debug, Clone)]
pub struct PerturbationSplit {
    pub vp: SymMatrix,
    pub vn: SymMatrix,
    pub vdiag: SymMatrix,
    pub voff: SymMatrix,
}

impl PerturbationSplit {
    pub fn new(v: &SymMatrix, split: &SpectralSplit) -> Result<Self> {
        let (vp, vn) = split_pos_neg(v)?;
        let (vdiag, voff) = split_diag_offdiag(v, split)?;
        Ok(Self { vp, vn, vdiag, voff })
    }

    /// Off-diagonal block `W = basis_pᵀ·V·basis_m` (`k₊ × k₋`).
    pub fn off_block(&self, split: &SpectralSplit) -> Mat {
        split.basis_p.transpose() * (self.voff.as_mat() * &split.basis_m)
    }
}

/// `V = Vp − Vn` with `Vp = max(V, 0)`, `Vn = max(−V, 0)`.
pub fn split_pos_neg(v: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    let eig = v.eig()?;
    Ok((eig.apply(|t| t.max(0.0))?, eig.apply(|t| (-t).max(0.0))?))
}

/// `Vdiag = P₊VP₊ + P₋VP₋`, `Voff = P₊VP₋ + P₋VP₊`.
pub fn split_diag_offdiag(v: &SymMatrix, s: &SpectralSplit) -> Result<(SymMatrix, SymMatrix)> {
    check_dim(s.n(), v.n())?;
    let vm = v.as_mat();
    let diag = &s.pp * vm * &s.pp + &s.pm * vm * &s.pm;
    let off = vm - &diag;
    Ok((SymMatrix::symmetrized(diag), SymMatrix::symmetrized(off)))
}

/// `‖P₊VP₊‖` and `‖P₋VP₋‖`.
pub fn diagonal_block_norms(v: &SymMatrix, s: &SpectralSplit) -> (f64, f64) {
    let vm = v.as_mat();
    let plus = s.basis_p.transpose() * vm * &s.basis_p;
    let minus = s.basis_m.transpose() * vm * &s.basis_m;
    (spectral_norm(&plus), spectral_norm(&minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    OperatorBound,
    FormBound,
}

/// Which side of the reference matrix is treated as bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Lower,
    Upper,
}

/// Relative bound `(a, b)` of `V` with respect to `A`, with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelBound {
    pub a: f64,
    pub b: f64,
    pub kind: BoundKind,
    pub certified: bool,
    /// Semibound of `A` (`λ_min` for the lower branch, `λ_max` for the upper); form bounds only.
    pub m: Option<f64>,
    pub branch: Option<Branch>,
}

impl RelBound {
    /// Constant `a'` of the signed certificate `|⟨x,Vx⟩| ≤ a'‖x‖² ± b⟨x,Ax⟩`
    /// (`+` for the lower branch, `−` for the upper). Since `±⟨x,Ax⟩ ≤ |⟨x,Ax⟩|`
    /// this is also a valid `a` for `|𝔳[x,x]| ≤ a‖x‖² + b|𝔞[x,x]|`.
    pub fn a_signed(&self) -> f64 {
        match (self.branch, self.m) {
            (Some(Branch::Lower), Some(m)) => self.a + self.b * (m.abs() - m),
            (Some(Branch::Upper), Some(m)) => self.a + self.b * (m.abs() + m),
            _ => self.a,
        }
    }

    /// `ã` of the continuity estimate: `a' + |m| − m` (lower), `a' + m + |m|` (upper).
    pub fn tilde_a(&self) -> f64 {
        let a = self.a_signed();
        match (self.branch, self.m) {
            (Some(Branch::Lower), Some(m)) => a + m.abs() - m,
            (Some(Branch::Upper), Some(m)) => a + m + m.abs(),
            _ => a,
        }
    }

    /// Additive constant of the upper eigenvalue bound:
    /// `a' + b|m| − bm` (lower), `a' + b|m| + bm` (upper).
    pub fn upper_bound_shift(&self) -> f64 {
        let a = self.a_signed();
        let m = self.m.unwrap_or(0.0);
        match self.branch {
            Some(Branch::Upper) => a + self.b * m.abs() + self.b * m,
            _ => a + self.b * m.abs() - self.b * m,
        }
    }

    /// Upper bound for `λ_k(B|Ran Q₊)` given `λ_k(A|Ran P₊)`. `None` for the
    /// upper branch when `b > 1`.
    pub fn eigenvalue_upper_bound(&self, lambda_a: f64) -> Option<f64> {
        match self.branch {
            Some(Branch::Upper) if self.b > 1.0 => None,
            Some(Branch::Upper) => Some((1.0 - self.b) * lambda_a + self.upper_bound_shift()),
            _ => Some((1.0 + self.b) * lambda_a + self.upper_bound_shift()),
        }
    }
}

/// Smallest `a` with `VᵀV ⪯ a²I + b²A²`; this certifies `‖Vx‖ ≤ a‖x‖ + b‖Ax‖`.
pub fn min_operator_bound_a(v: &SymMatrix, a_mat: &SymMatrix, b: f64) -> Result<RelBound> {
    check_dim(a_mat.n(), v.n())?;
    let vm = v.as_mat();
    let am = a_mat.as_mat();
    let m = vm.transpose() * vm - (am * am) * (b * b);
    let top = SymMatrix::symmetrized(m).max_eigenvalue()?;
    Ok(RelBound {
        a: top.max(0.0).sqrt(),
        b,
        kind: BoundKind::OperatorBound,
        certified: true,
        m: None,
        branch: None,
    })
}

/// Smallest `a` with `−aI − bÃ ⪯ V ⪯ aI + bÃ`, where `Ã = A − mI + |m|I`
/// for the lower branch (`m = λ_min(A)`) and `Ã = −A + mI + |m|I` for the
/// upper branch (`m = λ_max(A)`). `Ã ⪰ 0`, so `a` is nonincreasing in `b`;
/// [`RelBound::a_signed`] converts it to the constant relative to `±A`.
pub fn min_form_bound_a(v: &SymMatrix, a_mat: &SymMatrix, b: f64, branch: Branch) -> Result<RelBound> {
    check_dim(a_mat.n(), v.n())?;
    let (m, tilde) = match branch {
        Branch::Lower => {
            let m = a_mat.min_eigenvalue()?;
            (m, a_mat.shift(m - m.abs()))
        }
        Branch::Upper => {
            let m = a_mat.max_eigenvalue()?;
            (m, a_mat.scale(-1.0).shift(-(m + m.abs())))
        }
    };
    let bt = tilde.scale(b);
    let upper = v.sub(&bt)?.max_eigenvalue()?;
    let lower = v.scale(-1.0).sub(&bt)?.max_eigenvalue()?;
    Ok(RelBound {
        a: upper.max(lower).max(0.0),
        b,
        kind: BoundKind::FormBound,
        certified: true,
        m: Some(m),
        branch: Some(branch),
    })
}

/// Interval `(a' + (1+b)c, (1−b)d − a')` (lower branch) or
/// `((1−b)c + a', (1+b)d − a')` (upper branch) that a certified form bound
/// keeps free of spectrum, given the gap `(c, d)` of `A`.
pub fn form_bound_interval(bound: &RelBound, c: f64, d: f64) -> (f64, f64) {
    let (a, b) = (bound.a_signed(), bound.b);
    match bound.branch {
        Some(Branch::Upper) => ((1.0 - b) * c + a, (1.0 + b) * d - a),
        _ => (a + (1.0 + b) * c, (1.0 - b) * d - a),
    }
}

/// Form bound on the grid `b = 0, 0.05, …, 0.95` maximizing the width of
/// [`form_bound_interval`]; returns the bound and that width.
pub fn best_form_bound(v: &SymMatrix, a_mat: &SymMatrix, branch: Branch, c: f64, d: f64) -> Result<(RelBound, f64)> {
    let mut best: Option<(RelBound, f64)> = None;
    for i in 0..20 {
        let bound = min_form_bound_a(v, a_mat, 0.05 * i as f64, branch)?;
        let (lo, hi) = form_bound_interval(&bound, c, d);
        if best.as_ref().is_none_or(|(_, w)| hi - lo > *w) {
            best = Some((bound, hi - lo));
        }
    }
    Ok(best.expect("grid is nonempty"))
}
