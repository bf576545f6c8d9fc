//! Spectral projectors, gaps, compressions and the graph-operator geometry
//! of a pair of spectral subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::{check_dim, orthonormality_defect, spectral_norm, EigenDecomposition, Mat, SymMatrix};
use crate::tolerance::Tolerances;

/// An eigenvalue-free window `(c, d)` of a reference matrix and the split
/// point used inside it. Missing eigenvalues on one side are encoded as
/// `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapWindow {
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
}

impl GapWindow {
    pub fn width(&self) -> f64 {
        self.d - self.c
    }
}

/// Spectral projectors `P₊ = E((γ,∞))`, `P₋ = E((−∞,γ])` of a symmetric
/// matrix together with orthonormal bases of their ranges.
///
/// In finite dimension the operator and form domains restricted to
/// `Ran P±` are both all of `Ran P±`, so the bases double as those.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub gamma: f64,
    pub pp: Mat,
    pub pm: Mat,
    /// `n × k₊`, eigenvectors for eigenvalues above `gamma`, ascending.
    pub basis_p: Mat,
    /// `n × k₋`, eigenvectors for eigenvalues at or below `gamma`, ascending.
    pub basis_m: Mat,
    /// Eigenvalues of the source matrix, nondecreasing.
    pub eigenvalues: Vec<f64>,
}

impl SpectralSplit {
    pub fn n(&self) -> usize {
        self.pp.nrows()
    }

    pub fn dim_plus(&self) -> usize {
        self.basis_p.ncols()
    }

    pub fn dim_minus(&self) -> usize {
        self.basis_m.ncols()
    }

    /// Eigenvalues above the split point, ascending.
    pub fn upper_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[self.dim_minus()..]
    }

    /// The eigendecomposition the split was built from, with the columns of
    /// `basis_m` followed by those of `basis_p`.
    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition {
            values: self.eigenvalues.clone(),
            vectors: self.adapted_basis_minus_first(),
        }
    }

    fn adapted_basis_minus_first(&self) -> Mat {
        let n = self.n();
        let km = self.basis_m.ncols();
        let mut u = Mat::zeros(n, n);
        u.columns_mut(0, km).copy_from(&self.basis_m);
        u.columns_mut(km, n - km).copy_from(&self.basis_p);
        u
    }

    /// `[basis_p | basis_m]`, an orthogonal matrix adapted to `Ran P₊ ⊕ Ran P₋`.
    pub fn adapted_basis(&self) -> Mat {
        let n = self.n();
        let mut u = Mat::zeros(n, n);
        u.columns_mut(0, self.dim_plus()).copy_from(&self.basis_p);
        u.columns_mut(self.dim_plus(), self.dim_minus())
            .copy_from(&self.basis_m);
        u
    }
}

fn gap_tolerance(a: &SymMatrix, eigenvalues: &[f64], tol: &Tolerances) -> f64 {
    let norm = eigenvalues
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(a.norm().min(f64::MAX));
    tol.gap * (1.0 + norm)
}

/// Splits `A` at `gamma`.
pub fn split(a: &SymMatrix, gamma: f64, tol: &Tolerances) -> Result<SpectralSplit> {
    let eig = a.eig()?;
    split_from_eig(&eig, gamma, tol)
}

pub fn split_from_eig(eig: &EigenDecomposition, gamma: f64, tol: &Tolerances) -> Result<SpectralSplit> {
    let norm = eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let gap_tol = tol.gap * (1.0 + norm);
    if let Some(&lam) = eig
        .values
        .iter()
        .find(|&&lam| (lam - gamma).abs() <= gap_tol)
    {
        return Err(Error::GapTooClose {
            gamma,
            eigenvalue: lam,
            tol: gap_tol,
        });
    }
    let basis_p = eig.columns_where(|lam| lam > gamma);
    let basis_m = eig.columns_where(|lam| lam <= gamma);
    let pp = &basis_p * basis_p.transpose();
    let pm = &basis_m * basis_m.transpose();
    Ok(SpectralSplit {
        gamma,
        pp,
        pm,
        basis_p,
        basis_m,
        eigenvalues: eig.values.clone(),
    })
}

/// The eigenvalue-free window around `around`.
pub fn find_gap(a: &SymMatrix, around: f64, tol: &Tolerances) -> Result<GapWindow> {
    let values = a.eigenvalues()?;
    let gap_tol = gap_tolerance(a, &values, tol);
    if let Some(&lam) = values.iter().find(|&&lam| (lam - around).abs() <= gap_tol) {
        return Err(Error::InsideSpectrum {
            point: around,
            eigenvalue: lam,
        });
    }
    let c = values
        .iter()
        .copied()
        .filter(|&l| l <= around)
        .last()
        .unwrap_or(f64::NEG_INFINITY);
    let d = values
        .iter()
        .copied()
        .find(|&l| l > around)
        .unwrap_or(f64::INFINITY);
    Ok(GapWindow { c, d, gamma: around })
}

/// Returns the eigenvalue of `A` closest to the interior of `(c, d)` if one
/// lies inside the open interval shrunk by `tol`.
pub fn eigenvalue_in(values: &[f64], c: f64, d: f64, tol: f64) -> Option<f64> {
    values.iter().copied().find(|&l| l > c + tol && l < d - tol)
}

/// `Wᵀ·B·W` for orthonormal columns `W`.
pub fn compress(b: &SymMatrix, w: &Mat, tol: &Tolerances) -> Result<SymMatrix> {
    check_dim(b.n(), w.nrows())?;
    let deviation = orthonormality_defect(w);
    if deviation > tol.ortho {
        return Err(Error::NotOrthonormal { deviation });
    }
    b.congruence(w)
}

/// `λ_k(B|Ran Q₊)` (1-based `k`), computed from the compression of `B` onto `Ran Q₊`.
pub fn part_eigenvalues(b: &SymMatrix, split_b: &SpectralSplit, k: usize, tol: &Tolerances) -> Result<f64> {
    let dim = split_b.dim_plus();
    if k == 0 || k > dim {
        return Err(Error::IndexOutOfRange { index: k, max: dim });
    }
    let part = compress(b, &split_b.basis_p, tol)?;
    Ok(part.eigenvalues()?[k - 1])
}

/// All eigenvalues of `B|Ran Q₊`, ascending.
pub fn part_spectrum(b: &SymMatrix, split_b: &SpectralSplit, tol: &Tolerances) -> Result<Vec<f64>> {
    if split_b.dim_plus() == 0 {
        return Ok(Vec::new());
    }
    compress(b, &split_b.basis_p, tol)?.eigenvalues()
}

/// `‖P₊ − Q₊‖`.
pub fn projector_distance(split_a: &SpectralSplit, split_b: &SpectralSplit) -> f64 {
    spectral_norm(&(&split_a.pp - &split_b.pp))
}

/// Graph representation `Ran Q₊ = {f ⊕ Xf | f ∈ Ran P₊}`.
#[derive(Debug, Clone)]
pub struct GraphData {
    /// `k₋ × k₊`, in the coordinates of `basis_p` and `basis_m`.
    pub x: Mat,
    /// `n × n` skew matrix `[[0, −X*], [X, 0]]` in the original coordinates.
    pub y: Mat,
    pub norm_x: f64,
    /// `‖P₊ − Q₊‖`.
    pub dist: f64,
}

/// Builds the graph operator from `P₊Q₊|Ran P₊ = (I + X*X)⁻¹` and
/// `P₋Q₊|Ran P₊ = X(I + X*X)⁻¹`.
pub fn graph_operator(split_a: &SpectralSplit, split_b: &SpectralSplit, tol: &Tolerances) -> Result<GraphData> {
    check_dim(split_a.n(), split_b.n())?;
    let dist = projector_distance(split_a, split_b);
    if dist >= 1.0 - tol.graph {
        return Err(Error::GraphUndefined { dist, tol: tol.graph });
    }
    let wp = &split_a.basis_p;
    let wm = &split_a.basis_m;
    let kp = wp.ncols();
    // P₊Q₊ = P₊ − P₊Q₋
    let s = wp.transpose() * (&split_b.pm * wp);
    let t = SymMatrix::symmetrized(Mat::identity(kp, kp) - s);
    let t_eig = if kp > 0 { Some(t.eig()?) } else { None };
    let sigma_min = t_eig
        .as_ref()
        .map(|e| e.values.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())))
        .unwrap_or(1.0);
    if sigma_min < tol.sv {
        return Err(Error::NotBijective { sigma_min });
    }
    let x = match t_eig {
        Some(e) => {
            let t_inv = e.apply(|v| 1.0 / v)?;
            (wm.transpose() * (&split_b.pp * wp)) * t_inv.as_mat()
        }
        None => Mat::zeros(wm.ncols(), 0),
    };
    let y = wm * &x * wp.transpose() - wp * x.transpose() * wm.transpose();
    let norm_x = spectral_norm(&x);
    Ok(GraphData { x, y, norm_x, dist })
}

/// Residuals of the identities satisfied by a graph representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphResiduals {
    /// Columns `f ⊕ Xf` lie in `Ran Q₊`: `‖Q₋(W₊ + W₋X)‖`.
    pub graph_span: f64,
    /// First block representation of `Q₊`.
    pub repr_q_first: f64,
    /// Second block representation of `Q₊`.
    pub repr_q_second: f64,
    /// `(I−Y)(I+Y) = diag(I+X*X, I+XX*)`.
    pub ypm: f64,
    /// `P₊Q₊|Ran P₊ = (I+X*X)⁻¹`.
    pub pqy: f64,
    /// `|‖P₊−Q₊‖ − ‖X‖/√(1+‖X‖²)|`.
    pub norm_pqx: f64,
    /// `‖Y + Yᵀ‖`.
    pub skew: f64,
    /// Acceptance scale `1 + ‖X‖²`.
    pub scale: f64,
}

impl GraphResiduals {
    pub fn max(&self) -> f64 {
        [
            self.graph_span,
            self.repr_q_first,
            self.repr_q_second,
            self.ypm,
            self.pqy,
            self.norm_pqx,
            self.skew,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn inverse_spd(m: &Mat) -> Result<Mat> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(SymMatrix::symmetrized(m.clone())
        .eig()?
        .apply(|v| 1.0 / v)?
        .into_mat())
}

fn block(tl: &Mat, tr: &Mat, bl: &Mat, br: &Mat) -> Mat {
    let (p, m) = (tl.nrows(), br.nrows());
    let mut out = Mat::zeros(p + m, p + m);
    out.view_mut((0, 0), (p, p)).copy_from(tl);
    out.view_mut((0, p), (p, m)).copy_from(tr);
    out.view_mut((p, 0), (m, p)).copy_from(bl);
    out.view_mut((p, p), (m, m)).copy_from(br);
    out
}

pub fn verify_graph_identities(
    g: &GraphData,
    split_a: &SpectralSplit,
    split_b: &SpectralSplit,
) -> Result<GraphResiduals> {
    let wp = &split_a.basis_p;
    let wm = &split_a.basis_m;
    let (kp, km) = (wp.ncols(), wm.ncols());
    let x = &g.x;
    let xt = x.transpose();
    let ip = Mat::identity(kp, kp);
    let im = Mat::identity(km, km);
    let xsx = &ip + &xt * x;
    let xxs = &im + x * &xt;
    let inv_p = inverse_spd(&xsx)?;
    let inv_m = inverse_spd(&xxs)?;

    let graph_cols = wp + wm * x;
    let graph_span = spectral_norm(&(&split_b.pm * graph_cols));

    let u = split_a.adapted_basis();
    let q_blocks = u.transpose() * (&split_b.pp * &u);
    let first = block(&inv_p, &(&inv_p * &xt), &(x * &inv_p), &(x * &inv_p * &xt));
    let second = block(&inv_p, &(&xt * &inv_m), &(&inv_m * x), &(x * &xt * &inv_m));
    let repr_q_first = spectral_norm(&(&q_blocks - first));
    let repr_q_second = spectral_norm(&(&q_blocks - second));

    let n = split_a.n();
    let id = Mat::identity(n, n);
    let lhs = (&id - &g.y) * (&id + &g.y);
    let rhs = wp * &xsx * wp.transpose() + wm * &xxs * wm.transpose();
    let ypm = spectral_norm(&(lhs - rhs));

    let pq = wp.transpose() * (&split_b.pp * wp);
    let pqy = spectral_norm(&(pq - &inv_p));

    let norm_pqx = (g.dist - g.norm_x / (1.0 + g.norm_x * g.norm_x).sqrt()).abs();
    let skew = spectral_norm(&(&g.y + g.y.transpose()));

    Ok(GraphResiduals {
        graph_span,
        repr_q_first,
        repr_q_second,
        ypm,
        pqy,
        norm_pqx,
        skew,
        scale: 1.0 + g.norm_x * g.norm_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn split_of_two_by_two_diagonal() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let s = split(&a, 0.0, &tol()).unwrap();
        assert_eq!(s.pp, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(s.pm, Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn split_rank() {
        let a = SymMatrix::from_diagonal(&[5.0, 3.0, -2.0]).unwrap();
        let s = split(&a, 0.0, &tol()).unwrap();
        assert_eq!(s.dim_plus(), 2);
        assert!((s.pp.trace() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn split_refuses_eigenvalue_at_gamma() {
        let a = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(split(&a, 0.0, &tol()), Err(Error::GapTooClose { .. })));
    }

    #[test]
    fn gap_windows() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let g = find_gap(&a, 0.0, &tol()).unwrap();
        assert_eq!((g.c, g.d), (-1.0, 1.0));
        let a = SymMatrix::from_diagonal(&[2.0, 3.0]).unwrap();
        let g = find_gap(&a, 0.0, &tol()).unwrap();
        assert_eq!(g.c, f64::NEG_INFINITY);
        assert_eq!(g.d, 2.0);
        assert!(matches!(find_gap(&a, 2.0, &tol()), Err(Error::InsideSpectrum { .. })));
    }

    #[test]
    fn compress_examples() {
        let b = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(compress(&b, &Mat::identity(3, 3), &tol()).unwrap(), b);
        let w = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            compress(&b, &w, &tol()).unwrap(),
            SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap()
        );
        let bad = Mat::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!(matches!(compress(&b, &bad, &tol()), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn part_eigenvalue_examples() {
        let b = SymMatrix::from_diagonal(&[5.0, 2.0, -1.0]).unwrap();
        let s = split(&b, 0.0, &tol()).unwrap();
        assert_eq!(part_eigenvalues(&b, &s, 1, &tol()).unwrap(), 2.0);
        assert_eq!(part_eigenvalues(&b, &s, 2, &tol()).unwrap(), 5.0);
        assert!(matches!(
            part_eigenvalues(&b, &s, 3, &tol()),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
    }

    fn rotation_pair(theta: f64) -> (SpectralSplit, SpectralSplit) {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        // B = R diag(1,-1) Rᵀ, R rotation by θ
        let b = SymMatrix::from_row_slice(2, &[c * c - s * s, 2.0 * c * s, 2.0 * c * s, s * s - c * c]).unwrap();
        (split(&a, 0.0, &tol()).unwrap(), split(&b, 0.0, &tol()).unwrap())
    }

    #[test]
    fn graph_of_identical_projectors() {
        let (sa, _) = rotation_pair(0.0);
        let g = graph_operator(&sa, &sa, &tol()).unwrap();
        assert_eq!(g.norm_x, 0.0);
        assert_eq!(g.dist, 0.0);
        let r = verify_graph_identities(&g, &sa, &sa).unwrap();
        assert!(r.max() < 1e-15);
    }

    #[test]
    fn graph_of_rotated_line() {
        let theta: f64 = 0.3;
        let (sa, sb) = rotation_pair(theta);
        let g = graph_operator(&sa, &sb, &tol()).unwrap();
        // eigenvectors carry arbitrary signs; |X| = tan θ
        assert!((g.x[(0, 0)].abs() - theta.tan()).abs() < 1e-14);
        assert!((g.dist - theta.sin()).abs() < 1e-14);
        let r = verify_graph_identities(&g, &sa, &sb).unwrap();
        assert!(r.max() <= 1e-12, "{r:?}");
    }

    #[test]
    fn orthogonal_lines_have_no_graph() {
        let (sa, sb) = rotation_pair(std::f64::consts::FRAC_PI_2);
        assert!(matches!(
            graph_operator(&sa, &sb, &tol()),
            Err(Error::GraphUndefined { .. })
        ));
    }
}
