//! Inf–sup evaluation over subspaces `M₊ ⊕ Ran P₋` with `M₊ ⊂ Ran P₊`.
//!
//! The infimum is approached from three directions: the candidate obtained by
//! projecting the lowest eigenvectors of `B|Ran Q₊` onto `Ran P₊`, random
//! Haar subspaces (which can only over-estimate it), and a rotation descent
//! used as a fallback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{haar_frame, orthonormalize};
use crate::rng::{from_seed, trial_seed};
use crate::spectral::{compress, SpectralSplit};
use crate::symmat::{check_dim, eigvals_sym, orthonormality_defect, Mat, QuadraticForm, SymMatrix};
use crate::tolerance::Tolerances;

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_REFINE_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimaxConfig {
    pub trials: usize,
    pub seed: u64,
    pub refine_iters: usize,
    /// Also evaluate the sup through the form `⟨|B|^{1/2}x, sign(B)|B|^{1/2}x⟩`.
    pub form_path: bool,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            refine_iters: DEFAULT_REFINE_ITERS,
            form_path: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimaxStatus {
    Pass,
    RefinedPass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxReport {
    pub k: usize,
    pub direct: f64,
    pub candidate_value: f64,
    pub probe_min: f64,
    pub probe_count: usize,
    pub refined_value: Option<f64>,
    pub status: MinimaxStatus,
    /// Sup over the candidate subspace evaluated through the form.
    pub form_value: Option<f64>,
    pub mm_tol: f64,
    pub form_tol: f64,
}

impl MinimaxReport {
    pub fn attained(&self) -> f64 {
        self.refined_value
            .map_or(self.candidate_value, |r| r.min(self.candidate_value))
    }

    /// `|form path − operator path|` on the candidate subspace.
    pub fn form_residual(&self) -> Option<f64> {
        self.form_value.map(|f| (f - self.candidate_value).abs())
    }

    pub fn form_agrees(&self) -> bool {
        self.form_residual().is_none_or(|r| r <= self.form_tol)
    }

    pub fn passed(&self) -> bool {
        self.status != MinimaxStatus::Fail && self.form_agrees()
    }
}

/// `λ_max` of `B` compressed to `[Mp | basis_m]`.
pub fn inner_sup(b: &SymMatrix, mp: &Mat, basis_m: &Mat, tol: &Tolerances) -> Result<f64> {
    check_dim(b.n(), mp.nrows())?;
    check_dim(b.n(), basis_m.nrows())?;
    let mut w = Mat::zeros(b.n(), mp.ncols() + basis_m.ncols());
    w.columns_mut(0, mp.ncols()).copy_from(mp);
    w.columns_mut(mp.ncols(), basis_m.ncols()).copy_from(basis_m);
    if w.ncols() == 0 {
        return Err(Error::InvalidArgument("empty subspace".into()));
    }
    let c = compress(b, &w, tol)?;
    Ok(*eigvals_sym(&c)?.last().expect("nonempty"))
}

/// `B` in the coordinates of `[basis_p | basis_m]` of the reference split.
/// Frames inside `Ran P₊` are then `k₊ × k` coordinate matrices.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    bpp: Mat,
    bpm: Mat,
    bmm: Mat,
    basis_p: Mat,
}

impl ReducedProblem {
    pub fn new(b: &SymMatrix, split_a: &SpectralSplit) -> Result<Self> {
        check_dim(split_a.n(), b.n())?;
        let bm = b.as_mat();
        let wp = &split_a.basis_p;
        let wm = &split_a.basis_m;
        let bwp = bm * wp;
        Ok(Self {
            bpp: wp.transpose() * &bwp,
            bpm: bwp.transpose() * wm,
            bmm: wm.transpose() * (bm * wm),
            basis_p: wp.clone(),
        })
    }

    pub fn dim_plus(&self) -> usize {
        self.bpp.nrows()
    }

    /// Inner sup for the subspace spanned by `basis_p · f` plus `Ran P₋`.
    pub fn sup(&self, f: &Mat) -> Result<f64> {
        let k = f.ncols();
        let km = self.bmm.nrows();
        let mut m = Mat::zeros(k + km, k + km);
        let top = f.transpose() * (&self.bpp * f);
        let cross = f.transpose() * &self.bpm;
        m.view_mut((0, 0), (k, k)).copy_from(&top);
        m.view_mut((0, k), (k, km)).copy_from(&cross);
        m.view_mut((k, 0), (km, k)).copy_from(&cross.transpose());
        m.view_mut((k, k), (km, km)).copy_from(&self.bmm);
        let values = eigvals_sym(&SymMatrix::symmetrized(m))?;
        Ok(*values.last().expect("nonempty"))
    }

    pub fn to_frame(&self, f: &Mat) -> Mat {
        &self.basis_p * f
    }
}

/// Orthonormal coordinates (in `basis_p`) of `P₊·span{ψ₁,…,ψ_k}`, the `ψᵢ`
/// being eigenvectors of `B|Ran Q₊` for its `k` smallest eigenvalues.
pub fn candidate_coordinates(split_a: &SpectralSplit, split_b: &SpectralSplit, k: usize) -> Result<Mat> {
    check_dim(split_a.n(), split_b.n())?;
    let max = split_b.dim_plus().min(split_a.dim_plus());
    if k == 0 || k > max {
        return Err(Error::IndexOutOfRange { index: k, max });
    }
    let psi = split_b.basis_p.columns(0, k);
    let coords = split_a.basis_p.transpose() * psi;
    let f = orthonormalize(&coords, 1e-8);
    if f.ncols() < k {
        return Err(Error::RankDeficient {
            rank: f.ncols(),
            expected: k,
        });
    }
    Ok(f)
}

/// The candidate subspace as an `n × k` frame.
pub fn candidate_subspace(split_a: &SpectralSplit, split_b: &SpectralSplit, k: usize) -> Result<Mat> {
    Ok(&split_a.basis_p * candidate_coordinates(split_a, split_b, k)?)
}

/// Minimum of the inner sup over `trials` Haar-random `k`-dimensional
/// subspaces of `Ran P₊`; trial `i` draws from seed `seed XOR i`.
/// Returns the minimum and its coordinate frame.
pub fn probe(problem: &ReducedProblem, k: usize, trials: usize, seed: u64) -> Result<(f64, Mat)> {
    let dim = problem.dim_plus();
    if k == 0 || k > dim {
        return Err(Error::IndexOutOfRange { index: k, max: dim });
    }
    let mut best = (f64::INFINITY, Mat::zeros(dim, k));
    for i in 0..trials {
        let mut rng = from_seed(trial_seed(seed, i as u64));
        let f = haar_frame(&mut rng, dim, k);
        let value = problem.sup(&f)?;
        if value < best.0 {
            best = (value, f);
        }
    }
    Ok(best)
}

const REFINE_START_ANGLE: f64 = 0.5;
const REFINE_MIN_ANGLE: f64 = 1e-12;

/// Rotation descent: each round tries plane rotations between every frame
/// column and every direction of its orthocomplement in `Ran P₊`, keeping
/// strict decreases. The step angle halves after a round without progress.
pub fn refine(problem: &ReducedProblem, start: &Mat, iters: usize) -> Result<(f64, Mat)> {
    let dim = problem.dim_plus();
    let k = start.ncols();
    let mut frame = start.clone();
    let mut value = problem.sup(&frame)?;
    let mut angle = REFINE_START_ANGLE;
    for _ in 0..iters {
        if angle < REFINE_MIN_ANGLE || k == dim {
            break;
        }
        let complement = complement_of(&frame, dim);
        let mut improved = false;
        for i in 0..k {
            for j in 0..complement.ncols() {
                for sign in [1.0, -1.0] {
                    let (c, s) = ((sign * angle).cos(), (sign * angle).sin());
                    let mut trial = frame.clone();
                    let col = frame.column(i) * c + complement.column(j) * s;
                    trial.set_column(i, &col);
                    let v = problem.sup(&trial)?;
                    if v < value {
                        value = v;
                        frame = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            angle *= 0.5;
        } else {
            frame = orthonormalize(&frame, 1e-8);
        }
    }
    Ok((value, frame))
}

fn complement_of(frame: &Mat, dim: usize) -> Mat {
    let k = frame.ncols();
    let mut all = Mat::zeros(dim, k + dim);
    all.columns_mut(0, k).copy_from(frame);
    all.columns_mut(k, dim).copy_from(&Mat::identity(dim, dim));
    let q = orthonormalize(&all, 1e-8);
    q.columns(k, q.ncols() - k).into_owned()
}

/// Sup of the form of `B` over the span of the orthonormal columns `w`.
pub fn form_sup(form: &QuadraticForm, w: &Mat) -> Result<f64> {
    check_dim(form.n(), w.nrows())?;
    let h = &form.half * w;
    let g = h.transpose() * (&form.signop * &h);
    Ok(*eigvals_sym(&SymMatrix::symmetrized(g))?.last().expect("nonempty"))
}

/// Both sides of the minimax identity for a fixed pair of splits, reusable
/// across `k`.
pub struct MinimaxEngine<'a> {
    split_a: &'a SpectralSplit,
    split_b: &'a SpectralSplit,
    problem: ReducedProblem,
    part_spectrum: Vec<f64>,
    form: Option<QuadraticForm>,
    b_norm: f64,
    tol: Tolerances,
}

impl<'a> MinimaxEngine<'a> {
    pub fn new(
        b: &SymMatrix,
        split_a: &'a SpectralSplit,
        split_b: &'a SpectralSplit,
        config: &MinimaxConfig,
        tol: &Tolerances,
    ) -> Result<Self> {
        let problem = ReducedProblem::new(b, split_a)?;
        let part_spectrum = split_b.upper_eigenvalues().to_vec();
        let form = if config.form_path {
            Some(QuadraticForm::from_eig(b.clone(), &split_b.eigen())?)
        } else {
            None
        };
        let b_norm = split_b
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(Self {
            split_a,
            split_b,
            problem,
            part_spectrum,
            form,
            b_norm,
            tol: *tol,
        })
    }

    pub fn max_k(&self) -> usize {
        self.split_a.dim_plus().min(self.split_b.dim_plus())
    }

    pub fn direct(&self, k: usize) -> Result<f64> {
        self.part_spectrum
            .get(k.wrapping_sub(1))
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: k,
                max: self.part_spectrum.len(),
            })
    }

    pub fn problem(&self) -> &ReducedProblem {
        &self.problem
    }

    pub fn verify(&self, k: usize, config: &MinimaxConfig) -> Result<MinimaxReport> {
        let max = self.max_k();
        if k == 0 || k > max {
            return Err(Error::IndexOutOfRange { index: k, max });
        }
        let direct = self.direct(k)?;
        let mm_tol = self.tol.minimax * (1.0 + direct.abs());
        let form_tol = self.tol.form * (1.0 + self.b_norm);

        let cand = candidate_coordinates(self.split_a, self.split_b, k)?;
        let candidate_value = self.problem.sup(&cand)?;
        let (probe_min, probe_arg) = probe(&self.problem, k, config.trials, config.seed)?;

        let form_value = match &self.form {
            Some(form) => {
                let mut w = Mat::zeros(self.split_a.n(), k + self.split_a.dim_minus());
                w.columns_mut(0, k).copy_from(&self.problem.to_frame(&cand));
                w.columns_mut(k, self.split_a.dim_minus())
                    .copy_from(&self.split_a.basis_m);
                Some(form_sup(form, &w)?)
            }
            None => None,
        };

        let lower_ok = probe_min >= direct - mm_tol;
        let mut refined_value = None;
        let status = if (candidate_value - direct).abs() <= mm_tol {
            if lower_ok {
                MinimaxStatus::Pass
            } else {
                MinimaxStatus::Fail
            }
        } else {
            let start = if probe_min < candidate_value { &probe_arg } else { &cand };
            let (value, _) = refine(&self.problem, start, config.refine_iters)?;
            refined_value = Some(value);
            if lower_ok && (value - direct).abs() <= mm_tol {
                MinimaxStatus::RefinedPass
            } else {
                MinimaxStatus::Fail
            }
        };

        Ok(MinimaxReport {
            k,
            direct,
            candidate_value,
            probe_min,
            probe_count: config.trials,
            refined_value,
            status,
            form_value,
            mm_tol,
            form_tol,
        })
    }
}

/// Splits `A` and `B` at `gamma` and verifies the minimax identity for index `k`.
pub fn verify_minimax(
    a: &SymMatrix,
    b: &SymMatrix,
    gamma: f64,
    k: usize,
    config: &MinimaxConfig,
    tol: &Tolerances,
) -> Result<MinimaxReport> {
    let split_a = crate::spectral::split(a, gamma, tol)?;
    let split_b = crate::spectral::split(b, gamma, tol)?;
    MinimaxEngine::new(b, &split_a, &split_b, config, tol)?.verify(k, config)
}

/// Orthonormality check shared by callers passing explicit frames.
pub fn check_frame(w: &Mat, tol: &Tolerances) -> Result<()> {
    let deviation = orthonormality_defect(w);
    if deviation > tol.ortho {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::split;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, i: usize) -> Mat {
        let mut m = Mat::zeros(n, 1);
        m[(i, 0)] = 1.0;
        m
    }

    #[test]
    fn inner_sup_of_diagonal() {
        let b = SymMatrix::from_diagonal(&[2.0, -1.0]).unwrap();
        assert_eq!(inner_sup(&b, &e(2, 0), &e(2, 1), &tol()).unwrap(), 2.0);
    }

    #[test]
    fn off_diagonal_two_by_two() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let b = SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.5, -1.0]).unwrap();
        let sa = split(&a, 0.0, &tol()).unwrap();
        let sb = split(&b, 0.0, &tol()).unwrap();
        let cand = candidate_subspace(&sa, &sb, 1).unwrap();
        assert!((cand[(0, 0)].abs() - 1.0).abs() < 1e-15);
        let v = inner_sup(&b, &cand, &sa.basis_m, &tol()).unwrap();
        assert!((v - 1.25_f64.sqrt()).abs() < 1e-14);
        let r = verify_minimax(&a, &b, 0.0, 1, &MinimaxConfig::default(), &tol()).unwrap();
        assert_eq!(r.status, MinimaxStatus::Pass);
        assert!(r.form_agrees());
    }

    #[test]
    fn unperturbed_is_exact() {
        let a = SymMatrix::from_diagonal(&[3.0, 1.0, -1.0, 2.0, -4.0]).unwrap();
        let cfg = MinimaxConfig::default();
        for k in 1..=3 {
            let r = verify_minimax(&a, &a, 0.0, k, &cfg, &tol()).unwrap();
            assert_eq!(r.candidate_value, r.direct);
            assert_eq!(r.status, MinimaxStatus::Pass);
            assert!(r.probe_min >= r.direct - 1e-9);
        }
    }

    #[test]
    fn bounded_diagonal_perturbation() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let b = SymMatrix::from_diagonal(&[1.5, -1.0]).unwrap();
        let r = verify_minimax(&a, &b, 0.0, 1, &MinimaxConfig::default(), &tol()).unwrap();
        assert_eq!(r.direct, 1.5);
        assert_eq!(r.status, MinimaxStatus::Pass);
    }

    #[test]
    fn probe_is_deterministic_and_full_rank_trivial() {
        let a = SymMatrix::from_diagonal(&[3.0, 1.0, -1.0]).unwrap();
        let sa = split(&a, 0.0, &tol()).unwrap();
        let p = ReducedProblem::new(&a, &sa).unwrap();
        let (v1, _) = probe(&p, 1, 20, 42).unwrap();
        let (v2, _) = probe(&p, 1, 20, 42).unwrap();
        assert_eq!(v1, v2);
        let (full, _) = probe(&p, 2, 5, 1).unwrap();
        assert!((full - 3.0).abs() < 1e-12);
    }

    #[test]
    fn refine_with_zero_iterations_returns_start() {
        let a = SymMatrix::from_diagonal(&[3.0, 1.0, -1.0]).unwrap();
        let sa = split(&a, 0.0, &tol()).unwrap();
        let p = ReducedProblem::new(&a, &sa).unwrap();
        let start = Mat::from_row_slice(2, 1, &[0.6, 0.8]);
        let (v, _) = refine(&p, &start, 0).unwrap();
        assert_eq!(v, p.sup(&start).unwrap());
        let (v, _) = refine(&p, &start, 200).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }
}
