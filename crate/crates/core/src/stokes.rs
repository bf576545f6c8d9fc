//! Finite-difference Stokes block operator on the unit box.
//!
//! Velocities live at the interior nodes of a uniform grid with Dirichlet
//! padding; the pressure shares the nodes. The velocity Laplacian is
//! `GᵀG` for the forward-difference gradient `G`, so `uᵀLu = ‖Gu‖²`
//! exactly. The divergence `D` keeps the interior rows of the forward
//! difference in each direction and the pressure gradient is `−Dᵀ`, which
//! makes the block matrix exactly symmetric.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::gaussian;
use crate::minimax::MinimaxConfig;
use crate::perturb::{diagonal_block_norms, Branch, BoundKind, RelBound};
use crate::rng::from_seed;
use crate::spectral::{split, split_from_eig};
use crate::symmat::{eigvals_sym, EigenDecomposition, Mat, SymMatrix};
use crate::theorems::{lipschitz_violation, minimax_suite, CheckConfig, TheoremReport};

/// Largest assembled matrix size handled by default.
pub const DEFAULT_BUDGET: usize = 2000;
/// `ε` values for the discrete relative form bound.
pub const FORM_EPS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    /// Interior points per axis.
    pub points: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension {dim} not in {{1, 2}}")));
        }
        if points < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 points per axis, got {points}")));
        }
        Ok(Self {
            dim,
            points,
            h: 1.0 / (points + 1) as f64,
        })
    }

    /// Number of interior nodes `N`.
    pub fn nodes(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    /// Size `n·N + N` of the block matrix.
    pub fn system_size(&self) -> usize {
        (self.dim + 1) * self.nodes()
    }

    pub fn check_budget(&self, cap: usize) -> Result<()> {
        let size = self.system_size();
        if size > cap {
            return Err(Error::BudgetExceeded { size, cap });
        }
        Ok(())
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i + self.points * j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesInstance {
    pub grid: Grid,
    pub nu: f64,
    pub vstar: f64,
    /// Vector Laplacian, `n·N × n·N`.
    pub lap: SymMatrix,
    /// Pressure gradient `−Dᵀ`, `n·N × N`.
    pub grad: Mat,
    /// Divergence, `N × n·N`.
    pub div: Mat,
    pub bs: SymMatrix,
    pub c_h: f64,
}

impl StokesInstance {
    pub fn velocity_size(&self) -> usize {
        self.grid.dim * self.grid.nodes()
    }

    /// `diag(νL, 0)`.
    pub fn reference(&self) -> SymMatrix {
        let n = self.bs.n();
        let nv = self.velocity_size();
        let lap = self.lap.as_mat();
        SymMatrix::symmetrized(Mat::from_fn(n, n, |r, c| {
            if r < nv && c < nv {
                self.nu * lap[(r, c)]
            } else {
                0.0
            }
        }))
    }

    /// The off-diagonal coupling `B_S − diag(νL, 0)`.
    pub fn coupling(&self) -> SymMatrix {
        self.bs.sub(&self.reference()).expect("same size")
    }

    /// `νλ₁(L)/2`: separates the velocity spectrum from the zero block.
    pub fn split_point(&self) -> Result<f64> {
        Ok(0.5 * self.nu * self.lap.min_eigenvalue()?)
    }

    /// Eigenvalues of `νL`, ascending.
    pub fn reference_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigvals_sym(&self.lap)?.into_iter().map(|l| self.nu * l).collect())
    }
}

/// Forward differences `(u_i − u_{i−1})/h` along one axis, rows for
/// `i = 0..=points` (full, with padding on both ends) or `i = 0..points`
/// (interior only).
fn difference(grid: &Grid, axis: usize, full: bool) -> Mat {
    let p = grid.points;
    let n = grid.nodes();
    let rows_axis = if full { p + 1 } else { p };
    let other = if grid.dim == 1 { 1 } else { p };
    let mut m = Mat::zeros(rows_axis * other, n);
    let inv_h = 1.0 / grid.h;
    for o in 0..other {
        for r in 0..rows_axis {
            let row = r + rows_axis * o;
            let node = |i: usize| {
                if axis == 0 {
                    grid.index(i, o)
                } else {
                    grid.index(o, i)
                }
            };
            if r < p {
                m[(row, node(r))] += inv_h;
            }
            if r >= 1 {
                m[(row, node(r - 1))] -= inv_h;
            }
        }
    }
    m
}

/// Vector Laplacian `L` (block-diagonal, one copy of `GᵀG` per component) and
/// the scalar forward-difference gradient `G`.
pub fn build_laplacian(grid: &Grid) -> (SymMatrix, Mat) {
    let n = grid.nodes();
    let parts: Vec<Mat> = (0..grid.dim).map(|ax| difference(grid, ax, true)).collect();
    let rows: usize = parts.iter().map(Mat::nrows).sum();
    let mut g = Mat::zeros(rows, n);
    let mut offset = 0;
    for part in &parts {
        g.view_mut((offset, 0), (part.nrows(), n)).copy_from(part);
        offset += part.nrows();
    }
    let scalar = g.transpose() * &g;
    let nv = grid.dim * n;
    let mut lap = Mat::zeros(nv, nv);
    for c in 0..grid.dim {
        lap.view_mut((c * n, c * n), (n, n)).copy_from(&scalar);
    }
    (SymMatrix::symmetrized(lap), g)
}

fn divergence(grid: &Grid) -> Mat {
    let n = grid.nodes();
    let mut d = Mat::zeros(n, grid.dim * n);
    for ax in 0..grid.dim {
        d.view_mut((0, ax * n), (n, n)).copy_from(&difference(grid, ax, false));
    }
    d
}

pub fn assemble_stokes(grid: &Grid, nu: f64, vstar: f64) -> Result<StokesInstance> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    if !(vstar >= 0.0) || !vstar.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling must be nonnegative, got {vstar}")));
    }
    let (lap, _) = build_laplacian(grid);
    let div = divergence(grid);
    let grad = -div.transpose();
    let n = grid.nodes();
    let nv = grid.dim * n;
    let mut bs = Mat::zeros(nv + n, nv + n);
    bs.view_mut((0, 0), (nv, nv)).copy_from(&(lap.as_mat() * nu));
    bs.view_mut((0, nv), (nv, n)).copy_from(&(&grad * vstar));
    bs.view_mut((nv, 0), (n, nv)).copy_from(&(grad.transpose() * vstar));
    let mut inst = StokesInstance {
        grid: *grid,
        nu,
        vstar,
        lap,
        grad,
        div,
        bs: SymMatrix::new(bs)?,
        c_h: f64::NAN,
    };
    inst.c_h = measure_div_constant(&inst)?;
    Ok(inst)
}

/// `max ‖Du‖² / uᵀLu = λ_max(D L⁻¹ Dᵀ)`.
pub fn measure_div_constant(inst: &StokesInstance) -> Result<f64> {
    let chol = Cholesky::new(inst.lap.as_mat().clone()).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: inst.lap.min_eigenvalue()?,
    })?;
    let x = chol.solve(&inst.div.transpose());
    SymMatrix::symmetrized(&inst.div * x).max_eigenvalue()
}

/// One row of the eigenvalue table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesRow {
    pub k: usize,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSpectrum {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// `−v*²/ν` and `−v*²/(2ν)`.
    pub accumulation: [f64; 2],
    /// Histogram over `[min, 0)` as `(lo, hi, count)`.
    pub bins: Vec<(f64, f64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub dim: usize,
    pub points: usize,
    pub h: f64,
    pub nu: f64,
    pub vstar: f64,
    pub c_h: f64,
    pub rows: Vec<StokesRow>,
    pub negative: NegativeSpectrum,
    pub report: TheoremReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesOptions {
    pub k_max: usize,
    /// Minimax probing; `None` skips the minimax check.
    pub minimax: Option<MinimaxConfig>,
    /// Random vectors for the sampled form bound.
    pub samples: usize,
    pub seed: u64,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            k_max: 6,
            minimax: Some(MinimaxConfig::default()),
            samples: 64,
            seed: 0,
        }
    }
}

/// Eigendecomposition of `diag(νL, 0)` assembled from that of `L`, and the
/// eigenvalues of `νL`.
fn reference_eig(inst: &StokesInstance) -> Result<(EigenDecomposition, Vec<f64>)> {
    let le = inst.lap.eig()?;
    let nv = inst.velocity_size();
    let n = inst.bs.n();
    let np = n - nv;
    let ref_values: Vec<f64> = le.values.iter().map(|l| inst.nu * l).collect();
    let mut vectors = Mat::zeros(n, n);
    for j in 0..np {
        vectors[(nv + j, j)] = 1.0;
    }
    vectors.view_mut((0, np), (nv, nv)).copy_from(&le.vectors);
    let mut values = vec![0.0; np];
    values.extend_from_slice(&ref_values);
    Ok((EigenDecomposition { values, vectors }, ref_values))
}

fn histogram(values: &[f64], nu: f64, vstar: f64, bins: usize) -> NegativeSpectrum {
    let neg: Vec<f64> = values.iter().copied().filter(|&l| l < 0.0).collect();
    let min = neg.iter().copied().fold(f64::INFINITY, f64::min);
    let max = neg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    if !neg.is_empty() && bins > 0 {
        let w = -min / bins as f64;
        for b in 0..bins {
            let lo = min + w * b as f64;
            let hi = if b + 1 == bins { 0.0 } else { lo + w };
            let count = neg
                .iter()
                .filter(|&&l| l >= lo && (l < hi || (b + 1 == bins && l < 0.0)))
                .count();
            out.push((lo, hi, count));
        }
    }
    let a = vstar * vstar / nu;
    NegativeSpectrum {
        count: neg.len(),
        min,
        max,
        accumulation: [-a, -0.5 * a],
        bins: out,
    }
}

/// Two-sided eigenvalue bounds, the discrete relative form bound and the
/// minimax representation for one instance.
pub fn verify_stokes_bounds(inst: &StokesInstance, opts: &StokesOptions, cfg: &CheckConfig) -> Result<StokesReport> {
    let tol = &cfg.tol;
    let mut r = TheoremReport::new("stokes");
    let values = eigvals_sym(&inst.bs)?;
    let bs_norm = values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let (eig_a, ref_values) = reference_eig(inst)?;
    let gamma = 0.5 * ref_values[0];
    let upper: Vec<f64> = values.iter().copied().filter(|&l| l > gamma).collect();
    if opts.k_max > upper.len() {
        return Err(Error::IndexOutOfRange {
            index: opts.k_max,
            max: upper.len(),
        });
    }
    let a = inst.reference();
    let v = inst.coupling();
    let split_a = split_from_eig(&eig_a, gamma, tol)?;
    let (pp, mm) = diagonal_block_norms(&v, &split_a);
    r.hypothesis("offdiag_form", pp.max(mm) <= tol.offdiag * (1.0 + bs_norm), -pp.max(mm));
    r.hypothesis("nu_positive", inst.nu > 0.0, inst.nu);

    // |v[f,f]| ≤ ε c_h a[f,f] + v*²/(εν) ‖f‖², certified exactly and sampled.
    // diag(I, −I) maps V to −V and fixes A, so one side of ± suffices.
    let mut rng = from_seed(opts.seed);
    let samples = gaussian(&mut rng, inst.bs.n(), opts.samples);
    for eps in FORM_EPS {
        let rhs_shift = inst.vstar * inst.vstar / (eps * inst.nu);
        let scaled = a.scale(eps * inst.c_h).shift(-rhs_shift);
        let top = v.sub(&scaled)?.max_eigenvalue()?;
        let form_tol = tol.neg * (1.0 + bs_norm);
        r.hypothesis(format!("form_bound_certified[eps={eps}]"), top <= form_tol, -top);
        let mut worst = f64::NEG_INFINITY;
        for j in 0..samples.ncols() {
            let f = samples.column(j).into_owned();
            let lhs = v.quadratic(&f)?.abs();
            let rhs = eps * inst.c_h * a.quadratic(&f)? + rhs_shift * f.norm_squared();
            worst = worst.max((lhs - rhs) / (1.0 + rhs));
        }
        r.conclude(format!("form_bound_sampled[eps={eps}]"), worst, tol.form);
    }

    if inst.grid.dim == 1 {
        r.conclude("div_constant_is_one", (inst.c_h - 1.0).abs(), tol.recon);
    }
    let shift = inst.c_h * inst.vstar * inst.vstar / inst.nu;
    let mut rows = Vec::with_capacity(opts.k_max);
    for k in 1..=opts.k_max {
        let (lo, val) = (ref_values[k - 1], upper[k - 1]);
        let hi = lo + shift;
        r.conclude(format!("lower_bound[k={k}]"), lo - val, tol.order);
        r.conclude(format!("upper_bound[k={k}]"), val - hi, tol.order);
        // ε = 1 in the relative bound: (1 + c_h)νλ_k + v*²/ν
        let coarse = (1.0 + inst.c_h) * lo + inst.vstar * inst.vstar / inst.nu;
        r.conclude(format!("coarse_upper_bound[k={k}]"), val - coarse, tol.order);
        rows.push(StokesRow {
            k,
            lower: lo,
            value: val,
            upper: hi,
        });
    }
    if inst.c_h <= 1.0 + tol.recon {
        r.note("c_h ≤ 1: the continuum constant v*²/ν applies verbatim");
    } else {
        r.note(format!("c_h = {:.6} > 1: upper bound carries the measured constant", inst.c_h));
    }
    r.note("finite-dim collapse: the form domains coincide with the whole space");

    if let Some(mm) = opts.minimax {
        let split_b = split(&inst.bs, gamma, tol)?;
        let mut mcfg = *cfg;
        mcfg.minimax = mm;
        let k = opts.k_max.min(split_a.dim_plus());
        minimax_suite(&mut r, &inst.bs, &split_a, &split_b, k, &mcfg)?;
    } else {
        r.note("minimax skipped at this size");
    }

    Ok(StokesReport {
        dim: inst.grid.dim,
        points: inst.grid.points,
        h: inst.grid.h,
        nu: inst.nu,
        vstar: inst.vstar,
        c_h: inst.c_h,
        rows,
        negative: histogram(&values, inst.nu, inst.vstar, 10),
        report: r,
    })
}

/// Local Lipschitz continuity of `λ_k` in `v*` at fixed `ν`, against the
/// estimate for off-diagonal form perturbations with `b = ε c_h`,
/// `a = 1/(εν)` and `m = 0`.
pub fn check_vstar_continuity(grid: &Grid, nu: f64, vstars: &[f64], k_max: usize, cfg: &CheckConfig) -> Result<TheoremReport> {
    let mut r = TheoremReport::new("stokes-continuity");
    let unit = assemble_stokes(grid, nu, 1.0)?;
    let a = unit.reference();
    let v = unit.coupling();
    let gamma = unit.split_point()?;
    let eps = 0.5 / (1.0 + vstars.iter().fold(0.0_f64, |m, t| m.max(t.abs())));
    let bound = RelBound {
        a: 1.0 / (eps * nu),
        b: eps * unit.c_h,
        kind: BoundKind::FormBound,
        certified: true,
        m: Some(0.0),
        branch: Some(Branch::Lower),
    };
    r.hypothesis("b_times_range_lt_1", bound.b * vstars.iter().fold(0.0_f64, |m, t| m.max(t.abs())) < 1.0, bound.b);
    let curves = vstars
        .iter()
        .map(|&t| {
            let bt = a.add(&v.scale(t))?;
            Ok((t, eigvals_sym(&bt)?.into_iter().filter(|&l| l > gamma).collect::<Vec<_>>()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (bb, ta) = (bound.b, bound.tilde_a());
    let (worst, pairs) = lipschitz_violation(&curves, k_max, |t, s, ls| {
        let denom = 1.0 - bb * s.abs();
        let dt = (t - s).abs();
        (denom > 0.0 && bb * dt <= denom).then(|| ta * dt / denom + bb * dt / denom * ls.abs())
    });
    r.conclude("lipschitz", worst, cfg.tol.order);
    r.note(format!("{pairs} pair checks, b = {bb:e}, ã = {ta:e}"));
    Ok(r)
}

/// Observed orders `log(e₁/e₂)/log(h₁/h₂)` between consecutive levels.
pub fn convergence_orders(levels: &[(f64, f64)], exact: f64) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| {
            let (h1, v1) = w[0];
            let (h2, v2) = w[1];
            ((v1 - exact).abs() / (v2 - exact).abs()).ln() / (h1 / h2).ln()
        })
        .collect()
}

/// CSV with header `k,lower,value,upper`.
pub fn rows_to_csv(rows: &[StokesRow]) -> String {
    let mut s = String::from("k,lower,value,upper\n");
    for r in rows {
        s.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", r.k, r.lower, r.value, r.upper));
    }
    s
}
