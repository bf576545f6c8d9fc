//! The minimax theorems for operator and form perturbations.

use super::{minimax_suite, CheckConfig, TheoremReport};
use crate::error::{Error, Result};
use crate::perturb::{diagonal_block_norms, min_form_bound_a, min_operator_bound_a, Branch};
use crate::spectral::{graph_operator, projector_distance, split, verify_graph_identities, SpectralSplit};
use crate::symmat::{eigvals_sym, spectral_norm, Mat, QuadraticForm, SymMatrix};
use crate::tolerance::Tolerances;

/// `−λ_max` of `B − γ` compressed to `Ran P₋`; holds when `≥ −neg_tol`.
///
/// The split point is subtracted so that the statement for a gap around `γ`
/// reduces to the one for a gap around `0`.
pub fn check_negativity(b: &SymMatrix, split_a: &SpectralSplit, tol: &Tolerances) -> Result<(bool, f64)> {
    if split_a.dim_minus() == 0 {
        return Ok((true, f64::INFINITY));
    }
    let shifted = b.shift(split_a.gamma);
    let part = shifted.congruence(&split_a.basis_m)?;
    let margin = -part.max_eigenvalue()?;
    let neg_tol = tol.neg * (1.0 + b.norm());
    Ok((margin >= -neg_tol, margin))
}

/// Same as [`check_negativity`] with `⟨x,Bx⟩` replaced by the form of `B`.
fn check_form_negativity(form: &QuadraticForm, split_a: &SpectralSplit, tol: &Tolerances) -> Result<(bool, f64)> {
    if split_a.dim_minus() == 0 {
        return Ok((true, f64::INFINITY));
    }
    let wm = &split_a.basis_m;
    let h = &form.half * wm;
    let g = h.transpose() * (&form.signop * &h) - Mat::identity(wm.ncols(), wm.ncols()) * split_a.gamma;
    let margin = -SymMatrix::symmetrized(g).max_eigenvalue()?;
    let neg_tol = tol.neg * (1.0 + form.generator.norm());
    Ok((margin >= -neg_tol, margin))
}

/// Splits `m` at `gamma`, recording success as a hypothesis.
fn split_hypothesis(
    report: &mut TheoremReport,
    name: &str,
    m: &SymMatrix,
    gamma: f64,
    tol: &Tolerances,
) -> Result<Option<SpectralSplit>> {
    match split(m, gamma, tol) {
        Ok(s) => {
            let dist = s
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |acc, l| acc.min((l - gamma).abs()));
            report.hypothesis(name, true, dist);
            Ok(Some(s))
        }
        Err(Error::GapTooClose { eigenvalue, .. }) => {
            report.hypothesis(name, false, -(eigenvalue - gamma).abs());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn k_limit(cfg: &CheckConfig, split_a: &SpectralSplit) -> usize {
    cfg.k_max.min(split_a.dim_plus())
}

/// Max over grid pairs and indices of `(|λ_k(t) − λ_k(s)| − bound) / (1 + max|λ|)`.
/// `bound(t, s, λ_k(s))` returns `None` for pairs outside the estimate's range.
pub fn lipschitz_violation(
    curves: &[(f64, Vec<f64>)],
    k_max: usize,
    bound: impl Fn(f64, f64, f64) -> Option<f64>,
) -> (f64, usize) {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (t, lt) in curves {
        for (s, ls) in curves {
            if t == s {
                continue;
            }
            for k in 0..k_max.min(lt.len()).min(ls.len()) {
                if let Some(rhs) = bound(*t, *s, ls[k]) {
                    let excess = (lt[k] - ls[k]).abs() - rhs;
                    let scale = 1.0 + lt[k].abs().max(ls[k].abs());
                    worst = worst.max(excess / scale);
                    pairs += 1;
                }
            }
        }
    }
    (if pairs == 0 { 0.0 } else { worst }, pairs)
}

/// Eigenvalues of `A + tV` above `gamma`, ascending.
fn upper_curve(a: &SymMatrix, v: &SymMatrix, t: f64, gamma: f64) -> Result<Vec<f64>> {
    let bt = a.add(&v.scale(t))?;
    Ok(eigvals_sym(&bt)?.into_iter().filter(|&l| l > gamma).collect())
}

pub fn check_thm_1_2(a: &SymMatrix, v: &SymMatrix, gamma: f64, cfg: &CheckConfig) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    let mut r = TheoremReport::new("thm1.2");
    let split_a = split(a, gamma, tol)?;
    let b = a.add(v)?;
    r.hypothesis("v_symmetric", true, 0.0);
    let bound = min_operator_bound_a(v, a, cfg.small_b)?;
    r.hypothesis("v_infinitesimal", bound.certified, 1.0 - bound.b);
    r.note(format!(
        "finite-dim collapse: every matrix has A-bound 0; certified a = {:e} at b = {:e}",
        bound.a, bound.b
    ));
    let split_b = split_hypothesis(&mut r, "gamma_in_resolvent_of_b", &b, gamma, tol)?;
    let k = k_limit(cfg, &split_a);
    let Some(split_b) = split_b else {
        r.not_applicable("dim_ran_q_ge_dim_ran_p");
        minimax_suite(&mut r, &b, &split_a, &split_a, k, cfg)?;
        return Ok(r);
    };
    let pq = spectral_norm(&(&split_a.pp * &split_b.pm));
    r.hypothesis("pq_norm_lt_1", 1.0 - pq > tol.graph, 1.0 - pq);
    let (holds, margin) = check_negativity(&b, &split_a, tol)?;
    r.hypothesis("negativity", holds, margin);

    let deficit = split_a.dim_plus() as f64 - split_b.dim_plus() as f64;
    r.conclude("dim_ran_q_ge_dim_ran_p", deficit, 0.0);
    let k = if r.applicable() { k.min(split_b.dim_plus()) } else { k };
    minimax_suite(&mut r, &b, &split_a, &split_b, k, cfg)?;
    Ok(r)
}

pub fn check_thm_1_3(
    a: &SymMatrix,
    b: &SymMatrix,
    gamma: f64,
    branch: Branch,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    let mut r = TheoremReport::new("thm1.3");
    let split_a = split(a, gamma, tol)?;
    let m = match branch {
        Branch::Lower => a.min_eigenvalue()?,
        Branch::Upper => a.max_eigenvalue()?,
    };
    r.hypothesis("semibounded", true, m);
    r.note(format!(
        "finite-dim collapse: A is bounded; declared {} branch, so the small side is Ran P{}",
        match branch {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        },
        match branch {
            Branch::Lower => "-",
            Branch::Upper => "+",
        }
    ));
    r.note("finite-dim collapse: Dom(|A|^1/2) = Dom(|B|^1/2) and Dom(A) = Dom(B) hold trivially");
    let split_b = split_hypothesis(&mut r, "gamma_in_resolvent_of_b", b, gamma, tol)?;
    let k = k_limit(cfg, &split_a);
    let Some(split_b) = split_b else {
        r.not_applicable("dim_equality");
        minimax_suite(&mut r, b, &split_a, &split_a, k, cfg)?;
        return Ok(r);
    };
    let dist = projector_distance(&split_a, &split_b);
    r.hypothesis("projector_distance_lt_1", 1.0 - dist > tol.graph, 1.0 - dist);
    let form = QuadraticForm::new(b.clone())?;
    let (holds, margin) = check_form_negativity(&form, &split_a, tol)?;
    r.hypothesis("form_negativity", holds, margin);
    let (holds, margin) = check_negativity(b, &split_a, tol)?;
    r.hypothesis("operator_negativity", holds, margin);

    r.conclude(
        "dim_equality",
        (split_a.dim_plus() as f64 - split_b.dim_plus() as f64).abs(),
        0.0,
    );
    let k = if r.applicable() { k.min(split_b.dim_plus()) } else { k };
    minimax_suite(&mut r, b, &split_a, &split_b, k, cfg)?;
    Ok(r)
}

/// Off-diagonality hypotheses shared by the operator and form versions.
fn off_diagonal_hypotheses(r: &mut TheoremReport, v: &SymMatrix, b: &SymMatrix, split_a: &SpectralSplit, tol: &Tolerances) {
    let (pp, mm) = diagonal_block_norms(v, split_a);
    let od_tol = tol.offdiag * (1.0 + b.norm());
    r.hypothesis("offdiag_plus", pp <= od_tol, od_tol - pp);
    r.hypothesis("offdiag_minus", mm <= od_tol, od_tol - mm);
}

pub fn check_thm_1_4(
    a: &SymMatrix,
    v: &SymMatrix,
    gamma: f64,
    sweep: Option<&[f64]>,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    let mut r = TheoremReport::new("thm1.4");
    let split_a = split(a, gamma, tol)?;
    let b = a.add(v)?;
    off_diagonal_hypotheses(&mut r, v, &b, &split_a, tol);
    let bound = min_operator_bound_a(v, a, cfg.small_b)?;
    r.hypothesis("a_bound_lt_1", bound.b < 1.0, 1.0 - bound.b);
    r.note(format!(
        "finite-dim collapse: A-bound is 0; certified a = {:e} at b = {:e}",
        bound.a, bound.b
    ));
    let split_b = split_hypothesis(&mut r, "gamma_in_resolvent_of_b", &b, gamma, tol)?;
    let k = k_limit(cfg, &split_a);
    let names = [
        "dim_equality",
        "projector_distance_le_sqrt2_over_2",
        "graph_identities",
        "block_diagonalization",
        "block_form",
    ];
    let Some(split_b) = split_b.filter(|_| r.applicable()) else {
        for n in names {
            r.not_applicable(n);
        }
        minimax_suite(&mut r, &b, &split_a, &split_a, k, cfg)?;
        for kk in 1..=k {
            r.not_applicable(format!("lower_bound[k={kk}]"));
        }
        if sweep.is_some() {
            r.not_applicable("lipschitz");
        }
        return Ok(r);
    };

    r.conclude(
        "dim_equality",
        (split_a.dim_plus() as f64 - split_b.dim_plus() as f64).abs(),
        0.0,
    );
    let dist = projector_distance(&split_a, &split_b);
    r.conclude(
        "projector_distance_le_sqrt2_over_2",
        dist - std::f64::consts::FRAC_1_SQRT_2,
        tol.projector_offdiag,
    );

    let g = graph_operator(&split_a, &split_b, tol)?;
    let res = verify_graph_identities(&g, &split_a, &split_b)?;
    r.conclude("graph_identities", res.max(), tol.block_diag * res.scale);

    let n = a.n();
    let id = Mat::identity(n, n);
    let am = a.as_mat();
    let vm = v.as_mat();
    let bm = b.as_mat();
    let ay = am - &g.y * vm;
    let lhs = (&id - &g.y) * bm;
    let rhs = &ay * (&id - &g.y);
    let bd_scale = (1.0 + a.norm() + v.norm()) * (1.0 + spectral_norm(&g.y));
    r.conclude(
        "block_diagonalization",
        spectral_norm(&(lhs - rhs)),
        tol.block_diag * bd_scale,
    );

    // A − YV = diag(A₊ + X*W*, A₋ − XW) with W = P₊V|Ran P₋
    let wp = &split_a.basis_p;
    let wm = &split_a.basis_m;
    let w = wp.transpose() * vm * wm;
    let ap = wp.transpose() * am * wp;
    let amin = wm.transpose() * am * wm;
    let u = split_a.adapted_basis();
    let blocks = u.transpose() * &ay * &u;
    let (kp, km) = (wp.ncols(), wm.ncols());
    let mut target = Mat::zeros(n, n);
    target
        .view_mut((0, 0), (kp, kp))
        .copy_from(&(ap + g.x.transpose() * w.transpose()));
    target
        .view_mut((kp, kp), (km, km))
        .copy_from(&(amin - &g.x * &w));
    r.conclude("block_form", spectral_norm(&(blocks - target)), tol.block_diag * bd_scale);

    let k = k.min(split_b.dim_plus());
    let reports = minimax_suite(&mut r, &b, &split_a, &split_b, k, cfg)?;
    let upper_a = split_a.upper_eigenvalues();
    for rep in &reports {
        r.conclude(
            format!("lower_bound[k={}]", rep.k),
            upper_a[rep.k - 1] - rep.direct,
            rep.mm_tol,
        );
    }

    if let Some(grid) = sweep {
        let lip = v.norm();
        let curves = grid
            .iter()
            .map(|&t| Ok((t, upper_curve(a, v, t, gamma)?)))
            .collect::<Result<Vec<_>>>()?;
        let (worst, pairs) = lipschitz_violation(&curves, cfg.k_max, |t, s, _| Some(lip * (t - s).abs()));
        r.conclude("lipschitz", worst, tol.order);
        r.note(format!("lipschitz: {pairs} pair checks with constant ‖V‖ = {lip:e}"));
    }
    Ok(r)
}

/// Nine points in `(−1/(2b), 1/(2b))`, symmetric around `0`.
pub fn default_form_grid(b: f64) -> Vec<f64> {
    let half = 0.95 / (2.0 * b);
    (0..9).map(|i| (i as f64 - 4.0) / 4.0 * half).collect()
}

pub fn check_thm_1_5(
    a: &SymMatrix,
    v: &SymMatrix,
    gamma: f64,
    branch: Branch,
    t_grid: Option<&[f64]>,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    let mut r = TheoremReport::new("thm1.5");
    let split_a = split(a, gamma, tol)?;
    let b = a.add(v)?;
    off_diagonal_hypotheses(&mut r, v, &b, &split_a, tol);
    let bound = min_form_bound_a(v, a, cfg.form_b, branch)?;
    r.hypothesis("form_bound_certified", bound.certified, bound.a_signed());
    r.hypothesis("b_semibounded", true, b.min_eigenvalue()?);
    r.note(format!(
        "certified: sufficient PSD condition; a = {:e}, b = {:e}, signed a = {:e}, m = {:e}",
        bound.a,
        bound.b,
        bound.a_signed(),
        bound.m.unwrap_or(0.0)
    ));
    r.note("finite-dim collapse: B_t is bounded, hence semibounded, for every t");
    let split_b = split_hypothesis(&mut r, "gamma_in_resolvent_of_b", &b, gamma, tol)?;
    let k = k_limit(cfg, &split_a);

    let Some(split_b) = split_b.filter(|_| r.applicable()) else {
        r.not_applicable("dim_equality");
        minimax_suite(&mut r, &b, &split_a, &split_a, k, cfg)?;
        for kk in 1..=k {
            r.not_applicable(format!("lower_bound[k={kk}]"));
            r.not_applicable(format!("upper_bound[k={kk}]"));
        }
        r.not_applicable("lipschitz");
        return Ok(r);
    };

    r.conclude(
        "dim_equality",
        (split_a.dim_plus() as f64 - split_b.dim_plus() as f64).abs(),
        0.0,
    );
    let mut form_cfg = *cfg;
    form_cfg.minimax.form_path = true;
    let k = k.min(split_b.dim_plus());
    let reports = minimax_suite(&mut r, &b, &split_a, &split_b, k, &form_cfg)?;
    let upper_a = split_a.upper_eigenvalues();
    for rep in &reports {
        let la = upper_a[rep.k - 1];
        r.conclude(format!("lower_bound[k={}]", rep.k), la - rep.direct, rep.mm_tol);
        match bound.eigenvalue_upper_bound(la) {
            Some(ub) => r.conclude(format!("upper_bound[k={}]", rep.k), rep.direct - ub, rep.mm_tol),
            None => r.not_applicable(format!("upper_bound[k={}]", rep.k)),
        }
    }

    let grid = t_grid.map_or_else(|| default_form_grid(bound.b), <[f64]>::to_vec);
    let curves = grid
        .iter()
        .map(|&t| Ok((t, upper_curve(a, v, t, gamma)?)))
        .collect::<Result<Vec<_>>>()?;
    let (bb, ta) = (bound.b, bound.tilde_a());
    let (worst, pairs) = lipschitz_violation(&curves, cfg.k_max, |t, s, ls| {
        let denom = 1.0 - bb * s.abs();
        let dt = (t - s).abs();
        (denom > 0.0 && bb * dt <= denom).then(|| ta * dt / denom + bb * dt / denom * ls.abs())
    });
    r.conclude("lipschitz", worst, tol.order);
    r.note(format!("lipschitz: {pairs} admissible pair checks, ã = {ta:e}"));
    Ok(r)
}
