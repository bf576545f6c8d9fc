//! Bounded and semibounded perturbations of a gap `(c, d)`.

use super::principles::{check_negativity, check_thm_1_2, check_thm_1_4, lipschitz_violation};
use super::{count_at_least, minimax_suite, penetration, CheckConfig, TheoremReport};
use crate::error::{Error, Result};
use crate::perturb::{best_form_bound, form_bound_interval, split_diag_offdiag, split_pos_neg, Branch};
use crate::spectral::{projector_distance, split, SpectralSplit};
use crate::symmat::{eigvals_sym, psd_leq, SymMatrix};

/// Eigenvalues of `b` above `gamma`, ascending.
pub fn upper_part(b: &SymMatrix, gamma: f64) -> Result<Vec<f64>> {
    Ok(eigvals_sym(b)?.into_iter().filter(|&l| l > gamma).collect())
}

/// Fails with `InsideSpectrum` unless `(c, d)` is free of eigenvalues of `a`.
fn require_gap(a: &SymMatrix, c: f64, d: f64) -> Result<Vec<f64>> {
    if !(c < d) {
        return Err(Error::InvalidArgument(format!("empty gap ({c}, {d})")));
    }
    let values = eigvals_sym(a)?;
    // eigenvalues sitting on an endpoint may land a few ulps inside
    let slack = 1e-12 * (1.0 + values.iter().fold(0.0_f64, |m, l| m.max(l.abs())));
    if let Some(&l) = values.iter().find(|&&l| l > c + slack && l < d - slack) {
        return Err(Error::InsideSpectrum {
            point: 0.5 * (c + d),
            eigenvalue: l,
        });
    }
    Ok(values)
}

/// `‖V^(p)‖` and `‖V^(n)‖`.
fn sign_norms(v: &SymMatrix) -> Result<(f64, f64)> {
    let (vp, vn) = split_pos_neg(v)?;
    Ok((vp.norm(), vn.norm()))
}

/// Splits `b` at `gamma` or records the failure as a failed conclusion.
fn split_or_fail(r: &mut TheoremReport, b: &SymMatrix, gamma: f64, cfg: &CheckConfig) -> Result<Option<SpectralSplit>> {
    match split(b, gamma, &cfg.tol) {
        Ok(s) => Ok(Some(s)),
        Err(Error::GapTooClose { eigenvalue, .. }) => {
            r.conclude_bool("split_of_b", false, (eigenvalue - gamma).abs(), 0.0);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn check_prop_2_1(a: &SymMatrix, v: &SymMatrix, c: f64, d: f64, cfg: &CheckConfig) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    let values_a = require_gap(a, c, d)?;
    let mut r = TheoremReport::new("prop2.1");
    let (np, nn) = sign_norms(v)?;
    let width = d - c;
    r.hypothesis("norm_condition", np + nn < width, width - np - nn);
    let names = [
        "interval_eigenvalue_free",
        "dim_equality",
        "projector_sin_bound",
    ];
    if !r.applicable() {
        for n in names {
            r.not_applicable(n);
        }
        return Ok(r);
    }
    let (lo, hi) = (c + np, d - nn);
    let gamma = 0.5 * (lo + hi);
    let b = a.add(v)?;
    let values_b = eigvals_sym(&b)?;
    let gap_tol = tol.gap * (1.0 + b.norm());
    r.conclude("interval_eigenvalue_free", penetration(&values_b, lo, hi), gap_tol);
    let dim_a = count_at_least(&values_a, d, tol.gap * (1.0 + a.norm()));
    let dim_b = count_at_least(&values_b, hi, gap_tol);
    r.conclude("dim_equality", (dim_a as f64 - dim_b as f64).abs(), 0.0);

    let split_a = split(a, gamma, tol)?;
    let Some(split_b) = split_or_fail(&mut r, &b, gamma, cfg)? else {
        return Ok(r);
    };
    let sin_bound = (0.5 * ((np + nn) / width).min(1.0).asin()).sin();
    r.conclude(
        "projector_sin_bound",
        projector_distance(&split_a, &split_b) - sin_bound,
        tol.projector,
    );

    // route 1: the general principle for bounded V
    let route1 = check_thm_1_2(a, v, gamma, cfg)?;
    // route 2: absorb the diagonal part into A, keep the off-diagonal part
    let (vdiag, voff) = split_diag_offdiag(v, &split_a)?;
    let a2 = a.add(&vdiag)?;
    let mut route2 = check_thm_1_4(&a2, &voff, gamma, None, cfg)?;
    let mm2 = std::mem::take(&mut route2.minimax);
    for (m1, m2) in route1.minimax.iter().zip(&mm2) {
        let diff = (m1.attained() - m2.attained()).abs();
        r.conclude(format!("routes_agree[k={}]", m1.k), diff, tol.order * (1.0 + m1.direct.abs()));
    }
    r.absorb("route1", route1);
    r.absorb("route2", route2);
    Ok(r)
}

pub fn check_cor_2_3(
    a: &SymMatrix,
    v0: &SymMatrix,
    v1: &SymMatrix,
    c: f64,
    d: f64,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    require_gap(a, c, d)?;
    let mut r = TheoremReport::new("cor2.3");
    let width = d - c;
    let (p0, n0) = sign_norms(v0)?;
    let (p1, n1) = sign_norms(v1)?;
    r.hypothesis("norm_condition_v0", p0 + n0 < width, width - p0 - n0);
    r.hypothesis("norm_condition_v1", p1 + n1 < width, width - p1 - n1);
    let order = psd_leq(v0, v1, tol.neg * (1.0 + v0.norm() + v1.norm()))?;
    r.hypothesis("v0_le_v1", order.holds, order.margin);
    if !r.applicable() {
        r.not_applicable("monotone");
        return Ok(r);
    }
    let g0 = 0.5 * (c + p0 + d - n0);
    let g1 = 0.5 * (c + p1 + d - n1);
    let l0 = upper_part(&a.add(v0)?, g0)?;
    let l1 = upper_part(&a.add(v1)?, g1)?;
    r.conclude("dim_equality", (l0.len() as f64 - l1.len() as f64).abs(), 0.0);
    let kk = l0.len().min(l1.len());
    let mut worst = f64::NEG_INFINITY;
    for k in 0..kk {
        worst = worst.max((l0[k] - l1[k]) / (1.0 + l1[k].abs()));
    }
    r.conclude("monotone", if kk == 0 { 0.0 } else { worst }, tol.order);
    r.note(format!("monotone: {kk} indices compared"));
    Ok(r)
}

pub fn check_cor_2_4(
    a: &SymMatrix,
    v: &SymMatrix,
    c: f64,
    d: f64,
    t_grid: &[f64],
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    require_gap(a, c, d)?;
    let mut r = TheoremReport::new("cor2.4");
    let (np, nn) = sign_norms(v)?;
    let width = d - c;
    r.hypothesis("norm_condition", np + nn < width, width - np - nn);
    let in_range = t_grid.iter().all(|t| (0.0..=1.0).contains(t));
    r.hypothesis("grid_in_unit_interval", in_range, if in_range { 0.0 } else { -1.0 });
    if !r.applicable() {
        r.not_applicable("dim_constant");
        r.not_applicable("lipschitz");
        return Ok(r);
    }
    let curves = t_grid
        .iter()
        .map(|&t| {
            let gamma = 0.5 * (c + t * np + d - t * nn);
            Ok((t, upper_part(&a.add(&v.scale(t))?, gamma)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let lens: Vec<usize> = curves.iter().map(|(_, l)| l.len()).collect();
    let spread = lens.iter().max().unwrap_or(&0) - lens.iter().min().unwrap_or(&0);
    r.conclude("dim_constant", spread as f64, 0.0);
    let lip = v.norm();
    let (worst, pairs) = lipschitz_violation(&curves, cfg.k_max, |t, s, _| Some(lip * (t - s).abs()));
    r.conclude("lipschitz", worst, tol.order);
    r.note(format!("lipschitz: {pairs} pair checks with constant ‖V‖ = {lip:e}"));
    Ok(r)
}

pub fn check_prop_2_5(
    a: &SymMatrix,
    v: &SymMatrix,
    c: f64,
    d: f64,
    branch: Branch,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let tol = &cfg.tol;
    require_gap(a, c, d)?;
    let mut r = TheoremReport::new("prop2.5");
    let (bound, width) = best_form_bound(v, a, branch, c, d)?;
    r.hypothesis("form_bound_b_lt_1", bound.certified && bound.b < 1.0, 1.0 - bound.b);
    r.hypothesis("unbounded_condition", width > 0.0, width);
    r.note(format!(
        "form bound: a = {:e}, b = {:e}, branch {:?}",
        bound.a_signed(),
        bound.b,
        branch
    ));
    r.note("finite-dim collapse: A is bounded; the declared branch selects the bounded side");
    let k = cfg.k_max;
    if !r.applicable() {
        for n in ["interval_eigenvalue_free", "dim_equality", "negativity"] {
            r.not_applicable(n);
        }
        for kk in 1..=k {
            for n in ["minimax_attained", "minimax_lower"] {
                r.not_applicable(format!("{n}[k={kk}]"));
            }
        }
        return Ok(r);
    }
    let (lo, hi) = form_bound_interval(&bound, c, d);
    let gamma = 0.5 * (lo + hi);
    let b = a.add(v)?;
    let values_b = eigvals_sym(&b)?;
    r.conclude(
        "interval_eigenvalue_free",
        penetration(&values_b, lo, hi),
        tol.gap * (1.0 + b.norm()),
    );
    let split_a = split(a, gamma, tol)?;
    let (_, margin) = check_negativity(&b, &split_a, tol)?;
    r.conclude("negativity", -margin, tol.neg * (1.0 + b.norm()));
    let Some(split_b) = split_or_fail(&mut r, &b, gamma, cfg)? else {
        return Ok(r);
    };
    r.conclude(
        "dim_equality",
        (split_a.dim_plus() as f64 - split_b.dim_plus() as f64).abs(),
        0.0,
    );
    let k = k.min(split_a.dim_plus()).min(split_b.dim_plus());
    minimax_suite(&mut r, &b, &split_a, &split_b, k, cfg)?;
    Ok(r)
}
