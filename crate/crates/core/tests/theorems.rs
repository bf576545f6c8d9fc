mod common;

use gapmm::generate::{batch, generate, InstanceKind, InstanceSpec};
use gapmm::perturb::{diagonal_block_norms, split_pos_neg, Branch};
use gapmm::spectral::split;
use gapmm::theorems::{
    check_cor_2_3, check_gls_conditions, check_prop_2_1, check_prop_2_5, check_specrad, check_thm_1_2,
    check_thm_1_3, check_thm_1_4, check_thm_1_5, CheckConfig, TheoremReport,
};
use gapmm::{SymMatrix, Tolerances};

fn cfg() -> CheckConfig {
    let mut c = CheckConfig::default();
    c.minimax.trials = 100;
    c
}

fn conclusion<'a>(r: &'a TheoremReport, name: &str) -> &'a gapmm::theorems::Conclusion {
    r.conclusions.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no {name} in {}", r.theorem))
}

fn coupled(t: f64) -> (SymMatrix, SymMatrix) {
    let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
    let v = SymMatrix::from_row_slice(2, &[0.0, t, t, 0.0]).unwrap();
    (a, v)
}

#[test]
fn off_diagonal_two_by_two_closed_form() {
    for t in [0.2, 1.0, 3.0] {
        let (a, v) = coupled(t);
        let expected = (1.0_f64 + t * t).sqrt();
        let r = check_thm_1_4(&a, &v, 0.0, Some(&[-1.0, 0.0, 0.5, 2.0]), &cfg()).unwrap();
        assert!(r.applicable() && r.passed(), "{:?}", r.failures());
        assert!((r.minimax[0].direct - expected).abs() < 1e-14);
        assert!((r.minimax[0].attained() - expected).abs() < 1e-13);
        // sin of half the rotation angle: the eigenvector of +√(1+t²) makes
        // the angle atan(t)/2 with the first axis
        let dist = conclusion(&r, "projector_distance_le_sqrt2_over_2").residual + std::f64::consts::FRAC_1_SQRT_2;
        assert!((dist - (0.5 * t.atan()).sin()).abs() < 1e-13, "t = {t}: {dist}");
        let r5 = check_thm_1_5(&a, &v, 0.0, Branch::Lower, None, &cfg()).unwrap();
        assert!(r5.applicable() && r5.passed(), "{:?}", r5.failures());
    }
}

#[test]
fn commuting_bounded_perturbation_shifts_exactly() {
    let a = SymMatrix::from_diagonal(&[3.0, 2.0, -1.0, -2.0]).unwrap();
    let v = SymMatrix::from_diagonal(&[0.25, -0.5, 0.5, -0.25]).unwrap();
    let r = check_prop_2_1(&a, &v, -1.0, 2.0, &cfg()).unwrap();
    assert!(r.applicable() && r.passed(), "{:?}", r.failures());
    // diagonal V keeps the eigenvectors, so the projectors coincide
    let sin_bound = conclusion(&r, "projector_sin_bound");
    let bound = (0.5 * (1.0_f64 / 3.0).asin()).sin();
    assert!((sin_bound.residual + bound).abs() < 1e-14);
    let thm = check_thm_1_2(&a, &v, 0.5, &cfg()).unwrap();
    let direct: Vec<f64> = thm.minimax.iter().map(|m| m.direct).collect();
    assert_eq!(direct, vec![1.5, 3.25]);
}

#[test]
fn negativity_failure_gates_the_minimax_conclusions() {
    let a = SymMatrix::from_diagonal(&[2.0, 1.0, -1.0]).unwrap();
    // pushes the negative eigenvalue above the split point
    let v = SymMatrix::from_diagonal(&[0.0, 0.0, 1.8]).unwrap();
    let r = check_thm_1_2(&a, &v, 0.5, &cfg()).unwrap();
    assert!(!r.applicable());
    let neg = r.hypotheses.iter().find(|h| h.name == "negativity").unwrap();
    assert!(!neg.holds && neg.margin < 0.0);
    assert!(r.conclusions.iter().all(|c| c.holds.is_none()));
    assert_eq!(r.tally().fail, 0);
}

#[test]
fn diagonal_perturbation_is_not_off_diagonal() {
    let a = SymMatrix::from_diagonal(&[2.0, 1.0, -1.0]).unwrap();
    let v = SymMatrix::from_diagonal(&[0.3, 0.0, 0.0]).unwrap();
    let r = check_thm_1_4(&a, &v, 0.0, None, &cfg()).unwrap();
    assert!(!r.applicable());
    let s = split(&a, 0.0, &Tolerances::default()).unwrap();
    let (plus, minus) = diagonal_block_norms(&v, &s);
    assert!((plus - 0.3).abs() < 1e-15 && minus == 0.0);
}

#[test]
fn monotonicity_for_ordered_diagonal_pair() {
    let a = SymMatrix::from_diagonal(&[2.0, 1.5, -1.0, -3.0]).unwrap();
    let v0 = SymMatrix::from_diagonal(&[-0.1, 0.0, 0.1, 0.0]).unwrap();
    let v1 = SymMatrix::from_diagonal(&[0.2, 0.1, 0.2, 0.1]).unwrap();
    let r = check_cor_2_3(&a, &v0, &v1, -1.0, 1.0, &cfg()).unwrap();
    assert!(r.applicable() && r.passed(), "{:?}", r.failures());
    // reversing the order violates the ordering hypothesis
    let rev = check_cor_2_3(&a, &v1, &v0, -1.0, 1.0, &cfg()).unwrap();
    assert!(!rev.applicable());
}

#[test]
fn semibounded_pairs_satisfy_the_projector_form() {
    for inst in batch(InstanceKind::Semibounded, 6, (10, 25), 17).unwrap() {
        let r = check_thm_1_3(&inst.a, &inst.b(), inst.gamma, inst.branch, &cfg()).unwrap();
        assert!(r.applicable() && r.passed(), "{}: {:?} {:?}", inst.id, r.hypotheses, r.failures());
        let below = split(&inst.a, inst.gamma, &Tolerances::default()).unwrap().dim_minus();
        for m in &r.minimax {
            let oracle = common::bisect_eigenvalue(&inst.b(), below + m.k - 1);
            assert!((oracle - m.direct).abs() <= 1e-10 * (1.0 + oracle.abs()));
        }
    }
}

#[test]
fn unbounded_style_interval_is_free_of_spectrum() {
    for inst in batch(InstanceKind::UnboundedStyle, 8, (15, 30), 23).unwrap() {
        let r = check_prop_2_5(&inst.a, &inst.v, inst.c, inst.d, inst.branch, &cfg()).unwrap();
        assert!(r.applicable() && r.passed(), "{}: {:?} {:?}", inst.id, r.hypotheses, r.failures());
    }
}

#[test]
fn form_perturbations_respect_two_sided_bounds() {
    for branch in [Branch::Lower, Branch::Upper] {
        let spec = InstanceSpec {
            branch,
            ..InstanceSpec::new(InstanceKind::OffdiagForm, 24, 5)
        };
        let inst = generate(&spec).unwrap();
        let r = check_thm_1_5(&inst.a, &inst.v, inst.gamma, branch, None, &cfg()).unwrap();
        assert!(r.applicable() && r.passed(), "{branch:?}: {:?}", r.failures());
        assert!(r.conclusions.iter().any(|c| c.name.starts_with("upper_bound")));
    }
}

#[test]
fn generated_instances_carry_positive_margins() {
    for kind in [InstanceKind::BoundedPert, InstanceKind::OffdiagOp, InstanceKind::UnboundedStyle] {
        for inst in batch(kind, 5, (8, 16), 2).unwrap() {
            assert!(!inst.margins.is_empty());
            if kind == InstanceKind::BoundedPert {
                let (p, n) = split_pos_neg(&inst.v).unwrap();
                let margin = inst.d - inst.c - p.norm() - n.norm();
                assert!((margin - inst.margins["norm_condition"]).abs() < 1e-12 && margin > 0.0);
            }
        }
    }
    let a = batch(InstanceKind::OffdiagForm, 3, (8, 16), 9).unwrap();
    let b = batch(InstanceKind::OffdiagForm, 3, (8, 16), 9).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.a.clone(), x.v.clone(), x.gamma), (y.a.clone(), y.v.clone(), y.gamma));
    }
}

#[test]
fn compressions_on_generated_instances() {
    for inst in batch(InstanceKind::OffdiagOp, 5, (10, 20), 31).unwrap() {
        let s = check_specrad(&inst.a, &inst.v, inst.gamma, &cfg()).unwrap();
        assert!(s.passed(), "{s:?}");
        assert!((s.spectral_radius - s.norm_s).abs() <= 1e-12);
        let g = check_gls_conditions(&inst.a, &inst.b(), inst.gamma, &cfg()).unwrap();
        assert!(g.passed() && g.sigma_min > 0.0, "{g:?}");
        assert!(g.pq_norm < std::f64::consts::FRAC_1_SQRT_2 + 1e-12);
    }
}
