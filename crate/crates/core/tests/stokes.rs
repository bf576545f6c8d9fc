mod common;

use std::f64::consts::PI;

use gapmm::minimax::MinimaxConfig;
use gapmm::stokes::{
    assemble_stokes, check_vstar_continuity, convergence_orders, measure_div_constant, rows_to_csv,
    verify_stokes_bounds, Grid, StokesOptions,
};
use gapmm::theorems::CheckConfig;
use gapmm::Error;

fn laplace_1d(points: usize, k: usize) -> f64 {
    let h = 1.0 / (points + 1) as f64;
    4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2)
}

fn opts(trials: usize) -> StokesOptions {
    StokesOptions {
        minimax: Some(MinimaxConfig {
            trials,
            ..MinimaxConfig::default()
        }),
        ..StokesOptions::default()
    }
}

#[test]
fn one_d_table_against_closed_form() {
    let grid = Grid::new(1, 16).unwrap();
    for nu in [0.1, 1.0] {
        for vstar in [0.0, 0.3, 1.0] {
            let inst = assemble_stokes(&grid, nu, vstar).unwrap();
            assert!((inst.c_h - 1.0).abs() < 1e-12);
            let rep = verify_stokes_bounds(&inst, &opts(100), &CheckConfig::default()).unwrap();
            assert!(rep.report.passed(), "{:?}", rep.report.failures());
            let gamma = 0.5 * rep.rows[0].lower;
            let below = common::count_below(inst.bs.as_mat(), gamma);
            for row in &rep.rows {
                assert!((row.lower - nu * laplace_1d(16, row.k)).abs() < 1e-10 * row.lower);
                assert!((row.upper - row.lower - vstar * vstar / nu).abs() < 1e-10 * row.upper);
                // an independent inertia count for the value itself
                let oracle = common::bisect_eigenvalue(&inst.bs, below + row.k - 1);
                assert!((oracle - row.value).abs() < 1e-9 * row.value);
            }
            if vstar == 0.0 {
                assert!(rep.rows.iter().all(|r| (r.value - r.lower).abs() < 1e-10 * r.lower));
            }
        }
    }
}

#[test]
fn negative_spectrum_accumulates_in_the_predicted_window() {
    let (nu, vstar) = (0.5, 1.0);
    let inst = assemble_stokes(&Grid::new(1, 24).unwrap(), nu, vstar).unwrap();
    let rep = verify_stokes_bounds(&inst, &StokesOptions { minimax: None, ..StokesOptions::default() }, &CheckConfig::default()).unwrap();
    let neg = &rep.negative;
    assert_eq!(neg.accumulation, [-2.0, -1.0]);
    assert!(neg.count > 0);
    assert!(neg.min >= -vstar * vstar / nu - 1e-9, "{neg:?}");
    assert_eq!(neg.bins.iter().map(|b| b.2).sum::<usize>(), neg.count);
}

#[test]
fn two_d_discrete_divergence_constant() {
    for p in [4, 6] {
        let inst = assemble_stokes(&Grid::new(2, p).unwrap(), 1.0, 0.5).unwrap();
        let c = measure_div_constant(&inst).unwrap();
        assert!((c - inst.c_h).abs() < 1e-10);
        assert!(c > 1.0 && c <= 2.0 + 1e-12, "c_h = {c}");
    }
}

#[test]
fn two_d_first_eigenvalue_converges_at_second_order() {
    let levels: Vec<(f64, f64)> = [5, 9, 13]
        .iter()
        .map(|&p| {
            let inst = assemble_stokes(&Grid::new(2, p).unwrap(), 1.0, 0.0).unwrap();
            (inst.grid.h, inst.reference_eigenvalues().unwrap()[0])
        })
        .collect();
    let orders = convergence_orders(&levels, 2.0 * PI * PI);
    assert!(orders.iter().all(|&o| (o - 2.0).abs() < 0.1), "{orders:?}");
}

#[test]
fn continuity_in_the_coupling_strength() {
    let r = check_vstar_continuity(&Grid::new(1, 12).unwrap(), 1.0, &[0.0, 0.1, 0.2, 0.3, 0.4], 4, &CheckConfig::default()).unwrap();
    assert!(r.passed(), "{:?}", r.failures());
}

#[test]
fn budget_and_grid_errors() {
    let g = Grid::new(2, 30).unwrap();
    assert_eq!(g.system_size(), 2700);
    assert!(matches!(g.check_budget(2000), Err(Error::BudgetExceeded { size: 2700, cap: 2000 })));
    assert!(Grid::new(3, 4).is_err());
    assert!(Grid::new(1, 1).is_err());
}

#[test]
fn csv_table_shape() {
    let inst = assemble_stokes(&Grid::new(1, 8).unwrap(), 1.0, 0.3).unwrap();
    let rep = verify_stokes_bounds(&inst, &StokesOptions { minimax: None, ..StokesOptions::default() }, &CheckConfig::default()).unwrap();
    let csv = rows_to_csv(&rep.rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,lower,value,upper");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
}
