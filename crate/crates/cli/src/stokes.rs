use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use gapmm::minimax::MinimaxConfig;
use gapmm::report::{RunInfo, VERSION};
use gapmm::stokes::{assemble_stokes, convergence_orders, verify_stokes_bounds, Grid, StokesOptions, StokesReport, DEFAULT_BUDGET};
use gapmm::theorems::{CheckConfig, Tally};
use serde::Serialize;

use crate::files::write_output;
use crate::{CheckArgs, Failure};

#[derive(Args)]
pub struct StokesArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Interior points per axis; a comma-separated list gives the ladder explicitly.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    points: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.3)]
    vstar: f64,
    /// Refinement levels, each halving h, when a single point count is given.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Largest admissible assembled matrix size.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Skip the minimax probes.
    #[arg(long)]
    no_minimax: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long = "json", alias = "out")]
    output: Option<PathBuf>,
    /// Bound table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct Convergence {
    exact: f64,
    /// `(h, νλ₁(L))` per level.
    lambda1: Vec<(f64, f64)>,
    orders: Vec<f64>,
}

#[derive(Serialize)]
struct StokesRun {
    run: RunInfo,
    levels: Vec<StokesReport>,
    convergence: Convergence,
    summary: Tally,
}

fn ladder(args: &StokesArgs) -> Vec<usize> {
    match args.points.as_slice() {
        [p] => (0..args.levels.max(1)).map(|i| (p + 1) * (1 << i) - 1).collect(),
        list => list.to_vec(),
    }
}

/// Probe counts shrink with the system size to keep a ladder interactive.
fn default_trials(size: usize) -> usize {
    match size {
        0..=200 => 500,
        201..=500 => 50,
        _ => 20,
    }
}

pub fn run(args: &StokesArgs) -> Result<ExitCode, Failure> {
    let cfg: CheckConfig = args.check.config(args.seed);
    let mut grids = Vec::new();
    for p in ladder(args) {
        let g = Grid::new(args.dim, p)?;
        g.check_budget(args.budget)?;
        grids.push(g);
    }
    let k_max = args.check.k_max.unwrap_or(6);
    let mut levels = Vec::new();
    let mut summary = Tally::default();
    for g in &grids {
        let inst = assemble_stokes(g, args.nu, args.vstar)?;
        let size = g.system_size();
        let minimax = (!args.no_minimax).then(|| MinimaxConfig {
            trials: args.check.trials.unwrap_or_else(|| default_trials(size)),
            form_path: size <= 500,
            ..cfg.minimax
        });
        let opts = StokesOptions {
            k_max,
            minimax,
            samples: 32,
            seed: args.seed,
        };
        let rep = verify_stokes_bounds(&inst, &opts, &cfg)?;
        summary.add(rep.report.tally());
        eprintln!(
            "points {:>3}  h {:.4}  c_h {:.4}  νλ₁(L) {:.6}  λ₁ {:.6}",
            g.points, g.h, rep.c_h, rep.rows[0].lower, rep.rows[0].value
        );
        levels.push(rep);
    }
    let exact = args.nu * args.dim as f64 * PI * PI;
    let lambda1: Vec<(f64, f64)> = levels.iter().map(|l| (l.h, l.rows[0].lower)).collect();
    let orders = convergence_orders(&lambda1, exact);
    let config = serde_json::json!({
        "command": "stokes",
        "dim": args.dim,
        "points": grids.iter().map(|g| g.points).collect::<Vec<_>>(),
        "nu": args.nu,
        "vstar": args.vstar,
        "k_max": k_max,
        "budget": args.budget,
        "minimax": !args.no_minimax,
        "check": cfg,
    });
    let out = StokesRun {
        run: RunInfo {
            seed: args.seed,
            version: VERSION.to_string(),
            config,
        },
        levels,
        convergence: Convergence { exact, lambda1, orders },
        summary,
    };
    if let Some(path) = &args.csv {
        let mut csv = String::from("points,h,c_h,k,lower,value,upper\n");
        for l in &out.levels {
            for r in &l.rows {
                csv.push_str(&format!(
                    "{},{:e},{:e},{},{:e},{:e},{:e}\n",
                    l.points, l.h, l.c_h, r.k, r.lower, r.value, r.upper
                ));
            }
        }
        write_output(Some(path), &csv)?;
    }
    let json = serde_json::to_string_pretty(&out).expect("report serializes") + "\n";
    write_output(args.output.as_deref(), &json)?;
    Ok(ExitCode::from(if summary.fail == 0 { 0 } else { 1 }))
}
