use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use gapmm::generate::{Instance, InstanceKind};
use gapmm::perturb::split_pos_neg;
use gapmm::report::RunReport;
use gapmm::theorems::{check_cor_2_4, check_thm_1_4, check_thm_1_5, upper_part, CheckConfig, TheoremReport};
use serde::Serialize;

use crate::files::{read_instance, write_output};
use crate::verify::{emit, gate, Format, Theorem};
use crate::{CheckArgs, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SweepTheorem {
    /// Bounded perturbations, constant ‖V‖, t in [0, 1].
    #[value(name = "cor2.4")]
    #[serde(rename = "cor2.4")]
    Cor24,
    /// Off-diagonal operator perturbations, constant ‖V‖, any t.
    #[value(name = "thm1.4")]
    #[serde(rename = "thm1.4")]
    Thm14,
    /// Off-diagonal form perturbations, local estimate for b|t| < 1.
    #[value(name = "thm1.5")]
    #[serde(rename = "thm1.5")]
    Thm15,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Instance directory.
    #[arg(long = "in")]
    input: PathBuf,
    /// Parameter grid `a:b:steps` (endpoints included).
    #[arg(long, value_parser = parse_range, default_value = "0:1:21", allow_hyphen_values = true)]
    t: TGrid,
    /// Defaults to the estimate matching the instance kind.
    #[arg(long = "thm", value_enum)]
    theorem: Option<SweepTheorem>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    check: CheckArgs,
    /// Curves `t,k,lambda`; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Lipschitz report.
    #[arg(long = "json")]
    output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct TGrid(Vec<f64>);

fn parse_range(s: &str) -> Result<TGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, steps] = parts.as_slice() else {
        return Err("expected `a:b:steps`".into());
    };
    let a: f64 = a.parse().map_err(|_| format!("invalid number `{a}`"))?;
    let b: f64 = b.parse().map_err(|_| format!("invalid number `{b}`"))?;
    let steps: usize = steps.parse().map_err(|_| format!("invalid step count `{steps}`"))?;
    match steps {
        0 => Err("step count must be positive".into()),
        1 => Ok(TGrid(vec![a])),
        n => Ok(TGrid((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())),
    }
}

fn default_theorem(kind: InstanceKind) -> SweepTheorem {
    match kind {
        InstanceKind::BoundedPert => SweepTheorem::Cor24,
        InstanceKind::OffdiagOp => SweepTheorem::Thm14,
        _ => SweepTheorem::Thm15,
    }
}

/// Split point of `A + tV`.
fn gamma_at(thm: SweepTheorem, inst: &Instance, t: f64) -> gapmm::Result<f64> {
    Ok(match thm {
        SweepTheorem::Cor24 => {
            let (vp, vn) = split_pos_neg(&inst.v)?;
            0.5 * (inst.c + t * vp.norm() + inst.d - t * vn.norm())
        }
        _ => inst.gamma,
    })
}

fn admissible(thm: SweepTheorem, t: f64, cfg: &CheckConfig) -> bool {
    match thm {
        SweepTheorem::Cor24 => (0.0..=1.0).contains(&t),
        SweepTheorem::Thm14 => true,
        SweepTheorem::Thm15 => cfg.form_b * t.abs() < 1.0,
    }
}

/// Largest `|λ_k(t) − λ_k(s)|/|t − s|` over consecutive grid points.
fn max_quotient(curves: &[(f64, Vec<f64>)], k_max: usize) -> f64 {
    curves
        .windows(2)
        .flat_map(|w| {
            let dt = (w[1].0 - w[0].0).abs();
            (0..k_max.min(w[0].1.len()).min(w[1].1.len())).map(move |k| (w[1].1[k] - w[0].1[k]).abs() / dt)
        })
        .fold(0.0, f64::max)
}

pub fn run(args: &SweepArgs) -> Result<ExitCode, Failure> {
    let cfg = args.check.config(args.seed);
    let inst = read_instance(&args.input)?;
    let thm = args.theorem.unwrap_or(default_theorem(inst.kind));
    let (grid, skipped): (Vec<f64>, Vec<f64>) = args.t.0.iter().partition(|&&t| admissible(thm, t, &cfg));
    for t in &skipped {
        eprintln!("skipping t = {t}: outside the admissible range");
    }
    if grid.len() < 2 {
        return Err(Failure::Usage("fewer than two admissible grid points".into()));
    }
    let curves = grid
        .iter()
        .map(|&t| {
            let bt = inst.a.add(&inst.v.scale(t))?;
            Ok((t, upper_part(&bt, gamma_at(thm, &inst, t)?)?))
        })
        .collect::<gapmm::Result<Vec<_>>>()?;
    let mut csv = String::from("t,k,lambda\n");
    for (t, values) in &curves {
        for (k, l) in values.iter().take(cfg.k_max).enumerate() {
            csv.push_str(&format!("{t:e},{},{l:e}\n", k + 1));
        }
    }

    let result = match thm {
        SweepTheorem::Cor24 => check_cor_2_4(&inst.a, &inst.v, inst.c, inst.d, &grid, &cfg),
        SweepTheorem::Thm14 => check_thm_1_4(&inst.a, &inst.v, inst.gamma, Some(&grid), &cfg),
        SweepTheorem::Thm15 => check_thm_1_5(&inst.a, &inst.v, inst.gamma, inst.branch, Some(&grid), &cfg),
    };
    let gate_as = match thm {
        SweepTheorem::Cor24 => Theorem::Cor24,
        SweepTheorem::Thm14 => Theorem::Thm14,
        SweepTheorem::Thm15 => Theorem::Thm15,
    };
    let mut report: TheoremReport = gate(gate_as, result)?;
    let q = max_quotient(&curves, cfg.k_max);
    let norm_v = inst.v.norm();
    report.note(format!("max difference quotient {q:e}; ‖V‖ = {norm_v:e}"));
    for t in &skipped {
        report.note(format!("skipped t = {t}"));
    }
    eprintln!("max difference quotient {q:.6e} (‖V‖ = {norm_v:.6e})");

    write_output(args.csv.as_deref(), &csv)?;
    let config = serde_json::json!({
        "command": "sweep",
        "theorem": thm,
        "input": args.input.display().to_string(),
        "t": args.t.0,
        "check": cfg,
    });
    let mut run = RunReport::new(args.seed, config);
    run.push(inst.id.clone(), inst.kind.name(), report);
    match &args.output {
        Some(path) => emit(&run, Format::Json, Some(path)),
        None => Ok(ExitCode::from(run.exit_code() as u8)),
    }
}
