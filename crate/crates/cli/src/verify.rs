use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use gapmm::generate::{batch, Instance, InstanceKind};
use gapmm::report::RunReport;
use gapmm::theorems::{
    check_cor_2_4, check_prop_2_1, check_prop_2_5, check_thm_1_2, check_thm_1_3, check_thm_1_4, check_thm_1_5,
    CheckConfig, TheoremReport,
};
use gapmm::Error;
use serde::Serialize;

use crate::files::{read_instances, write_output};
use crate::{parse_kind, CheckArgs, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Theorem {
    #[value(name = "thm1.2")]
    #[serde(rename = "thm1.2")]
    Thm12,
    #[value(name = "thm1.3")]
    #[serde(rename = "thm1.3")]
    Thm13,
    #[value(name = "thm1.4")]
    #[serde(rename = "thm1.4")]
    Thm14,
    #[value(name = "thm1.5")]
    #[serde(rename = "thm1.5")]
    Thm15,
    #[value(name = "prop2.1")]
    #[serde(rename = "prop2.1")]
    Prop21,
    #[value(name = "prop2.5")]
    #[serde(rename = "prop2.5")]
    Prop25,
    #[value(name = "cor2.4")]
    #[serde(rename = "cor2.4")]
    Cor24,
}

impl Theorem {
    /// Instance kind generated for `--batch` when `--kind` is absent.
    pub fn default_kind(self) -> InstanceKind {
        match self {
            Theorem::Thm12 | Theorem::Prop21 | Theorem::Cor24 => InstanceKind::BoundedPert,
            Theorem::Thm13 => InstanceKind::Semibounded,
            Theorem::Thm14 => InstanceKind::OffdiagOp,
            Theorem::Thm15 => InstanceKind::OffdiagForm,
            Theorem::Prop25 => InstanceKind::UnboundedStyle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long = "thm", value_enum)]
    theorem: Theorem,
    /// Instance directory, or a directory of instance directories.
    #[arg(long = "in", conflicts_with = "batch", required_unless_present = "batch")]
    input: Option<PathBuf>,
    /// Generate this many instances instead of reading files.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<InstanceKind>,
    /// Dimension range `lo:hi` for generated batches.
    #[arg(long, value_parser = parse_dims, default_value = "20:60")]
    dims: (usize, usize),
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    check: CheckArgs,
    /// Report path; standard output when absent.
    #[arg(long = "json", alias = "out")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    theorem: Theorem,
    source: String,
    kind: Option<&'a str>,
    dims: Option<(usize, usize)>,
    check: &'a CheckConfig,
    format: Format,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected `lo:hi`")?;
    let lo: usize = lo.parse().map_err(|_| format!("invalid dimension `{lo}`"))?;
    let hi: usize = hi.parse().map_err(|_| format!("invalid dimension `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

pub fn unit_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

pub fn check(theorem: Theorem, inst: &Instance, cfg: &CheckConfig) -> gapmm::Result<TheoremReport> {
    let (a, v) = (&inst.a, &inst.v);
    match theorem {
        Theorem::Thm12 => check_thm_1_2(a, v, inst.gamma, cfg),
        Theorem::Thm13 => check_thm_1_3(a, &inst.b(), inst.gamma, inst.branch, cfg),
        Theorem::Thm14 => check_thm_1_4(a, v, inst.gamma, None, cfg),
        Theorem::Thm15 => check_thm_1_5(a, v, inst.gamma, inst.branch, None, cfg),
        Theorem::Prop21 => check_prop_2_1(a, v, inst.c, inst.d, cfg),
        Theorem::Prop25 => check_prop_2_5(a, v, inst.c, inst.d, inst.branch, cfg),
        Theorem::Cor24 => check_cor_2_4(a, v, inst.c, inst.d, &unit_grid(21), cfg),
    }
}

/// Checker errors that mean the instance does not satisfy the setting of the
/// statement become a failed hypothesis instead of aborting the run.
pub fn gate(theorem: Theorem, result: gapmm::Result<TheoremReport>) -> gapmm::Result<TheoremReport> {
    match result {
        Err(e @ (Error::InsideSpectrum { .. }
        | Error::GapTooClose { .. }
        | Error::GraphUndefined { .. }
        | Error::NotBijective { .. })) => {
            let mut r = TheoremReport::new(serde_json::to_value(theorem).unwrap().as_str().unwrap());
            r.hypothesis("setting", false, f64::NAN);
            r.note(format!("not applicable: {e}"));
            Ok(r)
        }
        other => other,
    }
}

/// Runs `f` over `items` on all available cores; results keep the input order.
pub fn fan_out<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

/// One row per hypothesis and conclusion.
pub fn report_csv(report: &RunReport) -> String {
    let mut s = String::from("id,kind,theorem,entry,name,holds,value\n");
    for i in &report.instances {
        let prefix = format!("{},{},{}", csv_field(&i.id), i.kind, i.theorem);
        for h in &i.hypotheses {
            s.push_str(&format!("{prefix},hypothesis,{},{},{}\n", csv_field(&h.name), h.holds, number(h.margin)));
        }
        for c in &i.conclusions {
            let holds = c.holds.map_or("na".to_string(), |b| b.to_string());
            s.push_str(&format!("{prefix},conclusion,{},{holds},{}\n", csv_field(&c.name), number(c.residual)));
        }
    }
    s
}

pub fn emit(report: &RunReport, format: Format, output: Option<&std::path::Path>) -> Result<ExitCode, Failure> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report_csv(report),
    };
    write_output(output, &text)?;
    let t = report.summary;
    eprintln!(
        "{} instances ({} gated): {} pass, {} fail, {} not applicable",
        report.instances.len(),
        report.gated(),
        t.pass,
        t.fail,
        t.na
    );
    Ok(ExitCode::from(report.exit_code() as u8))
}

pub fn run(args: &VerifyArgs) -> Result<ExitCode, Failure> {
    let cfg = args.check.config(args.seed);
    let kind = args.kind.unwrap_or(args.theorem.default_kind());
    let (instances, source) = match (&args.input, args.batch) {
        (Some(dir), _) => (read_instances(dir)?, dir.display().to_string()),
        (None, Some(n)) => (batch(kind, n, args.dims, args.seed)?, format!("batch:{n}")),
        (None, None) => unreachable!("clap requires one of --in and --batch"),
    };
    let kind_name = kind.name();
    let config = RunConfig {
        command: "verify",
        theorem: args.theorem,
        source,
        kind: args.input.is_none().then_some(kind_name),
        dims: args.input.is_none().then_some(args.dims),
        check: &cfg,
        format: args.format,
    };
    let results = fan_out(&instances, |inst| gate(args.theorem, check(args.theorem, inst, &cfg)));
    let mut report = RunReport::new(args.seed, serde_json::to_value(&config).expect("config serializes"));
    for (inst, r) in instances.iter().zip(results) {
        report.push(inst.id.clone(), inst.kind.name(), r.map_err(|e| Failure::Usage(format!("{}: {e}", inst.id)))?);
    }
    emit(&report, args.format, args.output.as_deref())
}
