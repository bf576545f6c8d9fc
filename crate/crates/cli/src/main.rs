//! `gapmm`: generate instances, run the theorem suites, Stokes ladders and
//! parameter sweeps.
//!
//! Exit codes: 0 when every applicable conclusion holds, 1 when one fails,
//! 2 on usage, parse or I/O errors.

mod files;
mod stokes;
mod sweep;
mod verify;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapmm::generate::InstanceKind;
use gapmm::minimax::MinimaxConfig;
use gapmm::perturb::Branch;
use gapmm::theorems::CheckConfig;
use gapmm::Tolerances;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<gapmm::Error> for Failure {
    fn from(e: gapmm::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "gapmm", version, about = "Minimax principles for eigenvalues in spectral gaps, checked on matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files.
    Gen(GenArgs),
    /// Run a theorem suite over instance files or a generated batch.
    Verify(verify::VerifyArgs),
    /// Eigenvalue bounds for the discrete Stokes operator on a refinement ladder.
    Stokes(stokes::StokesArgs),
    /// Eigenvalue curves of A + tV and the Lipschitz estimates along them.
    Sweep(sweep::SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Lower,
    Upper,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: InstanceKind,
    #[arg(long, default_value_t = 20)]
    dim: usize,
    /// Spectral gap `c,d`.
    #[arg(long, value_parser = parse_gap, default_value = "-1,1")]
    gap: (f64, f64),
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Multiplies the perturbation size.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Lower)]
    branch: BranchArg,
    /// Number of instances; more than one writes a subdirectory per instance.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Options shared by the checking commands.
#[derive(Args, Clone)]
pub struct CheckArgs {
    /// Random subspace probes per (instance, k).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "kmax")]
    pub k_max: Option<usize>,
    /// Sets every conclusion tolerance to this value; hypothesis gates keep their defaults.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl CheckArgs {
    pub fn config(&self, seed: u64) -> CheckConfig {
        let mut cfg = CheckConfig {
            tol: match self.tol {
                Some(t) => Tolerances::from_env().with_conclusions(t),
                None => Tolerances::from_env(),
            },
            minimax: MinimaxConfig {
                seed,
                ..MinimaxConfig::default()
            },
            ..CheckConfig::default()
        };
        if let Some(t) = self.trials {
            cfg.minimax.trials = t;
        }
        if let Some(k) = self.k_max {
            cfg.k_max = k;
        }
        cfg
    }
}

pub fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    s.parse().map_err(|e: gapmm::Error| e.to_string())
}

fn parse_gap(s: &str) -> Result<(f64, f64), String> {
    let (c, d) = s.split_once(',').ok_or("expected `c,d`")?;
    let c: f64 = c.trim().parse().map_err(|_| format!("invalid number `{c}`"))?;
    let d: f64 = d.trim().parse().map_err(|_| format!("invalid number `{d}`"))?;
    if !(c < d) {
        return Err(format!("empty gap ({c}, {d})"));
    }
    Ok((c, d))
}

fn gen(args: &GenArgs) -> Result<ExitCode, Failure> {
    use gapmm::generate::{generate, InstanceSpec};
    use gapmm::rng::child_seed;
    if args.count == 0 {
        return Err(Failure::Usage("--count must be positive".into()));
    }
    for i in 0..args.count {
        let seed = if args.count == 1 { args.seed } else { child_seed(args.seed, 0, i as u64) };
        let spec = InstanceSpec {
            c: args.gap.0,
            d: args.gap.1,
            scale: args.scale,
            branch: match args.branch {
                BranchArg::Lower => Branch::Lower,
                BranchArg::Upper => Branch::Upper,
            },
            ..InstanceSpec::new(args.kind, args.dim, seed)
        };
        let inst = generate(&spec)?;
        let dir = if args.count == 1 {
            args.out.clone()
        } else {
            args.out.join(format!("{i:04}"))
        };
        files::write_instance(&dir, &inst)?;
        eprintln!("wrote {} to {}", inst.id, dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify::run(a),
        Command::Stokes(a) => stokes::run(a),
        Command::Sweep(a) => sweep::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
