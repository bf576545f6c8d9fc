//! Hypothesis checkers and conclusion verifiers.
//!
//! Every checker first evaluates the hypotheses of its statement. Conclusions
//! are only evaluated when all hypotheses hold; otherwise they are recorded
//! as not applicable.

mod bounded;
mod principles;
mod heinz;
mod specrad;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::minimax::{MinimaxConfig, MinimaxEngine, MinimaxReport};
use crate::spectral::SpectralSplit;
use crate::symmat::SymMatrix;
use crate::tolerance::Tolerances;

pub use self::bounded::{check_cor_2_3, check_cor_2_4, check_prop_2_1, check_prop_2_5, upper_part};
pub use self::principles::{
    check_negativity, check_thm_1_2, check_thm_1_3, check_thm_1_4, check_thm_1_5, default_form_grid,
    lipschitz_violation,
};
pub use self::heinz::{check_heinz, HeinzReport, HeinzRow};
pub use self::specrad::{check_gls_conditions, check_specrad, GlsReport, SpecRadReport};

pub const DEFAULT_K_MAX: usize = 5;
/// `b` used to certify "infinitesimal" and other finite-dimensionally void
/// relative bounds.
pub const DEFAULT_SMALL_B: f64 = 1e-3;
/// `b` for the form bound of off-diagonal form perturbations.
pub const DEFAULT_FORM_B: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub tol: Tolerances,
    pub minimax: MinimaxConfig,
    pub k_max: usize,
    pub small_b: f64,
    pub form_b: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            minimax: MinimaxConfig::default(),
            k_max: DEFAULT_K_MAX,
            small_b: DEFAULT_SMALL_B,
            form_b: DEFAULT_FORM_B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub margin: f64,
}

/// `holds` is `None` when the conclusion was not evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub name: String,
    pub holds: Option<bool>,
    pub residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub na: usize,
}

impl Tally {
    pub fn add(&mut self, other: Tally) {
        self.pass += other.pass;
        self.fail += other.fail;
        self.na += other.na;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusions: Vec<Conclusion>,
    pub minimax: Vec<MinimaxReport>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn new(theorem: impl Into<String>) -> Self {
        Self {
            theorem: theorem.into(),
            hypotheses: Vec::new(),
            conclusions: Vec::new(),
            minimax: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn hypothesis(&mut self, name: impl Into<String>, holds: bool, margin: f64) -> bool {
        self.hypotheses.push(Hypothesis {
            name: name.into(),
            holds,
            margin,
        });
        holds
    }

    pub fn applicable(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }

    /// Records `residual ≤ tol`, or not-applicable when a hypothesis failed.
    pub fn conclude(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        let holds = self.applicable().then_some(residual <= tol);
        self.conclusions.push(Conclusion {
            name: name.into(),
            holds,
            residual,
            tol,
        });
    }

    /// Records a conclusion whose truth is decided by the caller.
    pub fn conclude_bool(&mut self, name: impl Into<String>, holds: bool, residual: f64, tol: f64) {
        let holds = self.applicable().then_some(holds);
        self.conclusions.push(Conclusion {
            name: name.into(),
            holds,
            residual,
            tol,
        });
    }

    pub fn not_applicable(&mut self, name: impl Into<String>) {
        self.conclusions.push(Conclusion {
            name: name.into(),
            holds: None,
            residual: f64::NAN,
            tol: f64::NAN,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Imports another report as a proof route: its hypotheses become
    /// conclusions of this one, since they are claimed to follow.
    pub fn absorb(&mut self, prefix: &str, other: TheoremReport) {
        for h in other.hypotheses {
            self.conclude_bool(format!("{prefix}:{}", h.name), h.holds, -h.margin, 0.0);
        }
        for c in other.conclusions {
            let holds = if self.applicable() { c.holds } else { None };
            self.conclusions.push(Conclusion {
                name: format!("{prefix}:{}", c.name),
                holds,
                residual: c.residual,
                tol: c.tol,
            });
        }
        self.minimax.extend(other.minimax);
        self.notes
            .extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
    }

    pub fn tally(&self) -> Tally {
        let mut t = Tally::default();
        for c in &self.conclusions {
            match c.holds {
                Some(true) => t.pass += 1,
                Some(false) => t.fail += 1,
                None => t.na += 1,
            }
        }
        t
    }

    pub fn passed(&self) -> bool {
        self.tally().fail == 0
    }

    pub fn failures(&self) -> Vec<&Conclusion> {
        self.conclusions
            .iter()
            .filter(|c| c.holds == Some(false))
            .collect()
    }
}

/// Runs the minimax identity for `k = 1..=k_limit` and records one
/// attainment, one lower-bound and (if evaluated) one form-path conclusion
/// per `k`. Returns the reports.
pub(crate) fn minimax_suite(
    report: &mut TheoremReport,
    b: &SymMatrix,
    split_a: &SpectralSplit,
    split_b: &SpectralSplit,
    k_limit: usize,
    cfg: &CheckConfig,
) -> Result<Vec<MinimaxReport>> {
    let names = |k: usize| {
        [
            format!("minimax_attained[k={k}]"),
            format!("minimax_lower[k={k}]"),
            format!("form_path[k={k}]"),
        ]
    };
    if !report.applicable() {
        for k in 1..=k_limit {
            for name in names(k) {
                report.not_applicable(name);
            }
        }
        return Ok(Vec::new());
    }
    let engine = MinimaxEngine::new(b, split_a, split_b, &cfg.minimax, &cfg.tol)?;
    let k_limit = k_limit.min(engine.max_k());
    let mut out = Vec::with_capacity(k_limit);
    for k in 1..=k_limit {
        let r = engine.verify(k, &cfg.minimax)?;
        let [attained, lower, form] = names(k);
        report.conclude(attained, (r.attained() - r.direct).abs(), r.mm_tol);
        report.conclude(lower, r.direct - r.probe_min, r.mm_tol);
        if let Some(res) = r.form_residual() {
            report.conclude(form, res, r.form_tol);
        }
        out.push(r);
    }
    report.minimax.extend(out.iter().cloned());
    Ok(out)
}

/// Number of eigenvalues `≥ threshold − tol`.
pub(crate) fn count_at_least(values: &[f64], threshold: f64, tol: f64) -> usize {
    values.iter().filter(|&&l| l >= threshold - tol).count()
}

/// Largest penetration of an eigenvalue into the open interval `(lo, hi)`.
pub(crate) fn penetration(values: &[f64], lo: f64, hi: f64) -> f64 {
    values
        .iter()
        .filter(|&&l| l > lo && l < hi)
        .map(|&l| (l - lo).min(hi - l))
        .fold(0.0, f64::max)
}
