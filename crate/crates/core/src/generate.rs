//! Random instances that meet a chosen theorem's hypotheses by construction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{gaussian, haar_frame};
use crate::perturb::{best_form_bound, form_bound_interval, split_pos_neg, Branch};
use crate::rng::{child_seed, from_seed, Rng};
use crate::spectral::split;
use crate::stokes::{assemble_stokes, Grid};
use crate::symmat::{Mat, SymMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    BoundedPert,
    OffdiagOp,
    OffdiagForm,
    UnboundedStyle,
    Semibounded,
    Stokes,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 6] = [
        InstanceKind::BoundedPert,
        InstanceKind::OffdiagOp,
        InstanceKind::OffdiagForm,
        InstanceKind::UnboundedStyle,
        InstanceKind::Semibounded,
        InstanceKind::Stokes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::BoundedPert => "bounded-pert",
            InstanceKind::OffdiagOp => "offdiag-op",
            InstanceKind::OffdiagForm => "offdiag-form",
            InstanceKind::UnboundedStyle => "unbounded-style",
            InstanceKind::Semibounded => "semibounded",
            InstanceKind::Stokes => "stokes",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown instance kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub dim: usize,
    pub c: f64,
    pub d: f64,
    /// Multiplies the perturbation size drawn by the recipe.
    pub scale: f64,
    pub branch: Branch,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, dim: usize, seed: u64) -> Self {
        Self {
            kind,
            dim,
            c: -1.0,
            d: 1.0,
            scale: 1.0,
            branch: Branch::Lower,
            seed,
        }
    }
}

/// A reference matrix `A`, a perturbation `V` and the split data.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub kind: InstanceKind,
    pub a: SymMatrix,
    pub v: SymMatrix,
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub branch: Branch,
    pub seed: u64,
    /// Hypothesis margins recorded by the generator.
    pub margins: BTreeMap<String, f64>,
}

impl Instance {
    pub fn b(&self) -> SymMatrix {
        self.a.add(&self.v).expect("same dimension")
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }
}

/// JSON manifest written next to the matrix files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub kind: InstanceKind,
    pub dim: usize,
    pub gap: [f64; 2],
    pub gamma: f64,
    pub branch: Branch,
    pub seed: u64,
    pub margins: BTreeMap<String, f64>,
}

impl Instance {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            id: self.id.clone(),
            kind: self.kind,
            dim: self.n(),
            gap: [self.c, self.d],
            gamma: self.gamma,
            branch: self.branch,
            seed: self.seed,
            margins: self.margins.clone(),
        }
    }

    pub fn from_parts(manifest: Manifest, a: SymMatrix, v: SymMatrix) -> Result<Self> {
        crate::symmat::check_dim(a.n(), v.n())?;
        Ok(Self {
            id: manifest.id,
            kind: manifest.kind,
            a,
            v,
            c: manifest.gap[0],
            d: manifest.gap[1],
            gamma: manifest.gamma,
            branch: manifest.branch,
            seed: manifest.seed,
            margins: manifest.margins,
        })
    }
}

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn with_basis(rng: &mut Rng, eigenvalues: &[f64]) -> SymMatrix {
    let n = eigenvalues.len();
    let q = haar_frame(rng, n, n);
    let d = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues));
    SymMatrix::symmetrized(&q * d * q.transpose())
}

fn random_symmetric(rng: &mut Rng, n: usize) -> SymMatrix {
    let g = gaussian(rng, n, n);
    SymMatrix::symmetrized(&g + g.transpose())
}

/// Eigenvalues of `A`: `c` and `d` themselves plus uniform draws from
/// `[c − w, c]` and `[d, d + w]`, or a quadratic ladder above `d` when
/// `ladder` is set. The upper branch mirrors the picture.
fn reference_spectrum(rng: &mut Rng, n: usize, c: f64, d: f64, branch: Branch, ladder: bool) -> Vec<f64> {
    let w = 2.0 * (d - c);
    let lo = (n / 3).max(1);
    let hi = (2 * n / 3).max(lo + 1).min(n - 1);
    let below = rng.random_range(lo..=hi);
    let above = n - below;
    let mut values = Vec::with_capacity(n);
    // "near" is the side adjacent to c for the lower branch
    let (near_count, far_count) = match branch {
        Branch::Lower => (below, above),
        Branch::Upper => (above, below),
    };
    let (near_edge, far_edge, dir) = match branch {
        Branch::Lower => (c, d, 1.0),
        Branch::Upper => (d, c, -1.0),
    };
    values.push(near_edge);
    for _ in 1..near_count {
        values.push(near_edge - dir * uniform(rng, 0.0, w));
    }
    values.push(far_edge);
    for j in 1..far_count {
        let step = if ladder {
            (d - c) * 0.25 * ((j + 1) * (j + 1)) as f64 * uniform(rng, 0.8, 1.2)
        } else {
            uniform(rng, 0.0, w)
        };
        values.push(far_edge + dir * step);
    }
    values
}

/// Indefinite `V` with `‖Vp‖ + ‖Vn‖ = θ(d − c)`.
fn bounded_perturbation(rng: &mut Rng, n: usize, width: f64, theta: f64) -> SymMatrix {
    let share = uniform(rng, 0.2, 0.8);
    let (p, q) = (theta * width * share, theta * width * (1.0 - share));
    let mut ev: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    ev[0] = 1.0;
    ev[1] = -1.0;
    let scaled: Vec<f64> = ev.iter().map(|&t| if t >= 0.0 { t * p } else { t * q }).collect();
    with_basis(rng, &scaled)
}

fn off_diagonal(rng: &mut Rng, a: &SymMatrix, gamma: f64, norm: f64) -> Result<SymMatrix> {
    let s = split(a, gamma, &Tolerances::default())?;
    let w = gaussian(rng, s.dim_plus(), s.dim_minus());
    let half = &s.basis_p * w * s.basis_m.transpose();
    let off = SymMatrix::symmetrized(&half + half.transpose());
    let current = off.norm();
    Ok(off.scale(norm / current))
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    let n = spec.dim;
    if n < 4 {
        return Err(Error::InvalidArgument(format!("dimension {n} too small (need ≥ 4)")));
    }
    let (c, d) = (spec.c, spec.d);
    if !(c < d) || !c.is_finite() || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid gap ({c}, {d})")));
    }
    let width = d - c;
    let mut rng = from_seed(spec.seed);
    let mut margins = BTreeMap::new();
    let branch = spec.branch;
    let mid = 0.5 * (c + d);

    let (a, v, gamma) = match spec.kind {
        InstanceKind::BoundedPert => {
            let spectrum = reference_spectrum(&mut rng, n, c, d, branch, false);
            let a = with_basis(&mut rng, &spectrum);
            let theta = (uniform(&mut rng, 0.3, 0.9) * spec.scale).min(0.95);
            let v = bounded_perturbation(&mut rng, n, width, theta);
            let (vp, vn) = split_pos_neg(&v)?;
            let (np, nn) = (vp.norm(), vn.norm());
            margins.insert("norm_condition".into(), width - np - nn);
            let gamma = 0.5 * ((c + np) + (d - nn));
            (a, v, gamma)
        }
        InstanceKind::OffdiagOp | InstanceKind::OffdiagForm => {
            let spectrum = reference_spectrum(&mut rng, n, c, d, branch, false);
            let a = with_basis(&mut rng, &spectrum);
            let norm = uniform(&mut rng, 0.1, 2.0) * width * spec.scale;
            let v = off_diagonal(&mut rng, &a, mid, norm)?;
            margins.insert("offdiag_norm".into(), norm);
            (a, v, mid)
        }
        InstanceKind::Semibounded => {
            let spectrum = reference_spectrum(&mut rng, n, c, d, branch, false);
            let a = with_basis(&mut rng, &spectrum);
            let s = split(&a, mid, &Tolerances::default())?;
            let off_norm = uniform(&mut rng, 0.1, 1.5) * width * spec.scale;
            let off = off_diagonal(&mut rng, &a, mid, off_norm)?;
            // diagonal blocks keep each side of the split on its side of mid
            let kp = s.dim_plus();
            let km = s.dim_minus();
            let ep: Vec<f64> = (0..kp).map(|_| uniform(&mut rng, -0.2, 1.0) * 0.4 * width).collect();
            let em: Vec<f64> = (0..km).map(|_| -uniform(&mut rng, -0.2, 1.0) * 0.4 * width).collect();
            let qp = haar_frame(&mut rng, kp, kp);
            let qm = haar_frame(&mut rng, km, km);
            let dp = &s.basis_p * &qp * Mat::from_diagonal(&ep.into()) * qp.transpose() * s.basis_p.transpose();
            let dm = &s.basis_m * &qm * Mat::from_diagonal(&em.into()) * qm.transpose() * s.basis_m.transpose();
            let v = off.add(&SymMatrix::symmetrized(dp + dm))?;
            margins.insert("diagonal_separation".into(), 0.2 * width);
            (a, v, mid)
        }
        InstanceKind::UnboundedStyle => {
            let spectrum = reference_spectrum(&mut rng, n, c, d, branch, true);
            let a = with_basis(&mut rng, &spectrum);
            // V = t·S^{1/2} R S^{1/2}, S = |A − mid| + I, ‖R‖ = 1
            let s_half = a.eig()?.apply(|l| ((l - mid).abs() + 1.0).sqrt())?;
            let r = random_symmetric(&mut rng, n);
            let r = r.scale(1.0 / r.norm());
            let shape = SymMatrix::symmetrized(s_half.as_mat() * r.as_mat() * s_half.as_mat());
            let mut t = uniform(&mut rng, 0.1, 0.4) * spec.scale;
            let mut best = best_form_bound(&shape.scale(t), &a, branch, c, d)?;
            let mut guard = 0;
            while best.1 <= 0.05 * width && guard < 60 {
                t *= 0.7;
                best = best_form_bound(&shape.scale(t), &a, branch, c, d)?;
                guard += 1;
            }
            let v = shape.scale(t);
            let (bound, margin) = best;
            margins.insert("unbounded_condition".into(), margin);
            margins.insert("b".into(), bound.b);
            margins.insert("a".into(), bound.a_signed());
            let (lo, hi) = form_bound_interval(&bound, c, d);
            (a, v, 0.5 * (lo + hi))
        }
        InstanceKind::Stokes => {
            let points = (n / 2).max(2);
            let nu = uniform(&mut rng, 0.1, 1.0);
            let vstar = uniform(&mut rng, 0.0, 1.0) * spec.scale;
            let inst = assemble_stokes(&Grid::new(1, points)?, nu, vstar)?;
            let a = inst.reference();
            let v = inst.coupling();
            margins.insert("nu".into(), nu);
            margins.insert("vstar".into(), vstar);
            let gamma = inst.split_point()?;
            let id = format!("{}-{:016x}", spec.kind, spec.seed);
            let lam1 = 2.0 * gamma;
            return Ok(Instance {
                id,
                kind: spec.kind,
                a,
                v,
                c: 0.0,
                d: lam1,
                gamma,
                branch: Branch::Lower,
                seed: spec.seed,
                margins,
            });
        }
    };

    Ok(Instance {
        id: format!("{}-{:016x}", spec.kind, spec.seed),
        kind: spec.kind,
        a,
        v,
        c,
        d,
        gamma,
        branch,
        seed: spec.seed,
        margins,
    })
}

/// `count` instances of `kind` with dimensions drawn from `dims`, all seeds
/// derived from `master`.
pub fn batch(kind: InstanceKind, count: usize, dims: (usize, usize), master: u64) -> Result<Vec<Instance>> {
    let mut sizes = from_seed(child_seed(master, 100 + kind.stream(), 0));
    (0..count)
        .map(|i| {
            let seed = child_seed(master, kind.stream(), i as u64);
            let mut spec = InstanceSpec::new(kind, sizes.random_range(dims.0..=dims.1), seed);
            if matches!(kind, InstanceKind::OffdiagForm | InstanceKind::UnboundedStyle | InstanceKind::Semibounded)
                && i % 2 == 1
            {
                spec.branch = Branch::Upper;
            }
            generate(&spec)
        })
        .collect()
}

/// `V₀ ≤ V₁`, both within the bounded-perturbation norm condition.
pub fn ordered_pair(rng: &mut Rng, n: usize, width: f64) -> (SymMatrix, SymMatrix) {
    let theta = uniform(rng, 0.2, 0.6);
    let v0 = bounded_perturbation(rng, n, width, theta);
    let rank = rng.random_range(1..=n.min(4));
    let g = gaussian(rng, n, rank);
    let e = SymMatrix::symmetrized(&g * g.transpose());
    let e = e.scale(uniform(rng, 0.0, 0.3) * width / e.norm());
    let v1 = v0.add(&e).expect("same dimension");
    (v0, v1)
}

/// A reference matrix with gap `(c, d)`, exposed for callers composing their own perturbations.
pub fn reference_matrix(rng: &mut Rng, n: usize, c: f64, d: f64, branch: Branch) -> SymMatrix {
    let spectrum = reference_spectrum(rng, n, c, d, branch, false);
    with_basis(rng, &spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::diagonal_block_norms;

    #[test]
    fn kinds_round_trip() {
        for k in InstanceKind::ALL {
            assert_eq!(k.name().parse::<InstanceKind>().unwrap(), k);
        }
        assert!("nope".parse::<InstanceKind>().is_err());
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = InstanceSpec::new(InstanceKind::BoundedPert, 20, 1);
        let x = generate(&spec).unwrap();
        let y = generate(&spec).unwrap();
        assert_eq!(x.a, y.a);
        assert_eq!(x.v, y.v);
        assert!(x.margins["norm_condition"] > 0.0);
    }

    #[test]
    fn offdiag_instances_have_zero_diagonal_blocks() {
        let inst = generate(&InstanceSpec::new(InstanceKind::OffdiagOp, 12, 5)).unwrap();
        let s = split(&inst.a, inst.gamma, &Tolerances::default()).unwrap();
        let (pp, mm) = diagonal_block_norms(&inst.v, &s);
        assert!(pp < 1e-14 && mm < 1e-14, "{pp} {mm}");
    }

    #[test]
    fn gap_is_exact() {
        let inst = generate(&InstanceSpec::new(InstanceKind::OffdiagForm, 10, 9)).unwrap();
        let g = crate::spectral::find_gap(&inst.a, inst.gamma, &Tolerances::default()).unwrap();
        assert!((g.c - inst.c).abs() < 1e-12 && (g.d - inst.d).abs() < 1e-12);
    }
}
