//! Finite-dimensional laboratory for minimax characterizations of
//! eigenvalues in spectral gaps.
//!
//! A symmetric matrix `A` split at a point `γ` in a spectral gap defines
//! projectors `P₊`, `P₋`. For a perturbed matrix `B` with projectors `Q₊`,
//! `Q₋` the eigenvalues of `B` above the gap can, under suitable
//! hypotheses, be written as an inf–sup over subspaces of `Ran P₊`
//! augmented by the whole of `Ran P₋`. This crate evaluates both sides of
//! such identities, checks the hypotheses and the accompanying quantitative
//! bounds, and reports margins and residuals.

pub mod error;
pub mod frame;
pub mod generate;
pub mod minimax;
pub mod perturb;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stokes;
pub mod symmat;
pub mod theorems;
pub mod tolerance;

pub use error::{Error, Result};
pub use symmat::{Mat, SymMatrix, Vector};
pub use tolerance::Tolerances;
