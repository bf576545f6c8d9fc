//! Dense real symmetric matrices: eigendecomposition, functional calculus,
//! norms, Loewner-order checks and quadratic forms.

mod io;
mod jacobi;

pub use io::{format_matrix, parse_matrix};
pub use jacobi::{JACOBI_MAX_SWEEPS, JACOBI_REL_THRESHOLD};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular dense matrix.
pub type Mat = DMatrix<f64>;
/// Dense column vector.
pub type Vector = DVector<f64>;

/// Dense real symmetric matrix, the finite-dimensional stand-in for a
/// self-adjoint operator.
///
/// Symmetry is exact: the constructor averages `(i,j)` and `(j,i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Mat);

impl SymMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes a square matrix without checks.
    pub(crate) fn symmetrized(mut m: Mat) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        Self(m)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Mat::from_fn(n, n, f))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Self::new(Mat::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&Vector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_dim(self.n(), other.n())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_dim(self.n(), other.n())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn scale(&self, t: f64) -> SymMatrix {
        Self(&self.0 * t)
    }

    /// `M − γ·I`.
    pub fn shift(&self, gamma: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..self.n() {
            m[(i, i)] -= gamma;
        }
        Self(m)
    }

    /// `Wᵀ·M·W`, symmetrized.
    pub fn congruence(&self, w: &Mat) -> Result<SymMatrix> {
        check_dim(self.n(), w.nrows())?;
        Ok(Self::symmetrized(w.transpose() * (&self.0 * w)))
    }

    /// `xᵀ·M·y`.
    pub fn bilinear(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        check_dim(self.n(), y.len())?;
        Ok(x.dot(&(&self.0 * y)))
    }

    pub fn quadratic(&self, x: &Vector) -> Result<f64> {
        self.bilinear(x, x)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Spectral norm `max |λᵢ|`.
    pub fn norm(&self) -> f64 {
        match self.eigenvalues() {
            Ok(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Err(_) => spectral_norm(&self.0),
        }
    }

    /// Eigendecomposition by cyclic Jacobi.
    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_sym(self)
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigvals_sym(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("n >= 1"))
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl std::ops::Mul<&Vector> for &SymMatrix {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        &self.0 * rhs
    }
}

impl std::ops::Mul<&Mat> for &SymMatrix {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        &self.0 * rhs
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Which symmetric eigensolver to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenSolver {
    Jacobi,
    /// Householder tridiagonalization with implicit QR (nalgebra).
    Tridiagonal,
}

/// Dimension above which [`eig_sym`] switches from Jacobi to the tridiagonal solver.
pub const JACOBI_MAX_DIM: usize = 192;
const QR_MAX_ITER_PER_VALUE: usize = 60;

/// Eigenvalues in nondecreasing order with the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: Mat,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `Q·diag(f(λᵢ))·Qᵀ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fv = f(lam);
            if !fv.is_finite() {
                return Err(Error::DomainError { value: lam });
            }
            scaled.column_mut(j).scale_mut(fv);
        }
        Ok(SymMatrix::symmetrized(scaled * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.apply(|x| x).expect("eigenvalues are finite")
    }

    /// `‖QᵀQ − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        orthonormality_defect(&self.vectors)
    }

    /// `‖QΛQᵀ − M‖` (spectral norm).
    pub fn residual(&self, m: &SymMatrix) -> f64 {
        spectral_norm(&(self.reconstruct().0 - &m.0))
    }

    /// Columns whose eigenvalue satisfies `pred`, in eigenvalue order.
    pub fn columns_where(&self, pred: impl Fn(f64) -> bool) -> Mat {
        let idx: Vec<usize> = (0..self.n()).filter(|&i| pred(self.values[i])).collect();
        self.vectors.select_columns(&idx)
    }
}

fn to_row_major_buffer(m: &SymMatrix) -> Vec<f64> {
    // symmetric, so column-major storage doubles as row-major
    m.0.as_slice().to_vec()
}

fn sort_pairs(values: Vec<f64>, vectors_row_major: Vec<f64>, n: usize) -> EigenDecomposition {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| vectors_row_major[r * n + order[c]]);
    EigenDecomposition {
        values: sorted_values,
        vectors,
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Cyclic Jacobi up to [`JACOBI_MAX_DIM`], tridiagonal QR above it.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let solver = if m.n() <= JACOBI_MAX_DIM {
        EigenSolver::Jacobi
    } else {
        EigenSolver::Tridiagonal
    };
    eig_sym_with(m, solver)
}

pub fn eig_sym_with(m: &SymMatrix, solver: EigenSolver) -> Result<EigenDecomposition> {
    let n = m.n();
    match solver {
        EigenSolver::Jacobi => {
            let mut a = to_row_major_buffer(m);
            let mut v = vec![0.0; n * n];
            jacobi::jacobi_in_place(&mut a, &mut v, n)?;
            let values = (0..n).map(|i| a[i * n + i]).collect();
            Ok(sort_pairs(values, v, n))
        }
        EigenSolver::Tridiagonal => {
            let e = nalgebra::SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, QR_MAX_ITER_PER_VALUE * n.max(1))
                .ok_or(Error::IterationLimit {
                    sweeps: QR_MAX_ITER_PER_VALUE * n.max(1),
                })?;
            // column-major eigenvectors, read back row-major
            let vectors: Vec<f64> = e.eigenvectors.transpose().as_slice().to_vec();
            Ok(sort_pairs(e.eigenvalues.as_slice().to_vec(), vectors, n))
        }
    }
}

/// Eigenvalues only, nondecreasing.
pub fn eigvals_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    if m.n() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = m.0.symmetric_eigenvalues().as_slice().to_vec();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `Q·diag(f(λᵢ))·Qᵀ`; fails with `DomainError` where `f` is not finite.
pub fn apply_fn(m: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    eig_sym(m)?.apply(f)
}

/// Largest singular value, via the eigenvalues of `MᵀM` (or `MMᵀ`, whichever is smaller).
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.ncols() <= m.nrows() {
        m.transpose() * m
    } else {
        m * m.transpose()
    };
    let gram = SymMatrix::symmetrized(gram);
    let lam = eigvals_sym(&gram)
        .map(|v| *v.last().expect("nonempty"))
        .unwrap_or_else(|_| {
            eig_sym_with(&gram, EigenSolver::Jacobi)
                .map(|e| *e.values.last().expect("nonempty"))
                .unwrap_or(f64::NAN)
        });
    lam.max(0.0).sqrt()
}

/// `‖WᵀW − I‖_max`.
pub fn orthonormality_defect(w: &Mat) -> f64 {
    let g = w.transpose() * w;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Outcome of a Loewner-order check `L ⪯ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub holds: bool,
    /// `λ_min(R − L)`.
    pub margin: f64,
}

/// Checks `L ⪯ R` in the sense of quadratic forms.
pub fn psd_leq(left: &SymMatrix, right: &SymMatrix, tol: f64) -> Result<Dominance> {
    let margin = right.sub(left)?.min_eigenvalue()?;
    Ok(Dominance {
        holds: margin >= -tol,
        margin,
    })
}

/// The form `b[x,y] = ⟨|B|^{1/2}x, sign(B)|B|^{1/2}y⟩` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub generator: SymMatrix,
    pub half: SymMatrix,
    pub signop: SymMatrix,
}

impl QuadraticForm {
    pub fn new(generator: SymMatrix) -> Result<Self> {
        let eig = generator.eig()?;
        Self::from_eig(generator, &eig)
    }

    /// Reuses an eigendecomposition of `generator`.
    pub fn from_eig(generator: SymMatrix, eig: &EigenDecomposition) -> Result<Self> {
        check_dim(generator.n(), eig.n())?;
        let half = eig.apply(|t| t.abs().sqrt())?;
        let signop = eig.apply(sign)?;
        Ok(Self {
            generator,
            half,
            signop,
        })
    }

    pub fn n(&self) -> usize {
        self.generator.n()
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        check_dim(self.n(), y.len())?;
        let hx = &self.half * x;
        let hy = &self.half * y;
        Ok(hx.dot(&(&self.signop * &hy)))
    }

    /// Matrix of the form in the standard basis, `|B|^{1/2}·sign(B)·|B|^{1/2}`.
    pub fn gram(&self) -> Mat {
        self.half.as_mat() * (self.signop.as_mat() * self.half.as_mat())
    }
}

/// Functional-calculus sign with `sign(0) = 0`.
pub fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn form_eval(form: &QuadraticForm, x: &Vector, y: &Vector) -> Result<f64> {
    form.eval(x, y)
}

/// Residuals of the form-sum identities over all standard basis pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormSumReport {
    /// `max |(Λ+K)[x,y] − Λ[x,y] − ⟨x,Ky⟩|`.
    pub operator_residual: f64,
    /// `max |(Λ+K)[x,y] − Λ[x,y] − K[x,y]|`.
    pub form_residual: f64,
    /// `1 + ‖Λ‖ + ‖K‖`.
    pub scale: f64,
}

pub fn check_form_sum(lambda: &SymMatrix, k: &SymMatrix) -> Result<FormSumReport> {
    check_dim(lambda.n(), k.n())?;
    let sum = QuadraticForm::new(lambda.add(k)?)?.gram();
    let base = QuadraticForm::new(lambda.clone())?.gram();
    let pert = QuadraticForm::new(k.clone())?.gram();
    let op = (&sum - &base) - k.as_mat();
    let form = (&sum - &base) - &pert;
    Ok(FormSumReport {
        operator_residual: op.amax(),
        form_residual: form.amax(),
        scale: 1.0 + lambda.norm() + k.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let m = SymMatrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let e = m.eig().unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn identity_eigenvectors_are_permutation() {
        let e = SymMatrix::identity(4).eig().unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
        for j in 0..4 {
            let col = e.vectors.column(j);
            assert_eq!(col.iter().filter(|x| x.abs() == 1.0).count(), 1);
        }
    }

    #[test]
    fn symmetrizes_by_averaging() {
        let m = SymMatrix::from_row_slice(2, &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn rejects_empty_and_rectangular() {
        assert!(SymMatrix::new(Mat::zeros(0, 0)).is_err());
        assert!(matches!(
            SymMatrix::new(Mat::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sign_and_sqrt() {
        let m = SymMatrix::from_diagonal(&[2.0, -3.0]).unwrap();
        let s = apply_fn(&m, sign).unwrap();
        assert_eq!(s, SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap());
        let r = apply_fn(&SymMatrix::from_diagonal(&[4.0, 9.0]).unwrap(), f64::sqrt).unwrap();
        assert!(approx(r.get(0, 0), 2.0, 1e-15) && approx(r.get(1, 1), 3.0, 1e-15));
    }

    #[test]
    fn sqrt_of_negative_is_domain_error() {
        let m = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(apply_fn(&m, f64::sqrt), Err(Error::DomainError { value }) if value == -1.0));
    }

    #[test]
    fn norms() {
        let m = SymMatrix::from_diagonal(&[1.0, -5.0]).unwrap();
        assert!(approx(spectral_norm(m.as_mat()), 5.0, 1e-14));
        assert!(approx(m.norm(), 5.0, 0.0));
        assert_eq!(spectral_norm(&Mat::zeros(3, 2)), 0.0);
    }

    #[test]
    fn psd_order_basic() {
        let z = SymMatrix::zeros(3);
        let i = SymMatrix::identity(3);
        let d = psd_leq(&z, &i, 0.0).unwrap();
        assert!(d.holds && approx(d.margin, 1.0, 1e-15));
        let d = psd_leq(&i, &z, 0.0).unwrap();
        assert!(!d.holds && approx(d.margin, -1.0, 1e-15));
        assert!(psd_leq(&z, &SymMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn form_on_indefinite_diagonal() {
        let f = QuadraticForm::new(SymMatrix::from_diagonal(&[4.0, -1.0]).unwrap()).unwrap();
        let e1 = Vector::from_column_slice(&[1.0, 0.0]);
        let e2 = Vector::from_column_slice(&[0.0, 1.0]);
        assert!(approx(f.eval(&e1, &e1).unwrap(), 4.0, 1e-14));
        assert!(approx(f.eval(&e2, &e2).unwrap(), -1.0, 1e-14));
        assert!(f.eval(&Vector::zeros(3), &e1).is_err());
    }

    #[test]
    fn form_sum_zero_perturbation() {
        let l = SymMatrix::from_diagonal(&[1.0, -2.0, 0.5]).unwrap();
        let r = check_form_sum(&l, &SymMatrix::zeros(3)).unwrap();
        assert!(r.operator_residual < 1e-15 && r.form_residual < 1e-15);
    }

    #[test]
    fn form_sum_two_by_two() {
        // Λ + K = diag(1.5, -0.5): every form is diagonal, so both identities
        // reduce to 1.5 = 1 + 0.5 and -0.5 = -1 + 0.5.
        let l = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        let k = SymMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let r = check_form_sum(&l, &k).unwrap();
        assert!(r.operator_residual <= 1e-10);
        assert!(r.form_residual <= 1e-10);
    }

    #[test]
    fn tridiagonal_and_jacobi_agree() {
        let m = SymMatrix::from_fn(7, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0 + (i + j) as f64 * 0.1)
            .unwrap();
        let a = eig_sym_with(&m, EigenSolver::Jacobi).unwrap();
        let b = eig_sym_with(&m, EigenSolver::Tridiagonal).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(approx(*x, *y, 1e-12));
        }
        assert!(b.residual(&m) < 1e-12 * (1.0 + m.norm()));
        assert!(b.orthogonality_defect() < 1e-12);
    }
}
