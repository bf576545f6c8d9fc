//! Python bindings. Matrices cross the boundary as lists of rows (any
//! nested sequence of floats, e.g. a numpy array via `.tolist()`); reports
//! come back as plain dicts built from their JSON form.

use std::collections::BTreeMap;

use gapmm::generate::{batch as gen_batch, generate as gen_one, Instance as CoreInstance, InstanceKind, InstanceSpec};
use gapmm::minimax::{verify_minimax, MinimaxConfig};
use gapmm::perturb::Branch;
use gapmm::stokes::{assemble_stokes, verify_stokes_bounds, Grid, StokesOptions};
use gapmm::symmat::{check_form_sum, format_matrix, parse_matrix};
use gapmm::theorems::{
    check_cor_2_4, check_heinz, check_prop_2_1, check_prop_2_5, check_thm_1_2, check_thm_1_3, check_thm_1_4,
    check_thm_1_5, CheckConfig,
};
use gapmm::{Mat, SymMatrix, Tolerances};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_mat(rows: &[Vec<f64>]) -> PyResult<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(err("rows have different lengths"));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn to_sym(rows: &[Vec<f64>]) -> PyResult<SymMatrix> {
    SymMatrix::new(to_mat(rows)?).map_err(err)
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Serializes through JSON into Python builtins.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_branch(s: &str) -> PyResult<Branch> {
    match s {
        "lower" => Ok(Branch::Lower),
        "upper" => Ok(Branch::Upper),
        _ => Err(err(format!("unknown branch `{s}` (lower | upper)"))),
    }
}

fn config(trials: usize, k_max: usize, seed: u64) -> CheckConfig {
    let mut cfg = CheckConfig {
        tol: Tolerances::from_env(),
        k_max,
        ..CheckConfig::default()
    };
    cfg.minimax.trials = trials;
    cfg.minimax.seed = seed;
    cfg
}

/// A reference matrix `a`, a perturbation `v`, the gap `(c, d)` and the split point.
#[pyclass(name = "Instance", frozen)]
struct PyInstance(CoreInstance);

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (a, v, gamma, c, d, kind = "offdiag-op", branch = "lower"))]
    fn new(a: Vec<Vec<f64>>, v: Vec<Vec<f64>>, gamma: f64, c: f64, d: f64, kind: &str, branch: &str) -> PyResult<Self> {
        let a = to_sym(&a)?;
        let v = to_sym(&v)?;
        if a.n() != v.n() {
            return Err(err(format!("a is {0}x{0} but v is {1}x{1}", a.n(), v.n())));
        }
        let kind: InstanceKind = kind.parse().map_err(err)?;
        Ok(Self(CoreInstance {
            id: format!("{kind}-user"),
            kind,
            a,
            v,
            c,
            d,
            gamma,
            branch: parse_branch(branch)?,
            seed: 0,
            margins: BTreeMap::new(),
        }))
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.clone()
    }
    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind.name()
    }
    #[getter]
    fn dim(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        rows(self.0.a.as_mat())
    }
    #[getter]
    fn v(&self) -> Vec<Vec<f64>> {
        rows(self.0.v.as_mat())
    }
    /// `a + v`.
    #[getter]
    fn b(&self) -> Vec<Vec<f64>> {
        rows(self.0.b().as_mat())
    }
    #[getter]
    fn gap(&self) -> (f64, f64) {
        (self.0.c, self.0.d)
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[getter]
    fn margins(&self) -> BTreeMap<String, f64> {
        self.0.margins.clone()
    }

    /// Manifest and both matrices in the text format used by the CLI.
    fn to_files(&self) -> PyResult<(String, String, String)> {
        let manifest = serde_json::to_string_pretty(&self.0.manifest()).map_err(err)?;
        Ok((manifest, format_matrix(&self.0.a), format_matrix(&self.0.v)))
    }

    fn __repr__(&self) -> String {
        format!("Instance(id={:?}, dim={}, gap=({}, {}), gamma={})", self.0.id, self.0.n(), self.0.c, self.0.d, self.0.gamma)
    }
}

/// One generated instance.
#[pyfunction]
#[pyo3(signature = (kind, dim, seed, c = -1.0, d = 1.0, scale = 1.0, branch = "lower"))]
fn generate(kind: &str, dim: usize, seed: u64, c: f64, d: f64, scale: f64, branch: &str) -> PyResult<PyInstance> {
    let spec = InstanceSpec {
        c,
        d,
        scale,
        branch: parse_branch(branch)?,
        ..InstanceSpec::new(kind.parse().map_err(err)?, dim, seed)
    };
    gen_one(&spec).map(PyInstance).map_err(err)
}

/// `count` seeded instances with dimensions in `dims`.
#[pyfunction]
#[pyo3(signature = (kind, count, seed, dims = (20, 60)))]
fn batch(kind: &str, count: usize, seed: u64, dims: (usize, usize)) -> PyResult<Vec<PyInstance>> {
    let kind: InstanceKind = kind.parse().map_err(err)?;
    Ok(gen_batch(kind, count, dims, seed).map_err(err)?.into_iter().map(PyInstance).collect())
}

/// Runs one theorem checker; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (theorem, instance, trials = 500, k_max = 5, seed = 0))]
fn check<'py>(
    py: Python<'py>,
    theorem: &str,
    instance: &PyInstance,
    trials: usize,
    k_max: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(trials, k_max, seed);
    let inst = &instance.0;
    let (a, v) = (&inst.a, &inst.v);
    let report = py
        .detach(|| match theorem {
            "thm1.2" => Ok(check_thm_1_2(a, v, inst.gamma, &cfg)),
            "thm1.3" => Ok(check_thm_1_3(a, &inst.b(), inst.gamma, inst.branch, &cfg)),
            "thm1.4" => Ok(check_thm_1_4(a, v, inst.gamma, None, &cfg)),
            "thm1.5" => Ok(check_thm_1_5(a, v, inst.gamma, inst.branch, None, &cfg)),
            "prop2.1" => Ok(check_prop_2_1(a, v, inst.c, inst.d, &cfg)),
            "prop2.5" => Ok(check_prop_2_5(a, v, inst.c, inst.d, inst.branch, &cfg)),
            "cor2.4" => {
                let grid: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
                Ok(check_cor_2_4(a, v, inst.c, inst.d, &grid, &cfg))
            }
            other => Err(format!("unknown theorem `{other}`")),
        })
        .map_err(err)?
        .map_err(err)?;
    let out = to_py(py, &report)?;
    out.set_item("passed", report.passed())?;
    out.set_item("applicable", report.applicable())?;
    Ok(out)
}

/// Minimax value of the `k`-th eigenvalue of `b` above `gamma`, relative to the split of `a`.
#[pyfunction]
#[pyo3(signature = (a, b, gamma, k, trials = 500, seed = 0))]
fn minimax<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    gamma: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (a, b) = (to_sym(&a)?, to_sym(&b)?);
    let cfg = MinimaxConfig {
        trials,
        seed,
        ..MinimaxConfig::default()
    };
    let report = py
        .detach(|| verify_minimax(&a, &b, gamma, k, &cfg, &Tolerances::from_env()))
        .map_err(err)?;
    let out = to_py(py, &report)?;
    out.set_item("attained", report.attained())?;
    Ok(out)
}

/// Ascending eigenvalues of a symmetric matrix.
#[pyfunction]
fn eigvals(m: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    to_sym(&m)?.eigenvalues().map_err(err)
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (as columns).
#[pyfunction]
fn eig(m: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = to_sym(&m)?.eig().map_err(err)?;
    Ok((e.values.clone(), rows(&e.vectors)))
}

/// Parses the plain-text matrix format.
#[pyfunction]
fn read_matrix(text: &str) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(parse_matrix(text).map_err(err)?.as_mat()))
}

#[pyfunction]
fn write_matrix(m: Vec<Vec<f64>>) -> PyResult<String> {
    Ok(format_matrix(&to_sym(&m)?))
}

/// Two-sided eigenvalue bounds for the discrete Stokes operator.
#[pyfunction]
#[pyo3(signature = (dim, points, nu = 1.0, vstar = 0.3, k_max = 6, trials = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn stokes<'py>(
    py: Python<'py>,
    dim: usize,
    points: usize,
    nu: f64,
    vstar: f64,
    k_max: usize,
    trials: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| {
            let grid = Grid::new(dim, points)?;
            grid.check_budget(gapmm::stokes::DEFAULT_BUDGET)?;
            let inst = assemble_stokes(&grid, nu, vstar)?;
            let opts = StokesOptions {
                k_max,
                minimax: trials.map(|t| MinimaxConfig {
                    trials: t,
                    seed,
                    ..MinimaxConfig::default()
                }),
                samples: 32,
                seed,
            };
            verify_stokes_bounds(&inst, &opts, &config(trials.unwrap_or(0), k_max, seed))
        })
        .map_err(err)?;
    let out = to_py(py, &report)?;
    out.set_item("passed", report.report.passed())?;
    Ok(out)
}

/// `‖Λ₂^ν S Λ₁^{−ν}‖` against `C^ν ‖S‖^{1−ν}` on a grid of exponents.
#[pyfunction]
#[pyo3(signature = (lambda1, lambda2, s, nu_grid = None))]
fn heinz<'py>(
    py: Python<'py>,
    lambda1: Vec<Vec<f64>>,
    lambda2: Vec<Vec<f64>>,
    s: Vec<Vec<f64>>,
    nu_grid: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = nu_grid.unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect());
    let r = check_heinz(&to_sym(&lambda1)?, &to_sym(&lambda2)?, &to_mat(&s)?, &grid, &Tolerances::from_env())
        .map_err(err)?;
    let out = to_py(py, &r)?;
    out.set_item("passed", r.passed())?;
    Ok(out)
}

/// Residuals of the form-sum identity for `Λ` positive definite and `K` symmetric.
#[pyfunction]
fn form_sum<'py>(py: Python<'py>, lam: Vec<Vec<f64>>, k: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let r = check_form_sum(&to_sym(&lam)?, &to_sym(&k)?).map_err(err)?;
    to_py(py, &r)
}

/// Default tolerances, scaled by `GAPMM_TOL_SCALE` when set.
#[pyfunction]
fn tolerances(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &Tolerances::from_env())
}

#[pymodule]
fn gapmm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", gapmm::report::VERSION)?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(batch, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(minimax, m)?)?;
    m.add_function(wrap_pyfunction!(eigvals, m)?)?;
    m.add_function(wrap_pyfunction!(eig, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(stokes, m)?)?;
    m.add_function(wrap_pyfunction!(heinz, m)?)?;
    m.add_function(wrap_pyfunction!(form_sum, m)?)?;
    m.add_function(wrap_pyfunction!(tolerances, m)?)?;
    Ok(())
}
