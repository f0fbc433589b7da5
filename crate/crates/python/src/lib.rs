//! Python bindings. Rationals cross the boundary as strings such as `"-3/2"`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kstab_core::cli::{self, Command, JobConfig, Options, Pipeline};
use kstab_core::geometry::{AffineForm, Polytope};
use kstab_core::invariants::{self, PLConvex};
use kstab_core::pbundle::{self, AdmissibleData, AdmissibleFactor, Positivity};
use kstab_core::rational::{fmt_rational, parse_rational, Rational};
use kstab_core::weights::WeightExpr;
use kstab_core::Error;

fn py_err(e: Error) -> PyErr {
    let msg = format!("{} error: {e}", e.module());
    if e.is_validation() {
        PyValueError::new_err(msg)
    } else {
        PyRuntimeError::new_err(msg)
    }
}

fn q(text: &str) -> PyResult<Rational> {
    parse_rational(text).map_err(py_err)
}

fn qs(texts: &[String]) -> PyResult<Vec<Rational>> {
    texts.iter().map(|t| q(t)).collect()
}

#[pyclass(name = "Polytope", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolytope {
    inner: Polytope,
}

#[pymethods]
impl PyPolytope {
    /// Polytope `{p : <n_j, p> + b_j >= 0}` from `[(normal, offset), ...]`.
    #[new]
    fn new(labels: Vec<(Vec<i64>, String)>) -> PyResult<Self> {
        let labels = labels
            .into_iter()
            .map(|(n, b)| AffineForm::new(n, q(&b)?).map_err(py_err))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: Polytope::from_halfspaces(labels).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn interval(lo: &str, hi: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Polytope::interval(q(lo)?, q(hi)?).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn cube(lo: Vec<String>, hi: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: Polytope::cube(&qs(&lo)?, &qs(&hi)?).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn vertices(&self) -> Vec<Vec<String>> {
        self.inner.vertices().iter().map(|v| v.iter().map(fmt_rational).collect()).collect()
    }

    fn lattice_count(&self, k: u64) -> usize {
        self.inner.lattice_points(k).points.len()
    }

    fn __repr__(&self) -> String {
        format!("Polytope(dim={}, labels={})", self.inner.dim(), self.inner.labels().len())
    }
}

#[pyclass(name = "Weight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeight {
    inner: WeightExpr,
}

#[pymethods]
impl PyWeight {
    #[new]
    fn new(expr: &str, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: WeightExpr::parse(expr, dim).map_err(py_err)?,
        })
    }

    fn __call__(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&p).map_err(py_err)
    }

    fn grad(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval_grad(&p).map_err(py_err)
    }

    fn hess(&self, p: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.inner.eval_hess(&p).map_err(py_err)
    }

    fn is_polynomial(&self) -> bool {
        self.inner.is_polynomial()
    }

    fn __repr__(&self) -> String {
        format!("Weight({:?})", self.inner.pretty())
    }
}

#[pyclass(name = "PLFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPL {
    inner: PLConvex,
}

#[pymethods]
impl PyPL {
    /// `max_j (<g_j, p> + b_j)` from `[(grad, offset), ...]`.
    #[new]
    fn new(pieces: Vec<(Vec<String>, String)>) -> PyResult<Self> {
        let pieces = pieces
            .into_iter()
            .map(|(g, b)| Ok((qs(&g)?, q(&b)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: PLConvex::new(pieces).map_err(py_err)?,
        })
    }

    fn __call__(&self, p: Vec<f64>) -> f64 {
        self.inner.eval(&p)
    }
}

fn default_weights(p: &Polytope, v: Option<&PyWeight>, w: Option<&PyWeight>) -> (WeightExpr, WeightExpr) {
    let one = || WeightExpr::constant(p.dim(), Rational::from_integer(1.into()));
    (v.map_or_else(one, |x| x.inner.clone()), w.map_or_else(one, |x| x.inner.clone()))
}

#[pyfunction]
#[pyo3(signature = (polytope, v=None, w=None, order=16))]
fn slope(polytope: &PyPolytope, v: Option<&PyWeight>, w: Option<&PyWeight>, order: usize) -> PyResult<f64> {
    let (v, w) = default_weights(&polytope.inner, v, w);
    invariants::slope(&polytope.inner, &v, &w, order).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (polytope, v=None, w=None))]
fn slope_exact(polytope: &PyPolytope, v: Option<&PyWeight>, w: Option<&PyWeight>) -> PyResult<String> {
    let (v, w) = default_weights(&polytope.inner, v, w);
    invariants::slope_exact(&polytope.inner, &v, &w).map(|c| fmt_rational(&c)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (polytope, f, v=None, w=None, order=16))]
fn futaki(polytope: &PyPolytope, f: &PyPL, v: Option<&PyWeight>, w: Option<&PyWeight>, order: usize) -> PyResult<f64> {
    let (v, w) = default_weights(&polytope.inner, v, w);
    let c = invariants::slope(&polytope.inner, &v, &w, order).map_err(py_err)?;
    invariants::futaki(&polytope.inner, &v, &w, &f.inner, c, order).map_err(py_err)
}

/// `(xi, c)` with `w_ext(p) = <xi, p> + c`.
#[pyfunction]
#[pyo3(signature = (polytope, v=None, w=None, order=16))]
fn w_ext(polytope: &PyPolytope, v: Option<&PyWeight>, w: Option<&PyWeight>, order: usize) -> PyResult<(Vec<f64>, f64)> {
    let (v, w) = default_weights(&polytope.inner, v, w);
    let e = invariants::solve_w_ext(&polytope.inner, &v, &w, order).map_err(py_err)?;
    Ok((e.xi, e.c))
}

#[pyclass(name = "AdmissibleBundle", frozen)]
struct PyBundle {
    inner: AdmissibleData,
}

#[pymethods]
impl PyBundle {
    /// Factors are `(d, scal, xi, c)` tuples with rational strings; `v` and
    /// `w` are weights in the variable `z`.
    #[new]
    #[pyo3(signature = (factors, v=None, w=None))]
    fn new(factors: Vec<(u32, String, String, String)>, v: Option<&PyWeight>, w: Option<&PyWeight>) -> PyResult<Self> {
        let factors = factors
            .into_iter()
            .map(|(d, scal, xi, c)| {
                Ok(AdmissibleFactor {
                    d,
                    scal: q(&scal)?,
                    xi: q(&xi)?,
                    c: q(&c)?,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        let one = || WeightExpr::constant(1, Rational::from_integer(1.into()));
        let v = v.map_or_else(one, |x| x.inner.clone());
        let w = w.map_or_else(one, |x| x.inner.clone());
        Ok(Self {
            inner: AdmissibleData::new(factors, v, w).map_err(py_err)?,
        })
    }

    /// `(A1, A2)` of the extremal affine function.
    fn extremal(&self) -> PyResult<(f64, f64)> {
        pbundle::solve_w_ext_ode(&self.inner).map_err(py_err)
    }

    /// Theta at the given points.
    fn theta(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        let (a1, a2) = pbundle::solve_w_ext_ode(&self.inner).map_err(py_err)?;
        let sol = pbundle::solve_theta(&self.inner, a1, a2).map_err(py_err)?;
        z.iter().map(|&x| sol.theta(x).map_err(py_err)).collect()
    }

    /// Exact Theta as a polynomial string (polynomial data only).
    fn theta_exact(&self) -> PyResult<String> {
        let (a1, a2) = pbundle::solve_w_ext_ode_exact(&self.inner).map_err(py_err)?;
        let sol = pbundle::solve_theta_exact(&self.inner, &a1, &a2).map_err(py_err)?;
        Ok(sol.theta_exact().map(|t| t.to_string()).unwrap_or_default())
    }

    fn futaki(&self, z0: f64) -> PyResult<f64> {
        let (a1, a2) = pbundle::solve_w_ext_ode(&self.inner).map_err(py_err)?;
        pbundle::futaki_z0(&self.inner, a1, a2, z0).map_err(py_err)
    }

    /// True when Theta is positive on (-1, 1).
    #[pyo3(signature = (exact=false))]
    fn exists(&self, exact: bool) -> PyResult<bool> {
        let sol = if exact {
            let (a1, a2) = pbundle::solve_w_ext_ode_exact(&self.inner).map_err(py_err)?;
            pbundle::solve_theta_exact(&self.inner, &a1, &a2)
        } else {
            let (a1, a2) = pbundle::solve_w_ext_ode(&self.inner).map_err(py_err)?;
            pbundle::solve_theta(&self.inner, a1, a2)
        }
        .map_err(py_err)?;
        let verdict = pbundle::check_positivity(&sol).map_err(py_err)?;
        Ok(verdict.verdict == Positivity::PositiveOnOpenInterval)
    }
}

/// Runs a CLI command on a JSON job configuration and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (command, config="{}", pipeline=None))]
fn run(command: &str, config: &str, pipeline: Option<&str>) -> PyResult<String> {
    let command = Command::from_name(command).ok_or_else(|| PyValueError::new_err(format!("unknown command `{command}`")))?;
    let pipeline = match pipeline {
        None => None,
        Some("float") => Some(Pipeline::Float),
        Some("exact") => Some(Pipeline::Exact),
        Some("both") => Some(Pipeline::Both),
        Some(other) => return Err(PyValueError::new_err(format!("unknown pipeline `{other}`"))),
    };
    let config = JobConfig::from_json(config).map_err(py_err)?;
    let opts = Options {
        pipeline,
        ..Options::default()
    };
    cli::run(command, &config, &opts).map(|r| r.to_json()).map_err(py_err)
}

#[pymodule]
fn kstab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolytope>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyPL>()?;
    m.add_class::<PyBundle>()?;
    m.add_function(wrap_pyfunction!(slope, m)?)?;
    m.add_function(wrap_pyfunction!(slope_exact, m)?)?;
    m.add_function(wrap_pyfunction!(futaki, m)?)?;
    m.add_function(wrap_pyfunction!(w_ext, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
