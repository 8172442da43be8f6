//! Python bindings. Structured inputs and outputs (domains, problem specs,
//! reports) cross the boundary as plain dicts through their JSON form.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use liouville_core::comparison::{bubble_pair, BubbleParam};
use liouville_core::field::ScalarField;
use liouville_core::geometry::{build_refined, DomainSpec, Mesh};
use liouville_core::problems::{DiscreteProblem, ProblemSpec};
use liouville_core::solver::{
    multi_start_on, start_field, DiscreteOperator, MultiStartConfig, NewtonConfig, SolveResult, StartKind,
};
use liouville_core::verify::{self, Region, Suite, SuiteConfig};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(err)
}

/// A triangulation of a planar domain.
#[pyclass(name = "Mesh", module = "liouville", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: Arc<Mesh>,
}

#[pymethods]
impl PyMesh {
    /// Meshes `domain` (a dict such as `{"kind": "disk", "radius": 2.0}`;
    /// default the unit disk) at target size `h`, then refines uniformly.
    #[new]
    #[pyo3(signature = (domain=None, h=0.1, refinements=0))]
    fn new(domain: Option<&Bound<'_, PyAny>>, h: f64, refinements: usize) -> PyResult<Self> {
        let spec: DomainSpec = match domain {
            Some(d) => from_py(d)?,
            None => DomainSpec::unit_disk(),
        };
        let mesh = build_refined(&spec, h, refinements).map_err(err)?;
        Ok(PyMesh { inner: Arc::new(mesh) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: Arc::new(Mesh::from_json(text).map_err(err)?) })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn refine(&self) -> PyResult<Self> {
        Ok(PyMesh { inner: Arc::new(self.inner.refine().map_err(err)?) })
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_triangles(&self) -> usize {
        self.inner.num_triangles()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.inner.h_max()
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|p| (p[0], p[1])).collect()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        self.inner.triangles().to_vec()
    }

    fn boundary_nodes(&self) -> Vec<usize> {
        self.inner.boundary_nodes().to_vec()
    }

    /// Discretization slack `ε_h` used to judge verdicts on this mesh.
    fn slack(&self) -> PyResult<f64> {
        verify::calibrate_slack(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(nodes={}, triangles={}, h_max={:.4})",
            self.inner.num_nodes(),
            self.inner.num_triangles(),
            self.inner.h_max()
        )
    }
}

/// Piecewise-linear nodal values on a mesh.
#[pyclass(name = "Field", module = "liouville", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(mesh: &PyMesh, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyField { inner: ScalarField::new(mesh.inner.clone(), values).map_err(err)? })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn mesh(&self) -> PyMesh {
        PyMesh { inner: self.inner.mesh().clone() }
    }

    fn eval(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.eval([x, y])
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    /// `∫ e^{scale·u}`.
    #[pyo3(signature = (scale=1.0))]
    fn weighted_mass(&self, scale: f64) -> PyResult<f64> {
        self.inner.weighted_mass(scale).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

/// The radial bubble `U_λ(r) = -2 ln(1 + λ² r² / 8) + 2 ln λ`.
#[pyclass(name = "Bubble", module = "liouville", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBubble {
    inner: BubbleParam,
}

#[pymethods]
impl PyBubble {
    #[new]
    fn new(lam: f64) -> PyResult<Self> {
        Ok(PyBubble { inner: BubbleParam::new(lam).map_err(err)? })
    }

    /// The bubble with `∫_{B_radius} e^U = mass`.
    #[staticmethod]
    fn with_mass(mass: f64, radius: f64) -> PyResult<Self> {
        Ok(PyBubble { inner: BubbleParam::with_mass(mass, radius).map_err(err)? })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    fn value(&self, r: f64) -> f64 {
        self.inner.value(r)
    }

    fn slope(&self, r: f64) -> f64 {
        self.inner.slope(r)
    }

    /// `∫_{B_r} e^U`.
    fn mass(&self, r: f64) -> f64 {
        self.inner.mass(r)
    }

    /// The other bubble taking the same value on `|x| = radius`.
    fn pair(&self, radius: f64) -> PyResult<Self> {
        Ok(PyBubble { inner: bubble_pair(self.inner.lambda(), radius).map_err(err)? })
    }

    #[pyo3(signature = (mesh, center=(0.0, 0.0)))]
    fn field(&self, mesh: &PyMesh, center: (f64, f64)) -> PyResult<PyField> {
        Ok(PyField { inner: self.inner.field(&mesh.inner, [center.0, center.1]).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Bubble(lam={})", self.inner.lambda())
    }
}

/// Result of a Newton solve.
#[pyclass(name = "Solution", module = "liouville", frozen)]
struct PySolution {
    inner: SolveResult,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn fields(&self) -> Vec<PyField> {
        self.inner.fields.iter().map(|f| PyField { inner: f.clone() }).collect()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    /// Summary dict: convergence, residual, sup norm and masses.
    fn summary(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.summary())
    }
}

fn newton_config(newton: Option<&Bound<'_, PyAny>>) -> PyResult<NewtonConfig> {
    newton.map(from_py).transpose().map(Option::unwrap_or_default)
}

/// Solves `problem` (a problem spec dict) on `mesh` by damped Newton.
///
/// `initial` holds nodal values per component; the default starts from zero
/// in the interior.
#[pyfunction]
#[pyo3(signature = (problem, mesh, initial=None, newton=None))]
fn solve(
    py: Python<'_>,
    problem: &Bound<'_, PyAny>,
    mesh: &PyMesh,
    initial: Option<Vec<Vec<f64>>>,
    newton: Option<&Bound<'_, PyAny>>,
) -> PyResult<PySolution> {
    let spec: ProblemSpec = from_py(problem)?;
    let cfg = newton_config(newton)?;
    let mesh = mesh.inner.clone();
    let result = py.detach(|| {
        let op = DiscreteOperator::assemble(mesh)?;
        let problem = DiscreteProblem::new(&spec, &op)?;
        let start = match initial {
            Some(v) => v,
            None => vec![start_field(&problem, &StartKind::Constant { value: 0.0 }); problem.components()],
        };
        problem.solve(&start, &cfg)
    });
    Ok(PySolution { inner: result.map_err(err)? })
}

fn multi_start_config(
    starts: usize,
    seed: u64,
    jobs: usize,
    newton: Option<&Bound<'_, PyAny>>,
) -> PyResult<MultiStartConfig> {
    Ok(MultiStartConfig { starts, seed, jobs, newton: newton_config(newton)?, ..MultiStartConfig::default() })
}

/// Multi-start Newton search. Returns `(solutions, starts)`: one solution per
/// cluster of converged starts, and one record dict per start.
#[pyfunction]
#[pyo3(signature = (problem, mesh, starts=20, seed=0, jobs=1, newton=None))]
fn multi_start(
    py: Python<'_>,
    problem: &Bound<'_, PyAny>,
    mesh: &PyMesh,
    starts: usize,
    seed: u64,
    jobs: usize,
    newton: Option<&Bound<'_, PyAny>>,
) -> PyResult<(Vec<PySolution>, Py<PyAny>)> {
    let spec: ProblemSpec = from_py(problem)?;
    let cfg = multi_start_config(starts, seed, jobs, newton)?;
    let mesh = mesh.inner.clone();
    let ms = py
        .detach(|| {
            let op = DiscreteOperator::assemble(mesh)?;
            multi_start_on(&DiscreteProblem::new(&spec, &op)?, &cfg)
        })
        .map_err(err)?;
    let records = to_py(py, &ms.starts)?;
    Ok((ms.clusters.into_iter().map(|c| PySolution { inner: c.solution }).collect(), records))
}

fn slack_for(mesh: &Arc<Mesh>, slack: Option<f64>) -> PyResult<f64> {
    match slack {
        Some(s) => Ok(s),
        None => verify::calibrate_slack(mesh).map_err(err),
    }
}

/// Uniqueness experiment: multi-start, then a verdict on the number of
/// admissible clusters. Returns the report dict.
#[pyfunction]
#[pyo3(signature = (problem, mesh, starts=20, seed=0, jobs=1, slack=None))]
fn uniqueness(
    py: Python<'_>,
    problem: &Bound<'_, PyAny>,
    mesh: &PyMesh,
    starts: usize,
    seed: u64,
    jobs: usize,
    slack: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let spec: ProblemSpec = from_py(problem)?;
    let cfg = multi_start_config(starts, seed, jobs, None)?;
    let slack = slack_for(&mesh.inner, slack)?;
    let mesh = mesh.inner.clone();
    let rep = py
        .detach(|| {
            let op = DiscreteOperator::assemble(mesh)?;
            verify::uniqueness_experiment(&spec, &op, &cfg, slack)
        })
        .map_err(err)?;
    to_py(py, &rep)
}

/// Bol's inequality `(∫_{∂ω} e^{u/2})² ≥ ½ (8π - ∫_ω e^u) ∫_ω e^u` on `region`
/// (a dict; default the whole mesh). Returns the report dict.
#[pyfunction]
#[pyo3(signature = (field, region=None, slack=None))]
fn bol_check(
    py: Python<'_>,
    field: &PyField,
    region: Option<&Bound<'_, PyAny>>,
    slack: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let region: Region = match region {
        Some(r) => from_py(r)?,
        None => Region::Whole,
    };
    let slack = slack_for(field.inner.mesh(), slack)?;
    let rep = verify::bol_check(&field.inner, &region, slack).map_err(err)?;
    to_py(py, &rep)
}

/// Sphere Covering Inequality for two bubbles agreeing on `|x| = radius`.
#[pyfunction]
#[pyo3(signature = (b1, b2, radius, slack=1e-10))]
fn sci_check_bubbles(py: Python<'_>, b1: &PyBubble, b2: &PyBubble, radius: f64, slack: f64) -> PyResult<Py<PyAny>> {
    let rep = verify::sci_check_bubbles(&b1.inner, &b2.inner, radius, slack).map_err(err)?;
    to_py(py, &rep)
}

/// Sphere Covering Inequality on computed fields with `Δw_i + e^{w_i} = f_i`,
/// judged on each component of `{w2 > w1}`.
#[pyfunction]
#[pyo3(signature = (w1, w2, f1, f2, slack=None))]
fn sci_check(
    py: Python<'_>,
    w1: &PyField,
    w2: &PyField,
    f1: &PyField,
    f2: &PyField,
    slack: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let slack = slack_for(w1.inner.mesh(), slack)?;
    let rep = verify::sci_check(&w1.inner, &w2.inner, &f1.inner, &f2.inner, &verify::SciRegion::Components, slack)
        .map_err(err)?;
    to_py(py, &rep)
}

/// Runs the acceptance battery and returns one outcome dict per criterion,
/// each with `pass` and the printed `line` added.
#[pyfunction]
#[pyo3(signature = (target_h=0.05, refinements=1, starts=20, seed=0, jobs=1, criteria=None))]
fn run_suite(
    py: Python<'_>,
    target_h: f64,
    refinements: usize,
    starts: usize,
    seed: u64,
    jobs: usize,
    criteria: Option<Vec<u8>>,
) -> PyResult<Py<PyAny>> {
    let cfg = SuiteConfig { target_h, refinements, starts, seed, jobs };
    let outcomes = py
        .detach(|| -> liouville_core::Result<_> {
            let suite = Suite::new(cfg)?;
            let ids: Vec<u8> = criteria.unwrap_or_else(|| verify::CRITERIA.iter().map(|c| c.0).collect());
            Ok(ids.into_iter().map(|id| suite.criterion(id)).collect::<Vec<_>>())
        })
        .map_err(err)?;
    let mut docs = Vec::new();
    for o in &outcomes {
        let mut v = serde_json::to_value(o).map_err(err)?;
        v["pass"] = o.pass().into();
        v["line"] = o.line().into();
        docs.push(v);
    }
    to_py(py, &docs)
}

#[pymodule]
fn liouville(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyBubble>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(multi_start, m)?)?;
    m.add_function(wrap_pyfunction!(uniqueness, m)?)?;
    m.add_function(wrap_pyfunction!(bol_check, m)?)?;
    m.add_function(wrap_pyfunction!(sci_check, m)?)?;
    m.add_function(wrap_pyfunction!(sci_check_bubbles, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
