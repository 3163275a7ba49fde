//! Python bindings for the `stsm` library. Reports come back as plain
//! dictionaries with the same field names as the JSON the CLI prints.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stsm::ensemble::{self as ens, Arrangement, DistributionReport, Preparation};
use stsm::interferometer::{self as ifm, Layout, OpticalSetup, Placement, RunSummary};
use stsm::maxent::{self, DEFAULT_TOL};
use stsm::{bloch, Execution, Sign};

fn to_py(e: stsm::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_dict<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import_bound("json")?.call_method1("loads", (text,))
}

fn sign(s: &str) -> PyResult<Sign> {
    Sign::parse(s).map_err(to_py)
}

fn execution(parallel: bool) -> Execution {
    if parallel {
        Execution::Parallel
    } else {
        Execution::Serial
    }
}

fn setup(layout: &str, placement: Option<&str>) -> PyResult<OpticalSetup> {
    let layout = Layout::parse(layout).map_err(to_py)?;
    let placement = placement.map(Placement::parse).transpose().map_err(to_py)?;
    OpticalSetup::new(layout, placement).map_err(to_py)
}

/// Point on the Bloch sphere, angles in radians.
#[pyclass(name = "BlochDirection", frozen)]
#[derive(Clone, Copy)]
struct PyDirection(stsm::BlochDirection);

#[pymethods]
impl PyDirection {
    #[new]
    fn new(theta: f64, phi: f64) -> PyResult<Self> {
        stsm::BlochDirection::new(theta, phi)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_vector(x: f64, y: f64, z: f64) -> PyResult<Self> {
        stsm::BlochDirection::from_vector([x, y, z])
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi()
    }

    fn unit_vector(&self) -> (f64, f64, f64) {
        let [x, y, z] = self.0.unit_vector();
        (x, y, z)
    }

    fn angle_to(&self, other: &PyDirection) -> f64 {
        self.0.angle_to(&other.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "BlochDirection(theta={}, phi={})",
            self.0.theta(),
            self.0.phi()
        )
    }

    fn __str__(&self) -> String {
        self.0.label()
    }
}

/// Exact configuration distribution of one arrangement.
#[pyclass(name = "ConfigurationDistribution", frozen)]
struct PyDistribution(ens::ConfigurationDistribution);

#[pymethods]
impl PyDistribution {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().iter().map(|l| l.to_string()).collect()
    }

    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.0.probabilities().to_vec()
    }

    fn marginal(&self, side: usize) -> PyResult<(f64, f64)> {
        let [p, m] = self.0.marginal(side).map_err(to_py)?;
        Ok((p, m))
    }

    /// Draws runs `0..n` and returns the report with counts.
    #[pyo3(signature = (n, seed = 0, parallel = false))]
    fn sample<'py>(
        &self,
        py: Python<'py>,
        n: u64,
        seed: u64,
        parallel: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let drawn = py
            .allow_threads(|| ens::sample_with(&self.0, seed, n, execution(parallel)))
            .map_err(to_py)?;
        to_dict(
            py,
            &DistributionReport::new(&self.0).with_sample(seed, &drawn),
        )
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &DistributionReport::new(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn transition_probability(prep: &PyDirection, meas: &PyDirection, outcome: &str) -> PyResult<f64> {
    Ok(bloch::transition_probability(
        prep.0,
        meas.0,
        sign(outcome)?,
    ))
}

#[pyfunction]
fn bell_joint_probability(a: &PyDirection, b: &PyDirection, ra: &str, rb: &str) -> PyResult<f64> {
    Ok(bloch::bell_joint_probability(
        a.0,
        b.0,
        sign(ra)?,
        sign(rb)?,
    ))
}

/// Single-qubit arrangement measured along `observable`, or the Bell pair
/// measured along `(observable, second)` when `second` is given.
#[pyfunction]
#[pyo3(signature = (observable, preparation = None, prepared_sign = "+", second = None))]
fn ensemble(
    observable: &PyDirection,
    preparation: Option<&PyDirection>,
    prepared_sign: &str,
    second: Option<&PyDirection>,
) -> PyResult<PyDistribution> {
    let arrangement = match second {
        Some(b) => {
            if preparation.is_some() {
                return Err(PyValueError::new_err(
                    "a Bell arrangement takes no preparation",
                ));
            }
            Arrangement::bell(observable.0, b.0)
        }
        None => {
            let prep = preparation.map(|p| p.0).unwrap_or(stsm::BlochDirection::Z);
            Arrangement::single(Preparation::new(prep, sign(prepared_sign)?), observable.0)
        }
    };
    ens::ensemble(&arrangement)
        .map(PyDistribution)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (sigma_z, tol = DEFAULT_TOL))]
fn solve_lambda<'py>(py: Python<'py>, sigma_z: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let sol = maxent::solve_lambda(sigma_z, tol).map_err(to_py)?;
    to_dict(py, &sol)
}

#[pyfunction]
#[pyo3(signature = (sigma_z, n_theta = 64, n_phi = 8))]
fn estimate<'py>(
    py: Python<'py>,
    sigma_z: f64,
    n_theta: usize,
    n_phi: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let est = py
        .allow_threads(|| maxent::estimate(sigma_z, n_theta, n_phi))
        .map_err(to_py)?;
    to_dict(py, &est.report())
}

#[pyfunction]
#[pyo3(signature = (layout, placement = None))]
fn detector_distribution(layout: &str, placement: Option<&str>) -> PyResult<(f64, f64)> {
    let [d1, d2] = ifm::detector_distribution(&setup(layout, placement)?);
    Ok((d1, d2))
}

#[pyfunction]
#[pyo3(signature = (layout, n, placement = None, seed = 0, parallel = false))]
fn run_experiment<'py>(
    py: Python<'py>,
    layout: &str,
    n: u64,
    placement: Option<&str>,
    seed: u64,
    parallel: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let setup = setup(layout, placement)?;
    let outcome = py
        .allow_threads(|| ifm::run_experiment_with(&setup, seed, n, execution(parallel)))
        .map_err(to_py)?;
    to_dict(py, &RunSummary::new(&setup, seed, &outcome))
}

#[pyfunction]
#[pyo3(signature = (n, seed = 0, parallel = false))]
fn delayed_choice_report<'py>(
    py: Python<'py>,
    n: u64,
    seed: u64,
    parallel: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .allow_threads(|| ifm::delayed_choice_report_with(seed, n, execution(parallel)))
        .map_err(to_py)?;
    to_dict(py, &report.summary(seed))
}

#[pymodule]
fn stsm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDirection>()?;
    m.add_class::<PyDistribution>()?;
    m.add_function(wrap_pyfunction!(transition_probability, m)?)?;
    m.add_function(wrap_pyfunction!(bell_joint_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(detector_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(delayed_choice_report, m)?)?;
    Ok(())
}
