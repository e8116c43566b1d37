//! Python module `qcorr`: states, correlation analysis, covariance scans,
//! W filtering, postulate scenarios and work extraction.
//!
//! Structured results are returned as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use qcorr::covariance::ScanMode;
use qcorr::linalg::C64;
use qcorr::postulates::{ScenarioDocument, ScenarioJob};
use qcorr::work::{BasisSearch, ProtocolDocument, ProtocolFamily};
use qcorr::{Error, LocalObservableList, QuantumState};

create_exception!(
    qcorr,
    QcorrError,
    PyValueError,
    "Invalid input or parameter."
);
create_exception!(
    qcorr,
    DomainError,
    QcorrError,
    "Parameter outside the mathematical domain."
);
create_exception!(
    qcorr,
    SizeLimitError,
    QcorrError,
    "System too large for the requested computation."
);

fn py_err(e: Error) -> PyErr {
    if e.is_size_limit() {
        SizeLimitError::new_err(e.to_string())
    } else if e.is_domain_error() {
        DomainError::new_err(e.to_string())
    } else {
        QcorrError::new_err(e.to_string())
    }
}

trait OrPyErr<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for qcorr::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Serializes through JSON and parses with Python's `json` module.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| QcorrError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A multi-qubit density operator, dense or a sparse pure-state mixture.
#[pyclass(name = "State", module = "qcorr", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    inner: QuantumState,
}

#[pymethods]
impl PyState {
    /// Parses `w_mixture:n=3,f=0.5`, `bell:psi+*zeros:n=1` or a JSON file path.
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qcorr::parse_state_spec(spec).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (name, n, params = Vec::new()))]
    fn named(name: &str, n: usize, params: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: qcorr::make_named_state(name, n, &params).py()?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qcorr::io::state_from_json(text).py()?,
        })
    }

    /// Dense state from a `2^n x 2^n` nested list of (complex) entries.
    #[staticmethod]
    fn from_matrix(num_parties: usize, rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(QcorrError::new_err("matrix must be square"));
        }
        let m = qcorr::linalg::DMat::from_fn(d, d, |r, c| rows[r][c]);
        Ok(Self {
            inner: QuantumState::from_dense(num_parties, m).py()?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        qcorr::io::state_to_json(&self.inner).py()
    }

    fn to_matrix(&self) -> PyResult<Vec<Vec<C64>>> {
        let m = self.inner.to_dense().py()?;
        Ok((0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect())
    }

    #[getter]
    fn num_parties(&self) -> usize {
        self.inner.num_parties()
    }

    #[getter]
    fn is_dense(&self) -> bool {
        self.inner.is_dense()
    }

    fn densified(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.densified().py()?,
        })
    }

    fn tensor(&self, other: &PyState) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.tensor(&other.inner).py()?,
        })
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.partial_trace(&keep).py()?,
        })
    }

    fn entropy_bits(&self) -> PyResult<f64> {
        self.inner.entropy_bits().py()
    }

    fn trace_distance(&self, other: &PyState) -> PyResult<f64> {
        self.inner.trace_distance(&other.inner).py()
    }

    fn __repr__(&self) -> String {
        let kind = if self.inner.is_dense() {
            "dense"
        } else {
            "structured"
        };
        format!("State(num_parties={}, {kind})", self.inner.num_parties())
    }
}

/// Covariance of a Pauli string such as `"ZZZ"` (`I` allowed).
#[pyfunction]
fn covariance(state: &PyState, paulis: &str) -> PyResult<f64> {
    let obs = LocalObservableList::from_pauli_str(paulis).py()?;
    qcorr::covariance(&state.inner, &obs).py()
}

/// Covariance of every Pauli string, or of `samples` random ones.
#[pyfunction]
#[pyo3(signature = (state, samples = None, seed = 0))]
fn pauli_covariance_scan<'py>(
    py: Python<'py>,
    state: &PyState,
    samples: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match samples {
        Some(count) => ScanMode::Sampled { count, seed },
        None => ScanMode::Full,
    };
    to_python(py, &qcorr::pauli_covariance_scan(&state.inner, mode).py()?)
}

/// `(<sigma_z>, Cov(sigma_z, ..., sigma_z))` for `F|W><W| + (1-F)|W-bar><W-bar|`.
#[pyfunction]
fn wmix_closed_form(n: usize, fidelity: f64) -> PyResult<(f64, f64)> {
    let r = qcorr::wmix_closed_form(n, fidelity).py()?;
    Ok((r.mean_sigma_z, r.cov_zz))
}

#[pyfunction]
#[pyo3(signature = (state, tol = qcorr::cuts::PRODUCT_TOL))]
fn degree_of_correlations(state: &PyState, tol: f64) -> PyResult<usize> {
    qcorr::degree_of_correlations(&state.inner, tol).py()
}

#[pyfunction]
#[pyo3(signature = (state, tol = qcorr::cuts::PRODUCT_TOL))]
fn has_genuine_correlations(state: &PyState, tol: f64) -> PyResult<bool> {
    qcorr::has_genuine_correlations(&state.inner, tol).py()
}

/// Finest tensor factorization as a list of party lists.
#[pyfunction]
#[pyo3(signature = (state, tol = qcorr::cuts::PRODUCT_TOL))]
fn factorize(state: &PyState, tol: f64) -> PyResult<Vec<Vec<usize>>> {
    Ok(qcorr::factorize(&state.inner, tol).py()?.partition())
}

#[pyfunction]
#[pyo3(signature = (state, tol = qcorr::cuts::PRODUCT_TOL))]
fn analyze<'py>(py: Python<'py>, state: &PyState, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &qcorr::cuts::analyze(&state.inner, tol).py()?)
}

/// Applies the local W filter on every party and keeps the success branch.
/// Returns `(state, probability, fidelity_with_W or None)`.
#[pyfunction]
fn distill(state: &PyState, epsilon: f64) -> PyResult<(PyState, f64, Option<f64>)> {
    let r = qcorr::distill(&state.inner, epsilon).py()?;
    Ok((
        PyState {
            inner: r.post_state,
        },
        r.success_probability,
        r.fidelity,
    ))
}

/// `(q, F)` for the equal W/W-bar mixture.
#[pyfunction]
fn closed_forms(n: usize, epsilon: f64) -> PyResult<(f64, f64)> {
    let r = qcorr::closed_forms(n, epsilon).py()?;
    Ok((r.success_probability, r.fidelity))
}

#[pyfunction]
fn q_of_fidelity(n: usize, fidelity: f64) -> PyResult<f64> {
    qcorr::q_of_fidelity(n, fidelity).py()
}

fn families(measuring: Option<usize>) -> Vec<ProtocolFamily> {
    match measuring {
        Some(m) => vec![ProtocolFamily::MeasureBroadcast { measuring: Some(m) }],
        None => vec![
            ProtocolFamily::AllComputational,
            ProtocolFamily::MeasureBroadcast { measuring: None },
        ],
    }
}

/// Best work over the built-in protocol families.
#[pyfunction]
#[pyo3(signature = (state, measuring = None))]
fn best_work<'py>(
    py: Python<'py>,
    state: &PyState,
    measuring: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let r =
        qcorr::work::best_work(&state.inner, &families(measuring), &BasisSearch::default()).py()?;
    to_python(py, &r)
}

#[pyfunction]
fn delta_w<'py>(py: Python<'py>, state: &PyState) -> PyResult<Bound<'py, PyAny>> {
    let r = qcorr::delta_w_estimate(&state.inner, &families(None), &BasisSearch::default()).py()?;
    to_python(py, &r)
}

/// Runs a protocol given as JSON text (`{"steps": [...], "cut": [...]}`).
#[pyfunction]
fn run_protocol<'py>(
    py: Python<'py>,
    state: &PyState,
    protocol: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let doc = ProtocolDocument::parse(protocol).py()?;
    let (p, constraint) = doc.to_protocol(state.inner.num_parties()).py()?;
    to_python(
        py,
        &qcorr::run_protocol(&state.inner, &p, &constraint).py()?,
    )
}

/// Runs a scenario given as JSON text and returns the report.
#[pyfunction]
#[pyo3(signature = (scenario, indicator = None, tol = qcorr::cuts::PRODUCT_TOL))]
fn run_scenario<'py>(
    py: Python<'py>,
    scenario: &str,
    indicator: Option<&str>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let doc = ScenarioDocument::parse(scenario).py()?;
    let name = indicator
        .map(str::to_string)
        .or_else(|| doc.indicator.clone())
        .unwrap_or_else(|| "covariance".into());
    let ind = qcorr::Indicator::by_name(&name, tol).py()?;
    match doc.into_job().py()? {
        ScenarioJob::Postulate(sc) => {
            to_python(py, &qcorr::run_postulate_scenario(&ind, &sc).py()?)
        }
        ScenarioJob::Monotonicity {
            state, instruments, ..
        } => {
            let check = qcorr::check_measure_monotonicity(
                &|s: &QuantumState| ind.evaluate(s),
                &state,
                &instruments,
            )
            .py()?;
            to_python(py, &check)
        }
    }
}

#[pymodule]
#[pyo3(name = "qcorr")]
fn qcorr_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("QcorrError", py.get_type::<QcorrError>())?;
    m.add("DomainError", py.get_type::<DomainError>())?;
    m.add("SizeLimitError", py.get_type::<SizeLimitError>())?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(covariance, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_covariance_scan, m)?)?;
    m.add_function(wrap_pyfunction!(wmix_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(degree_of_correlations, m)?)?;
    m.add_function(wrap_pyfunction!(has_genuine_correlations, m)?)?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(distill, m)?)?;
    m.add_function(wrap_pyfunction!(closed_forms, m)?)?;
    m.add_function(wrap_pyfunction!(q_of_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(best_work, m)?)?;
    m.add_function(wrap_pyfunction!(delta_w, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "qcorr").unwrap();
            qcorr_module(&m).unwrap();
            let s = PyState::named("w_mixture", 3, vec![0.5]).unwrap();
            assert!(covariance(&s, "ZZZ").unwrap().abs() < 1e-12);
            let (q, f) = closed_forms(3, 0.25).unwrap();
            assert!((q - 0.15625).abs() < 1e-12 && (f - 0.8).abs() < 1e-12);
            let report = analyze(py, &PyState::parse("ghz_diag:n=3").unwrap(), 1e-9).unwrap();
            let degree: usize = report.get_item("degree").unwrap().extract().unwrap();
            assert_eq!(degree, 3);
            let err = q_of_fidelity(3, 0.2).unwrap_err();
            assert!(err.is_instance_of::<DomainError>(py));
            assert!(m.getattr("State").is_ok());
        });
    }
}
