//! Python bindings for the `bellwb` workbench.

use bellwb::analysis as an;
use bellwb::ccp::{self, CcpTask, Protocol, SettingsCount};
use bellwb::linalg::{hermitian_eigenvalues, ComplexMatrix, C64};
use bellwb::quantum::{self as qu, DensityMatrix, GhzSign, OperatorForm, Partition};
use bellwb::scenario::{self as sc, BellScenario, SettingTuple};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: bellwb::Error) -> PyErr {
    match e {
        bellwb::Error::BudgetExceeded(_) | bellwb::Error::NoConvergence(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// `N` parties with `M` equatorial settings each.
#[pyclass(
    name = "BellScenario",
    module = "bellwb",
    frozen,
    eq,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
struct PyBellScenario {
    inner: BellScenario,
}

#[pymethods]
impl PyBellScenario {
    #[new]
    fn new(n_parties: usize, n_settings: usize) -> PyResult<Self> {
        Ok(Self {
            inner: BellScenario::new(n_parties, n_settings).map_err(err)?,
        })
    }

    #[getter]
    fn n_parties(&self) -> usize {
        self.inner.n_parties()
    }

    #[getter]
    fn n_settings(&self) -> usize {
        self.inner.n_settings()
    }

    #[getter]
    fn eta(&self) -> u8 {
        self.inner.eta()
    }

    fn angle(&self, party: usize, setting: usize) -> PyResult<f64> {
        self.inner.angle(party, setting).map_err(err)
    }

    /// Coefficient `cos(phi_1 + ... + phi_N)` of one setting tuple.
    fn coefficient(&self, settings: Vec<usize>) -> PyResult<f64> {
        let t = SettingTuple::new(settings, &self.inner).map_err(err)?;
        Ok(self.inner.coefficient_for_sum(t.sum()))
    }

    /// All `M^N` coefficients, party 1 most significant.
    fn coefficients(&self) -> PyResult<Vec<f64>> {
        Ok(sc::coefficient_tensor(&self.inner)
            .map_err(err)?
            .values()
            .to_vec())
    }

    fn lr_bound(&self) -> f64 {
        sc::lr_bound_analytic(&self.inner)
    }

    /// Exhaustive local-realistic bound and an optimal `N x M` strategy table.
    fn lhv_bound_bruteforce(&self) -> PyResult<(f64, Vec<Vec<i8>>)> {
        let (value, d) = sc::lhv_bound_bruteforce(&self.inner).map_err(err)?;
        Ok((value, d.table()))
    }

    fn __repr__(&self) -> String {
        format!(
            "BellScenario(n_parties={}, n_settings={})",
            self.inner.n_parties(),
            self.inner.n_settings()
        )
    }
}

/// Validated density matrix on `N` qubits.
#[pyclass(name = "DensityMatrix", module = "bellwb", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Builds from rows of complex entries; checks Hermiticity, trace and
    /// positivity.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let m = ComplexMatrix::from_rows(&rows).map_err(err)?;
        Ok(Self {
            inner: DensityMatrix::new(m).map_err(err)?,
        })
    }

    #[getter]
    fn n_parties(&self) -> usize {
        self.inner.n_parties()
    }

    fn to_list(&self) -> Vec<Vec<C64>> {
        self.inner.matrix().to_rows()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        hermitian_eigenvalues(self.inner.matrix()).map_err(err)
    }

    /// Applies `diag(1, e^{i theta})` to every qubit.
    fn with_local_phase(&self, theta: f64) -> Self {
        Self {
            inner: self.inner.with_local_phase(theta),
        }
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(n_parties={})", self.inner.n_parties())
    }
}

fn density(inner: DensityMatrix) -> PyDensityMatrix {
    PyDensityMatrix { inner }
}

#[pyfunction]
#[pyo3(signature = (n_parties, sign = 1))]
fn ghz_state(n_parties: usize, sign: i32) -> PyResult<PyDensityMatrix> {
    let sign = match sign {
        1 => GhzSign::Plus,
        -1 => GhzSign::Minus,
        _ => return Err(PyValueError::new_err("sign must be +1 or -1")),
    };
    Ok(density(
        qu::ghz_state(n_parties, sign).map_err(err)?.density(),
    ))
}

#[pyfunction]
fn generalized_ghz(n_parties: usize, alpha: f64) -> PyResult<PyDensityMatrix> {
    Ok(density(
        qu::generalized_ghz(n_parties, alpha)
            .map_err(err)?
            .density(),
    ))
}

#[pyfunction]
#[pyo3(signature = (n_parties, alpha = 0.0))]
fn dur_state(n_parties: usize, alpha: f64) -> PyResult<PyDensityMatrix> {
    Ok(density(qu::dur_state(n_parties, alpha).map_err(err)?))
}

#[pyfunction]
fn maximally_mixed(n_parties: usize) -> PyResult<PyDensityMatrix> {
    Ok(density(
        DensityMatrix::maximally_mixed(n_parties).map_err(err)?,
    ))
}

/// Random mixture of product states, reproducible from `seed`.
#[pyfunction]
#[pyo3(signature = (n_parties, terms = 4, seed = 0))]
fn random_separable_state(n_parties: usize, terms: usize, seed: u64) -> PyResult<PyDensityMatrix> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok(density(
        qu::random::separable_state(n_parties, terms, &mut rng).map_err(err)?,
    ))
}

/// `Tr(B rho)`; `form` is `"closed"` or `"sum"`.
#[pyfunction]
#[pyo3(signature = (scenario, rho, form = "closed"))]
fn quantum_value(scenario: &PyBellScenario, rho: &PyDensityMatrix, form: &str) -> PyResult<f64> {
    let form = match form {
        "closed" => OperatorForm::Closed,
        "sum" => OperatorForm::Sum,
        other => return Err(PyValueError::new_err(format!("unknown form '{other}'"))),
    };
    qu::quantum_value_with(&scenario.inner, &rho.inner, form).map_err(err)
}

#[pyfunction]
fn twirled_quantum_value(
    scenario: &PyBellScenario,
    rho: &PyDensityMatrix,
    alpha: f64,
) -> PyResult<f64> {
    qu::twirled_quantum_value(&scenario.inner, &rho.inner, alpha).map_err(err)
}

#[pyfunction]
fn correlation_vector(scenario: &PyBellScenario, rho: &PyDensityMatrix) -> PyResult<Vec<f64>> {
    Ok(qu::correlation_vector(&scenario.inner, &rho.inner)
        .map_err(err)?
        .values()
        .to_vec())
}

/// `T[mu_1..mu_N]` flattened in base 4, party 1 most significant.
#[pyfunction]
fn correlation_tensor(rho: &PyDensityMatrix) -> PyResult<Vec<f64>> {
    Ok(qu::correlation_tensor(&rho.inner)
        .map_err(err)?
        .entries()
        .to_vec())
}

/// `(transposed parties, min eigenvalue, positive)` for every cut.
#[pyfunction]
fn partial_transpose_checks(rho: &PyDensityMatrix) -> PyResult<Vec<(Vec<usize>, f64, bool)>> {
    let split = Partition::full_split(rho.inner.n_parties()).map_err(err)?;
    Ok(qu::partial_transpose_checks(&rho.inner, &split)
        .map_err(err)?
        .into_iter()
        .map(|c| {
            (
                c.transposed.indices().to_vec(),
                c.min_eigenvalue,
                c.positive,
            )
        })
        .collect())
}

#[pyfunction]
fn is_n_ppt(rho: &PyDensityMatrix) -> PyResult<bool> {
    let split = Partition::full_split(rho.inner.n_parties()).map_err(err)?;
    qu::is_p_ppt(&rho.inner, &split).map_err(err)
}

fn scenario(n: usize, m: usize) -> PyResult<BellScenario> {
    BellScenario::new(n, m).map_err(err)
}

#[pyfunction]
fn violation_factor_ghz(n_parties: usize, n_settings: usize) -> PyResult<f64> {
    Ok(an::violation_factor_ghz(&scenario(n_parties, n_settings)?))
}

#[pyfunction]
fn violation_factor_ghz_limit(n_parties: usize) -> f64 {
    an::violation_factor_ghz_limit(n_parties)
}

#[pyfunction]
fn violation_factor_gen_ghz(n_parties: usize, n_settings: usize, alpha: f64) -> PyResult<f64> {
    Ok(an::violation_factor_gen_ghz(
        &scenario(n_parties, n_settings)?,
        alpha,
    ))
}

#[pyfunction]
#[pyo3(signature = (n_parties, n_settings, alpha = 0.0, twirled = false))]
fn violation_factor_dur(
    n_parties: usize,
    n_settings: usize,
    alpha: f64,
    twirled: bool,
) -> PyResult<f64> {
    an::violation_factor_dur(&scenario(n_parties, n_settings)?, alpha, twirled).map_err(err)
}

/// Frame-optimized quantum value and the per-party ZYZ angles.
#[pyfunction]
#[pyo3(signature = (scenario, rho, restarts = an::DEFAULT_RESTARTS, seed = 0))]
fn ns_condition_value(
    scenario: &PyBellScenario,
    rho: &PyDensityMatrix,
    restarts: usize,
    seed: u64,
) -> PyResult<(f64, Vec<[f64; 3]>)> {
    let (value, frames) =
        an::ns_condition_value(&scenario.inner, &rho.inner, restarts, seed).map_err(err)?;
    Ok((value, frames.angles().to_vec()))
}

/// GHZ violation factors as `(N, M, V, limit)` rows.
#[pyfunction]
fn fig1_data(n_list: Vec<usize>, m_max: usize) -> PyResult<Vec<(usize, usize, f64, f64)>> {
    Ok(an::fig1_data(&n_list, m_max)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.n_parties, r.n_settings, r.violation_factor, r.limit))
        .collect())
}

fn settings_count(v: &Bound<'_, PyAny>) -> PyResult<SettingsCount> {
    if let Ok(m) = v.extract::<usize>() {
        return Ok(SettingsCount::Finite(m));
    }
    let text: String = v.extract()?;
    text.parse().map_err(err)
}

/// Success-ratio cells; `m_list` entries are integers or `"inf"`.
#[pyfunction]
fn advantage_table<'py>(
    py: Python<'py>,
    n_list: Vec<usize>,
    m_list: Vec<Bound<'py, PyAny>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let settings = m_list
        .iter()
        .map(settings_count)
        .collect::<PyResult<Vec<_>>>()?;
    ccp::advantage_table(&n_list, &settings)
        .map_err(err)?
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("n_parties", c.n_parties)?;
            d.set_item("settings", c.settings.to_string())?;
            d.set_item("p_classical", c.p_classical)?;
            d.set_item("p_quantum", c.p_quantum)?;
            d.set_item("ratio", c.ratio)?;
            d.set_item("reference", ccp::reference_ratio(c.n_parties, c.settings))?;
            d.set_item("converged", c.converged)?;
            Ok(d)
        })
        .collect()
}

/// Communication task built on a Bell scenario.
#[pyclass(name = "CcpTask", module = "bellwb", frozen)]
struct PyCcpTask {
    inner: CcpTask,
}

#[pymethods]
impl PyCcpTask {
    #[new]
    fn new(n_parties: usize, n_settings: usize) -> PyResult<Self> {
        Ok(Self {
            inner: CcpTask::new(scenario(n_parties, n_settings)?),
        })
    }

    #[getter]
    fn normalization(&self) -> f64 {
        self.inner.normalization()
    }

    fn classical_success(&self) -> f64 {
        self.inner.classical_success_exact()
    }

    fn ghz_success(&self) -> f64 {
        self.inner.ghz_success_exact()
    }

    fn quantum_success(&self, rho: &PyDensityMatrix) -> PyResult<f64> {
        self.inner.quantum_success_exact(&rho.inner).map_err(err)
    }

    /// Monte Carlo run; `rho` selects the quantum protocol.
    #[pyo3(signature = (trials, seed = 0, shards = ccp::DEFAULT_SHARDS, rho = None))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        trials: u64,
        seed: u64,
        shards: usize,
        rho: Option<&PyDensityMatrix>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let protocol = match rho {
            Some(r) => Protocol::Quantum(&r.inner),
            None => Protocol::Classical,
        };
        let e =
            ccp::simulate_protocol(&self.inner, &protocol, trials, seed, shards).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("trials", e.trials)?;
        d.set_item("successes", e.successes)?;
        d.set_item("estimate", e.estimate)?;
        d.set_item("exact", e.exact)?;
        d.set_item("sigma", e.sigma)?;
        d.set_item("within_3sigma", e.within_sigmas(3.0))?;
        Ok(d)
    }
}

#[pymodule]
#[pyo3(name = "bellwb")]
fn bellwb_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBellScenario>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyCcpTask>()?;
    m.add_function(wrap_pyfunction!(ghz_state, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_ghz, m)?)?;
    m.add_function(wrap_pyfunction!(dur_state, m)?)?;
    m.add_function(wrap_pyfunction!(maximally_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(random_separable_state, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_value, m)?)?;
    m.add_function(wrap_pyfunction!(twirled_quantum_value, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_vector, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(partial_transpose_checks, m)?)?;
    m.add_function(wrap_pyfunction!(is_n_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(violation_factor_ghz, m)?)?;
    m.add_function(wrap_pyfunction!(violation_factor_ghz_limit, m)?)?;
    m.add_function(wrap_pyfunction!(violation_factor_gen_ghz, m)?)?;
    m.add_function(wrap_pyfunction!(violation_factor_dur, m)?)?;
    m.add_function(wrap_pyfunction!(ns_condition_value, m)?)?;
    m.add_function(wrap_pyfunction!(fig1_data, m)?)?;
    m.add_function(wrap_pyfunction!(advantage_table, m)?)?;
    m.add("DEFAULT_RESTARTS", an::DEFAULT_RESTARTS)?;
    Ok(())
}
