//! Python bindings: the simulator, reconstruction, PINN training, the
//! Bayesian-optimization loop, and the symbolic observability check,
//! exposed as one `seirpinn` extension module.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use seirpinn::gpbo::{self, BoOptions};
use seirpinn::observability;
use seirpinn::pinn::{self, LossWeights, PinnModel, TrainMode, TrainRecord};
use seirpinn::recon::{self, ReconConfig};
use seirpinn::seir::{self, EpiParams, SampleMode, SeirState};

fn val_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn run_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn params(beta: f64, epsilon: f64, gamma: f64) -> PyResult<EpiParams> {
    EpiParams::new(beta, epsilon, gamma).map_err(val_err)
}

fn state(init: (f64, f64, f64, f64)) -> PyResult<SeirState> {
    SeirState::new(init.0, init.1, init.2, init.3).map_err(val_err)
}

/// A simulated ground-truth trajectory with dense output.
#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: seir::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn states(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner.states().iter().map(|s| (s.s, s.e, s.i, s.r)).collect()
    }

    /// Dense-output interpolation at an arbitrary time.
    fn eval_at(&self, t: f64) -> PyResult<(f64, f64, f64, f64)> {
        let s = self.inner.eval_at(t).map_err(val_err)?;
        Ok((s.s, s.e, s.i, s.r))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Observation times with `I`, its derivatives, and optional pseudo-data.
#[pyclass(name = "ObservationSet")]
#[derive(Clone)]
struct PyObservationSet {
    inner: seir::ObservationSet,
}

#[pymethods]
impl PyObservationSet {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn i_obs(&self) -> Vec<f64> {
        self.inner.i_obs.clone()
    }

    #[getter]
    fn i_dot(&self) -> Vec<f64> {
        self.inner.i_dot.clone()
    }

    #[getter]
    fn i_ddot(&self) -> Vec<f64> {
        self.inner.i_ddot.clone()
    }

    #[getter]
    fn pseudo_s(&self) -> Option<Vec<f64>> {
        self.inner.pseudo_s.clone()
    }

    #[getter]
    fn pseudo_e(&self) -> Option<Vec<f64>> {
        self.inner.pseudo_e.clone()
    }

    #[getter]
    fn pseudo_r(&self) -> Option<Vec<f64>> {
        self.inner.pseudo_r.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// The 4-output network; weights live in a flat parameter vector.
#[pyclass(name = "PinnModel")]
#[derive(Clone)]
struct PyPinnModel {
    inner: PinnModel,
}

#[pymethods]
impl PyPinnModel {
    /// Glorot-uniform initialization; `shape` runs from 1 input to 4
    /// outputs, e.g. `[1, 50, 50, 50, 4]`.
    #[staticmethod]
    #[pyo3(signature = (seed, shape=None, time_scale=200.0))]
    fn init_glorot(seed: u64, shape: Option<Vec<usize>>, time_scale: f64) -> PyResult<Self> {
        let shape = shape.unwrap_or_else(|| pinn::DEFAULT_SHAPE.to_vec());
        Ok(Self { inner: PinnModel::with_shape(&shape, seed, time_scale).map_err(val_err)? })
    }

    /// Outputs and their time derivatives at `t`.
    fn predict(&self, t: f64) -> ((f64, f64, f64, f64), (f64, f64, f64, f64)) {
        let (v, d) = self.inner.predict(t);
        ((v[0], v[1], v[2], v[3]), (d[0], d[1], d[2], d[3]))
    }

    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn epsilon(&self) -> Option<f64> {
        self.inner.epsilon()
    }
}

fn record_dict<'py>(py: Python<'py>, record: &TrainRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("train_loss", record.train_loss.clone())?;
    d.set_item("test_error", record.test_error.clone())?;
    d.set_item("epsilon", record.epsilon.clone())?;
    d.set_item("min_test_epoch", record.min_test_epoch)?;
    d.set_item("min_train_epoch", record.min_train_epoch)?;
    d.set_item("min_test_error", record.min_test_error())?;
    d.set_item("epsilon_at_min_test", record.epsilon_at_min_test())?;
    d.set_item("epsilon_at_min_train", record.epsilon_at_min_train())?;
    Ok(d)
}

/// Integrate the SEIR system with the fixed-step Dormand-Prince scheme.
#[pyfunction]
#[pyo3(signature = (beta, epsilon, gamma, init=(0.99, 0.0, 0.01, 0.0), t_end=200.0, dt=0.2))]
fn simulate(
    beta: f64,
    epsilon: f64,
    gamma: f64,
    init: (f64, f64, f64, f64),
    t_end: f64,
    dt: f64,
) -> PyResult<PyTrajectory> {
    let traj =
        seir::simulate(&params(beta, epsilon, gamma)?, &state(init)?, t_end, dt).map_err(val_err)?;
    Ok(PyTrajectory { inner: traj })
}

/// Sample observation points; `mode` is `"train"` (even) or `"test"`
/// (seeded uniform).
#[pyfunction]
#[pyo3(signature = (traj, beta, epsilon, gamma, n, mode, seed=0))]
fn sample_observations(
    traj: &PyTrajectory,
    beta: f64,
    epsilon: f64,
    gamma: f64,
    n: usize,
    mode: &str,
    seed: u64,
) -> PyResult<PyObservationSet> {
    let mode = match mode {
        "train" => SampleMode::Train,
        "test" => SampleMode::Test,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let obs = seir::sample_observations(&traj.inner, &params(beta, epsilon, gamma)?, n, mode, seed)
        .map_err(val_err)?;
    Ok(PyObservationSet { inner: obs })
}

/// Fill the pseudo-data columns from `(I, dI, ddI)` and a candidate onset
/// rate.
#[pyfunction]
fn reconstruct(
    obs: &PyObservationSet,
    epsilon: f64,
    beta: f64,
    gamma: f64,
) -> PyResult<PyObservationSet> {
    let out = recon::reconstruct(&obs.inner, &ReconConfig::new(epsilon, beta, gamma))
        .map_err(val_err)?;
    Ok(PyObservationSet { inner: out })
}

/// Train the network; proposed mode fixes the onset rate, baseline mode
/// trains it from `epsilon_init`.
#[pyfunction]
#[pyo3(signature = (mode, obs_train, obs_test, beta, epsilon, gamma,
                    init=(0.99, 0.0, 0.01, 0.0), epochs=30000, lr=1e-3, seed=2,
                    shape=None, time_scale=200.0, epsilon_init=None))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    mode: &str,
    obs_train: &PyObservationSet,
    obs_test: &PyObservationSet,
    beta: f64,
    epsilon: f64,
    gamma: f64,
    init: (f64, f64, f64, f64),
    epochs: usize,
    lr: f64,
    seed: u64,
    shape: Option<Vec<usize>>,
    time_scale: f64,
    epsilon_init: Option<f64>,
) -> PyResult<(PyPinnModel, Bound<'py, PyDict>)> {
    let shape = shape.unwrap_or_else(|| pinn::DEFAULT_SHAPE.to_vec());
    let base = PinnModel::with_shape(&shape, seed, time_scale).map_err(val_err)?;
    let (model, w, train_mode) = match mode {
        "proposed" => (base, LossWeights::proposed(), TrainMode::Proposed),
        "baseline" => (
            base.with_trainable_epsilon(epsilon_init.unwrap_or(epsilon)),
            LossWeights::baseline(),
            TrainMode::Baseline,
        ),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let (trained, record) = pinn::train(
        model,
        &obs_train.inner,
        &obs_test.inner,
        &params(beta, epsilon, gamma)?,
        &state(init)?,
        &w,
        train_mode,
        epochs,
        lr,
    )
    .map_err(run_err)?;
    Ok((PyPinnModel { inner: trained }, record_dict(py, &record)?))
}

/// Minimize a scalar objective over `[lo, hi]` with GP-BO and Expected
/// Improvement; returns the trace and the argmin.
#[pyfunction]
#[pyo3(signature = (objective, iterations=30, init_count=5, seed=3, lo=0.0, hi=0.5))]
fn bo_minimize<'py>(
    py: Python<'py>,
    objective: Bound<'py, PyAny>,
    iterations: usize,
    init_count: usize,
    seed: u64,
    lo: f64,
    hi: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut opts = BoOptions::new(iterations, init_count, seed);
    opts.lo = lo;
    opts.hi = hi;
    let mut py_failure: Option<PyErr> = None;
    let result = gpbo::run_bo(
        |x| match objective.call1((x,)) {
            Ok(v) => v.extract::<f64>().map_err(|e| e.to_string()),
            Err(e) => {
                // Remember the first Python exception; the loop records a
                // penalty and keeps going.
                if py_failure.is_none() {
                    py_failure = Some(e.clone_ref(py));
                }
                Err(e.to_string())
            }
        },
        &opts,
    )
    .map_err(run_err)?;
    let d = PyDict::new(py);
    d.set_item("epsilon_hat", result.epsilon_hat)?;
    d.set_item("best_objective", result.best_objective)?;
    d.set_item(
        "evaluations",
        result
            .evaluations
            .iter()
            .map(|e| (e.iteration, e.epsilon, e.objective, e.is_initial))
            .collect::<Vec<_>>(),
    )?;
    if let Some(e) = py_failure {
        d.set_item("first_error", e.to_string())?;
    }
    Ok(d)
}

/// Reduced lex Groebner basis of the prolonged SEIR ideal, rendered in the
/// conventional text form.
#[pyfunction]
fn groebner_basis() -> PyResult<Vec<String>> {
    let basis = observability::buchberger(
        &observability::build_seir_ideal(),
        observability::DEFAULT_SPAIR_BUDGET,
    )
    .map_err(run_err)?;
    Ok(basis.iter().map(observability::singular_string).collect())
}

/// Run the full symbolic observability verification; returns the recovery
/// polynomials and sampling-check outcome.
#[pyfunction]
#[pyo3(signature = (samples=100, seed=424242))]
fn check_observability(py: Python<'_>, samples: usize, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    use observability::{vars, Observability};
    let basis = observability::buchberger(
        &observability::build_seir_ideal(),
        observability::DEFAULT_SPAIR_BUDGET,
    )
    .map_err(run_err)?;
    let d = PyDict::new(py);
    for (name, var) in [("E", vars::E), ("S", vars::S)] {
        match observability::check_observable(var, &basis) {
            Observability::Recoverable(p) => {
                let ok = observability::vanishes_on_consistent_samples(&p, samples, seed);
                d.set_item(name, observability::singular_string(&p))?;
                d.set_item(format!("{name}_vanishes"), ok)?;
            }
            other => {
                d.set_item(name, format!("{other:?}"))?;
                d.set_item(format!("{name}_vanishes"), false)?;
            }
        }
    }
    d.set_item("basis_size", basis.len())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "seirpinn")]
fn seirpinn_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyObservationSet>()?;
    m.add_class::<PyPinnModel>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_observations, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(bo_minimize, m)?)?;
    m.add_function(wrap_pyfunction!(groebner_basis, m)?)?;
    m.add_function(wrap_pyfunction!(check_observability, m)?)?;
    Ok(())
}
