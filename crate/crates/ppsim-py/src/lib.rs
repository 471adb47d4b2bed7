//! Python bindings: the closed-form analytics, a small state-vector
//! surface, and the seeded experiment engine returning plain dicts.

use num_complex::Complex64;
use ppsim::analytics;
use ppsim::harness::{
    self, format_f64, ConfigBuilder, ExperimentConfig, HarnessError, Predictions, RateEstimate,
    SummaryStats, SweepParameter,
};
use ppsim::qsim::{self, BellLabel, MeasBasis, Outcome, SingleQubitOp};
use pyo3::exceptions::{PyIOError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand_chacha::ChaCha8Rng;

fn value_err<E: std::fmt::Display>(err: E) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn harness_err(err: HarnessError) -> PyErr {
    match err.exit_code() {
        2 => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

#[pyfunction]
fn epsilon_e(theta: f64) -> PyResult<f64> {
    analytics::epsilon_e(theta).map_err(value_err)
}

#[pyfunction]
fn coded_overlap(theta: f64) -> PyResult<f64> {
    analytics::coded_overlap(theta).map_err(value_err)
}

#[pyfunction]
fn p_fail(theta: f64, n_photons: u32) -> PyResult<f64> {
    analytics::p_fail(theta, n_photons).map_err(value_err)
}

#[pyfunction]
fn min_photons(theta: f64, target_pf: f64) -> PyResult<u32> {
    analytics::min_photons(theta, target_pf).map_err(value_err)
}

#[pyfunction]
fn eve_info_bits(p_fail_value: f64) -> PyResult<f64> {
    analytics::eve_info_bits(p_fail_value).map_err(value_err)
}

#[pyfunction]
fn theta_for_noise(eps_c: f64) -> PyResult<f64> {
    analytics::theta_for_noise(eps_c).map_err(value_err)
}

#[pyfunction]
fn improved_detection_rate(theta: f64) -> PyResult<f64> {
    analytics::improved_detection_rate(theta).map_err(value_err)
}

/// One ChaCha stream; `stream` picks the per-round substream used by
/// the experiment engine.
#[pyclass]
struct Rng {
    inner: ChaCha8Rng,
}

#[pymethods]
impl Rng {
    #[new]
    #[pyo3(signature = (seed, stream = 0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            inner: harness::round_rng(seed, stream),
        }
    }
}

fn parse_bell_label(label: &str) -> PyResult<BellLabel> {
    match label {
        "psi+" => Ok(BellLabel::PsiPlus),
        "psi-" => Ok(BellLabel::PsiMinus),
        "phi+" => Ok(BellLabel::PhiPlus),
        "phi-" => Ok(BellLabel::PhiMinus),
        _ => Err(PyValueError::new_err(format!(
            "unknown Bell label {label:?}; expected psi+|psi-|phi+|phi-"
        ))),
    }
}

fn parse_outcome(sign: &str) -> PyResult<Outcome> {
    match sign {
        "+" => Ok(Outcome::Plus),
        "-" => Ok(Outcome::Minus),
        _ => Err(PyValueError::new_err(format!(
            "unknown outcome {sign:?}; expected + or -"
        ))),
    }
}

fn parse_op(op: &str) -> PyResult<SingleQubitOp> {
    match op {
        "I" => Ok(SingleQubitOp::I),
        "X" => Ok(SingleQubitOp::X),
        "Z" => Ok(SingleQubitOp::Z),
        _ => Err(PyValueError::new_err(format!(
            "unknown operator {op:?}; expected I, X or Z"
        ))),
    }
}

/// Pure state of up to a few qubits; qubit 0 is the most significant
/// bit of the amplitude index.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct StateVector {
    inner: qsim::StateVector,
}

#[pymethods]
impl StateVector {
    /// Builds a state from a dense amplitude list (length a power of two).
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: qsim::StateVector::from_amplitudes(amplitudes).map_err(value_err)?,
        })
    }

    /// The Bell pair named psi+, psi-, phi+ or phi-.
    #[staticmethod]
    fn bell(label: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qsim::prepare_bell(parse_bell_label(label)?),
        })
    }

    /// Single-qubit eigenstate of the basis B(theta), outcome "+" or "-".
    #[staticmethod]
    fn basis(theta: f64, sign: &str) -> PyResult<Self> {
        let basis = MeasBasis::new(theta).map_err(value_err)?;
        Ok(Self {
            inner: qsim::basis_state(basis, parse_outcome(sign)?),
        })
    }

    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    /// Applies I, X or Z to one qubit.
    fn apply(&self, op: &str, target: usize) -> PyResult<Self> {
        Ok(Self {
            inner: qsim::apply_op(&self.inner, parse_op(op)?, target).map_err(value_err)?,
        })
    }

    /// Projective measurement of one qubit in B(theta); returns
    /// ("+"|"-", collapsed state).
    fn measure(&self, target: usize, theta: f64, rng: &mut Rng) -> PyResult<(String, Self)> {
        let basis = MeasBasis::new(theta).map_err(value_err)?;
        let (outcome, collapsed) =
            qsim::measure(&self.inner, target, basis, &mut rng.inner).map_err(value_err)?;
        Ok((outcome.to_string(), Self { inner: collapsed }))
    }

    /// Bell measurement of a 2-qubit state; returns (label, collapsed).
    fn bell_measure(&self, rng: &mut Rng) -> PyResult<(String, Self)> {
        let (label, collapsed) =
            qsim::bell_measure(&self.inner, &mut rng.inner).map_err(value_err)?;
        Ok((label.to_string(), Self { inner: collapsed }))
    }

    fn fidelity(&self, other: &Self) -> PyResult<f64> {
        qsim::fidelity(&self.inner, &other.inner).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "StateVector({} qubits, {:?})",
            self.inner.num_qubits(),
            self.inner.amplitudes()
        )
    }
}

/// Stringifies a Python kwarg so it can reuse the config-file parser.
fn kwarg_to_string(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = value.cast::<pyo3::types::PyBool>() {
        return Ok(if b.is_true() { "true" } else { "false" }.to_string());
    }
    if let Ok(i) = value.extract::<i64>() {
        return Ok(i.to_string());
    }
    if let Ok(f) = value.extract::<f64>() {
        return Ok(format_f64(f));
    }
    if let Ok(s) = value.extract::<String>() {
        return Ok(s);
    }
    Err(PyTypeError::new_err(format!(
        "unsupported config value type: {}",
        value.get_type().name()?
    )))
}

fn config_from_kwargs(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<ExperimentConfig> {
    let mut builder = ConfigBuilder::default();
    if let Some(kwargs) = kwargs {
        for (key, value) in kwargs.iter() {
            let key: String = key.extract()?;
            builder
                .set(&key, &kwarg_to_string(&value)?)
                .map_err(harness_err)?;
        }
    }
    builder.build().map_err(harness_err)
}

fn rate_dict<'py>(py: Python<'py>, est: &RateEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("successes", est.successes)?;
    d.set_item("trials", est.trials)?;
    d.set_item("rate", est.rate)?;
    d.set_item("lo", est.lo)?;
    d.set_item("hi", est.hi)?;
    Ok(d)
}

fn summary_dict<'py>(
    py: Python<'py>,
    summary: &SummaryStats,
    predictions: &Predictions,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("total_rounds", summary.total_rounds)?;
    d.set_item("control_rounds", summary.control_rounds)?;
    d.set_item("message_rounds", summary.message_rounds)?;
    d.set_item("lost_rounds", summary.lost_rounds)?;
    d.set_item("control_mismatch", rate_dict(py, &summary.control_mismatch)?)?;
    d.set_item("control_mismatch_z", rate_dict(py, &summary.control_mismatch_z)?)?;
    d.set_item("control_mismatch_x", rate_dict(py, &summary.control_mismatch_x)?)?;
    d.set_item("eve_guess_accuracy", rate_dict(py, &summary.eve_guess_accuracy)?)?;
    d.set_item("eve_fail_given_z", rate_dict(py, &summary.eve_fail_given_z)?)?;
    d.set_item("bob_message_error", rate_dict(py, &summary.bob_message_error)?)?;
    d.set_item("bob_anomaly", rate_dict(py, &summary.bob_anomaly)?)?;
    d.set_item("loss_rate", rate_dict(py, &summary.loss_rate)?)?;
    d.set_item("eve_info_empirical", summary.eve_info_empirical)?;
    let preds = PyDict::new(py);
    preds.set_item("control_mismatch", predictions.control_mismatch)?;
    preds.set_item("control_mismatch_z", predictions.control_mismatch_z)?;
    preds.set_item("control_mismatch_x", predictions.control_mismatch_x)?;
    preds.set_item("p_fail", predictions.p_fail)?;
    preds.set_item("eve_accuracy", predictions.eve_accuracy)?;
    preds.set_item("eve_info_bits", predictions.eve_info_bits)?;
    preds.set_item("loss_rate", predictions.loss_rate)?;
    d.set_item("predictions", preds)?;
    Ok(d)
}

/// Runs one experiment. Keyword arguments use the config-file keys:
/// variant, rounds, c, eps_c, noise_kind, loss_prob, attack, n_photons,
/// theta, emulate_baseline, seed, message.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn run_experiment<'py>(
    py: Python<'py>,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config_from_kwargs(kwargs)?;
    let output = py
        .detach(|| harness::run_experiment(&config))
        .map_err(harness_err)?;
    let predictions = Predictions::for_config(&config);
    summary_dict(py, &output.summary, &predictions)
}

/// Runs the base experiment once per value of `param`
/// (theta|n_photons|eps_c|c); returns one summary dict per value.
#[pyfunction]
#[pyo3(signature = (param, values, **kwargs))]
fn sweep<'py>(
    py: Python<'py>,
    param: &str,
    values: Vec<f64>,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let parameter = SweepParameter::parse(param).map_err(harness_err)?;
    let base = config_from_kwargs(kwargs)?;
    let rows = py
        .detach(|| harness::sweep(&base, parameter, &values))
        .map_err(harness_err)?;
    rows.iter()
        .map(|row| {
            let d = summary_dict(py, &row.summary, &row.predictions)?;
            d.set_item("scenario_id", &row.scenario_id)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn ppsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(epsilon_e, m)?)?;
    m.add_function(wrap_pyfunction!(coded_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(p_fail, m)?)?;
    m.add_function(wrap_pyfunction!(min_photons, m)?)?;
    m.add_function(wrap_pyfunction!(eve_info_bits, m)?)?;
    m.add_function(wrap_pyfunction!(theta_for_noise, m)?)?;
    m.add_function(wrap_pyfunction!(improved_detection_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_class::<StateVector>()?;
    m.add_class::<Rng>()?;
    Ok(())
}
