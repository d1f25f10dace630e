//! Python bindings: `Instance`, `Policy`, `Report` and the solver, classifier,
//! robust search and genericity entry points.

use persuasion_core::curve::emit_indirect_utility_curve;
use persuasion_core::genericity;
use persuasion_core::instance_file::{parse_instance, to_toml_string};
use persuasion_core::model::{indirect_sender_value, policy_value};
use persuasion_core::robustness::{self, Criterion, RobustnessReport};
use persuasion_core::solver::solve_optimal;
use persuasion_core::{fixtures, Belief, Error, PersuasionInstance, SignalPolicy, Tolerances, UtilityBox, UtilityMatrix};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// A finite persuasion instance, optionally with a box of receiver types.
#[pyclass(module = "persuasion", name = "Instance")]
pub struct PyInstance {
    inner: PersuasionInstance,
    utility_box: Option<UtilityBox>,
}

impl PyInstance {
    fn boxed(&self, delta: Option<f64>) -> PyResult<UtilityBox> {
        match (delta, &self.utility_box) {
            (Some(d), _) => UtilityBox::uniform_width(self.inner.clone(), d).map_err(py_err),
            (None, Some(b)) => Ok(b.clone()),
            (None, None) => Err(PyValueError::new_err("no utility box: pass delta")),
        }
    }
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (prior, receiver_u, sender_v, states=None, actions=None))]
    fn new(
        prior: Vec<f64>,
        receiver_u: Vec<Vec<f64>>,
        sender_v: Vec<Vec<f64>>,
        states: Option<Vec<String>>,
        actions: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let n = prior.len();
        let m = receiver_u.len();
        let inner = PersuasionInstance::new(
            states.unwrap_or_else(|| (0..n).map(|j| format!("w{j}")).collect()),
            actions.unwrap_or_else(|| (0..m).map(|a| format!("a{a}")).collect()),
            prior,
            UtilityMatrix::new(receiver_u).map_err(py_err)?,
            UtilityMatrix::new(sender_v).map_err(py_err)?,
            Tolerances::default(),
        )
        .map_err(py_err)?;
        Ok(PyInstance { inner, utility_box: None })
    }

    /// Built-in example 1; with `delta`, carries its utility box.
    #[staticmethod]
    #[pyo3(signature = (delta=None))]
    fn example1(delta: Option<f64>) -> PyResult<Self> {
        match delta {
            None => Ok(PyInstance { inner: fixtures::example1(), utility_box: None }),
            Some(d) => {
                let bx = fixtures::example1_box(d).map_err(py_err)?;
                Ok(PyInstance { inner: bx.reference.clone(), utility_box: Some(bx) })
            }
        }
    }

    /// Built-in example 2; with `delta`, only `a2` is uncertain.
    #[staticmethod]
    #[pyo3(signature = (delta=None))]
    fn example2(delta: Option<f64>) -> PyResult<Self> {
        match delta {
            None => Ok(PyInstance { inner: fixtures::example2(), utility_box: None }),
            Some(d) => {
                let bx = fixtures::example2_box(d).map_err(py_err)?;
                Ok(PyInstance { inner: bx.reference.clone(), utility_box: Some(bx) })
            }
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let loaded = parse_instance(text).map_err(py_err)?;
        Ok(PyInstance { inner: loaded.instance, utility_box: loaded.utility_box })
    }

    fn to_toml(&self) -> PyResult<String> {
        to_toml_string(&self.inner, self.utility_box.as_ref()).map_err(py_err)
    }

    #[getter]
    fn prior(&self) -> Vec<f64> {
        self.inner.prior.probs().to_vec()
    }

    #[getter]
    fn receiver_u(&self) -> Vec<Vec<f64>> {
        self.inner.receiver_u.rows().to_vec()
    }

    #[getter]
    fn sender_v(&self) -> Vec<Vec<f64>> {
        self.inner.sender_v.rows().to_vec()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.state_labels.clone()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.action_labels.clone()
    }

    /// Indirect sender value at `belief` and the receiver's chosen action.
    fn value_at(&self, belief: Vec<f64>) -> PyResult<(f64, usize)> {
        let b = Belief::new(belief).map_err(py_err)?;
        indirect_sender_value(&self.inner, &self.inner.reference_type(), &b).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(states={:?}, actions={:?}, prior={:?})",
            self.inner.state_labels,
            self.inner.action_labels,
            self.inner.prior.probs()
        )
    }
}

/// A signal policy as weighted posteriors.
#[pyclass(module = "persuasion", name = "Policy", skip_from_py_object)]
#[derive(Clone)]
pub struct PyPolicy {
    inner: SignalPolicy,
}

#[pymethods]
impl PyPolicy {
    #[new]
    fn new(supports: Vec<(f64, Vec<f64>)>) -> PyResult<Self> {
        let supports = supports
            .into_iter()
            .map(|(w, b)| Belief::new(b).map(|b| (w, b)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        Ok(PyPolicy { inner: SignalPolicy::new(supports) })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().collect()
    }

    #[getter]
    fn posteriors(&self) -> Vec<Vec<f64>> {
        self.inner.posteriors().map(|b| b.probs().to_vec()).collect()
    }

    /// Expected sender value under the instance's reference receiver.
    fn value(&self, instance: PyRef<'_, PyInstance>) -> PyResult<f64> {
        policy_value(&instance.inner, &instance.inner.reference_type(), &self.inner).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Policy({})", self.inner)
    }
}

/// Robustness verdict with its supporting quantities.
#[pyclass(module = "persuasion", name = "Report", get_all)]
pub struct PyReport {
    verdict: String,
    optimal_value: f64,
    pseudo_value: f64,
    gap_constant: f64,
    witness_policy: PyPolicy,
    /// `(posterior, induced action, inferior action or None)` per fragile posterior.
    fragile_posteriors: Vec<(Vec<f64>, usize, Option<usize>)>,
    witness_type: Option<Vec<Vec<f64>>>,
    witness_gap: Option<f64>,
}

impl From<RobustnessReport> for PyReport {
    fn from(r: RobustnessReport) -> Self {
        PyReport {
            verdict: r.verdict.to_string(),
            optimal_value: r.optimal_value,
            pseudo_value: r.pseudo_value,
            gap_constant: r.gap_constant,
            witness_policy: PyPolicy { inner: r.witness_policy },
            fragile_posteriors: r
                .fragile_posteriors
                .into_iter()
                .map(|f| (f.belief.probs().to_vec(), f.induced_action, f.inferior_action))
                .collect(),
            witness_type: r.witness_type.map(|t| t.receiver_u.rows().to_vec()),
            witness_gap: r.witness_gap,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("Report(verdict={}, optimal_value={}, gap_constant={})", self.verdict, self.optimal_value, self.gap_constant)
    }
}

/// Optimal value and a basic optimal policy.
#[pyfunction]
fn solve(instance: PyRef<'_, PyInstance>) -> PyResult<(f64, PyPolicy)> {
    let sol = solve_optimal(&instance.inner, &instance.inner.reference_type()).map_err(py_err)?;
    Ok((sol.value, PyPolicy { inner: sol.policy }))
}

/// ROBUST/FRAGILE verdict. With `delta`, the witness type lies in a uniform
/// box of that width; otherwise the instance's own box (if any) is used.
#[pyfunction]
#[pyo3(signature = (instance, delta=None))]
fn classify(instance: PyRef<'_, PyInstance>, delta: Option<f64>) -> PyResult<PyReport> {
    let report = match (delta, &instance.utility_box) {
        (None, None) => robustness::classify(&instance.inner),
        _ => robustness::classify_in_box(&instance.boxed(delta)?),
    };
    report.map(PyReport::from).map_err(py_err)
}

/// Best policy found for `criterion` ("minregret" or "maxmin") and its score.
#[pyfunction]
#[pyo3(signature = (instance, criterion="minregret", delta=None, samples=32, seed=0))]
fn search_robust_policy(
    instance: PyRef<'_, PyInstance>,
    criterion: &str,
    delta: Option<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<(PyPolicy, f64)> {
    let criterion = match criterion {
        "minregret" => Criterion::MinRegret,
        "maxmin" => Criterion::MaxMin,
        other => return Err(PyValueError::new_err(format!("unknown criterion {other:?}"))),
    };
    let r = robustness::search_robust_policy(&instance.boxed(delta)?, criterion, samples, seed).map_err(py_err)?;
    Ok((PyPolicy { inner: r.policy }, r.score))
}

/// `(p, value, action, breakpoint)` rows of the value curve of a two-state instance.
#[pyfunction]
#[pyo3(signature = (instance, resolution=101))]
fn value_curve(instance: PyRef<'_, PyInstance>, resolution: usize) -> PyResult<Vec<(f64, f64, usize, bool)>> {
    let rows = emit_indirect_utility_curve(&instance.inner, resolution).map_err(py_err)?;
    Ok(rows.into_iter().map(|r| (r.p, r.value, r.action, r.breakpoint)).collect())
}

/// Pass counts `(stability, unique best reply, classified robust)` over random instances.
#[pyfunction]
#[pyo3(signature = (states, actions, trials=1000, seed=0))]
fn genericity_trial(states: usize, actions: usize, trials: usize, seed: u64) -> PyResult<(usize, usize, usize)> {
    let out = genericity::genericity_trial(states, actions, trials, seed).map_err(py_err)?;
    Ok((out.pass_stability, out.pass_unique_reply, out.pass_classifier))
}

#[pymodule]
fn persuasion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyPolicy>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(search_robust_policy, m)?)?;
    m.add_function(wrap_pyfunction!(value_curve, m)?)?;
    m.add_function(wrap_pyfunction!(genericity_trial, m)?)?;
    Ok(())
}
