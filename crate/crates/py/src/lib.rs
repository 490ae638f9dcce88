//! Python bindings: load models, verify opacity, compute intruder estimates and
//! synthesize opacity-enforcing control structures.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use opacity_core::closed_loop::{verify_closed_loop_opacity, verify_structure_opacity};
use opacity_core::dot::{model_dot, structure_dot};
use opacity_core::intruder::{estimate_from_flow, parse_trace};
use opacity_core::policy::SupervisorPolicy;
use opacity_core::random::{random_model as generate, rng, RandomModelConfig};
use opacity_core::{
    ClosedLoopVerdict, ControlStructure, EventId, ExtractionPolicy, IssuanceMode, OpenLoopVerdict,
    PlantModel, SynthesisConfig, TabularPolicy, VerificationScope,
};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_mode(mode: &str) -> PyResult<IssuanceMode> {
    mode.parse().map_err(value_error)
}

fn string_names(model: &PlantModel, s: &[EventId]) -> Vec<String> {
    s.iter().map(|&e| model.event_name(e).to_string()).collect()
}

fn names(model: &PlantModel, events: &[String]) -> PyResult<Vec<EventId>> {
    events
        .iter()
        .map(|e| model.event_id(e).map_err(value_error))
        .collect()
}

/// A plant with its event partitions and secret states.
#[pyclass(frozen, name = "Model", module = "opacity_py")]
struct PyModel {
    inner: PlantModel,
}

#[pymethods]
impl PyModel {
    /// Parse a model from its JSON document.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        PlantModel::from_json(json)
            .map(|inner| PyModel { inner })
            .map_err(value_error)
    }

    /// A seeded random instance (2 to 5 states, 1 to 4 events).
    #[staticmethod]
    fn random(seed: u64) -> Self {
        PyModel {
            inner: generate(&mut rng(seed), &RandomModelConfig::default()),
        }
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.state_names(self.inner.all_states())
    }

    #[getter]
    fn events(&self) -> Vec<String> {
        self.inner.event_names(self.inner.all_events())
    }

    #[getter]
    fn initial(&self) -> String {
        self.inner.state_name(self.inner.initial()).to_string()
    }

    #[getter]
    fn secret(&self) -> Vec<String> {
        self.inner.state_names(self.inner.secret())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dot(&self) -> String {
        model_dot(&self.inner)
    }

    /// Estimate of an intruder that sees only the events in `observable`.
    fn open_loop_estimate(
        &self,
        observed: Vec<String>,
        observable: Vec<String>,
    ) -> PyResult<Vec<String>> {
        let obs = self.inner.event_set(&observable).map_err(value_error)?;
        let q = self
            .inner
            .open_loop_estimate(&names(&self.inner, &observed)?, obs)
            .map_err(value_error)?;
        Ok(self.inner.state_names(q))
    }

    /// Opacity of the uncontrolled plant against its intruder.
    fn verify_open_loop(&self) -> Verdict {
        match self.inner.verify_open_loop_opacity() {
            OpenLoopVerdict::Opaque => Verdict {
                opaque: true,
                exact: true,
                counterexample: None,
                estimate: None,
            },
            OpenLoopVerdict::NotOpaque { witness, estimate } => Verdict {
                opaque: false,
                exact: true,
                counterexample: Some(string_names(&self.inner, &witness)),
                estimate: Some(self.inner.state_names(estimate)),
            },
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(states={}, events={}, transitions={})",
            self.inner.num_states(),
            self.inner.num_events(),
            self.inner.transitions().len()
        )
    }
}

/// Outcome of an opacity check.
#[pyclass(frozen, get_all, module = "opacity_py")]
struct Verdict {
    opaque: bool,
    /// False when only strings up to the depth bound were examined.
    exact: bool,
    counterexample: Option<Vec<String>>,
    estimate: Option<Vec<String>>,
}

impl Verdict {
    fn closed_loop(model: &PlantModel, v: ClosedLoopVerdict) -> Self {
        Verdict {
            opaque: v.is_opaque(),
            exact: v.scope == VerificationScope::Exact,
            counterexample: v
                .counterexample
                .as_ref()
                .map(|c| string_names(model, &c.string)),
            estimate: v.counterexample.map(|c| model.state_names(c.estimate)),
        }
    }
}

#[pymethods]
impl Verdict {
    fn __bool__(&self) -> bool {
        self.opaque
    }

    fn __repr__(&self) -> String {
        match &self.counterexample {
            None => format!("Verdict(opaque=True, exact={})", self.exact),
            Some(s) => format!("Verdict(opaque=False, counterexample={s:?})"),
        }
    }
}

/// A synthesized supervisor, bound to the model it was built for.
#[pyclass(frozen, module = "opacity_py")]
struct Structure {
    model: PlantModel,
    inner: ControlStructure,
}

#[pymethods]
impl Structure {
    #[staticmethod]
    fn from_json(model: &PyModel, json: &str) -> PyResult<Self> {
        let inner = ControlStructure::from_json(json, &model.inner).map_err(value_error)?;
        Ok(Structure {
            model: model.inner.clone(),
            inner,
        })
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn num_decision_states(&self) -> usize {
        self.inner.decision_states.len()
    }

    #[getter]
    fn num_observation_states(&self) -> usize {
        self.inner.observation_states.len()
    }

    /// Decision issued after `observation`, or None if it cannot occur.
    fn decide(&self, observation: Vec<String>) -> PyResult<Option<Vec<String>>> {
        let obs = names(&self.model, &observation)?;
        Ok(self
            .inner
            .decide(&obs)
            .map(|d| self.model.event_names(d.events())))
    }

    /// Exact closed-loop opacity of the decoded supervisor.
    fn verify(&self) -> PyResult<Verdict> {
        verify_structure_opacity(&self.model, &self.inner)
            .map(|v| Verdict::closed_loop(&self.model, v))
            .map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json(&self.model)
    }

    fn to_dot(&self) -> String {
        structure_dot(&self.model, &self.inner)
    }
}

/// Intruder estimate for a flow written in the trace format.
#[pyfunction]
#[pyo3(signature = (model, flow, mode = "observation"))]
fn estimate(model: &PyModel, flow: &str, mode: &str) -> PyResult<Vec<String>> {
    let m = &model.inner;
    let flow = parse_trace(m, flow).map_err(value_error)?;
    let q = estimate_from_flow(m, &flow, parse_mode(mode)?).map_err(value_error)?;
    Ok(m.state_names(q))
}

/// Closed-loop opacity under a tabular policy (JSON), searched to `bound`.
#[pyfunction]
#[pyo3(signature = (model, policy, mode = "observation", bound = 12))]
fn verify(model: &PyModel, policy: &str, mode: &str, bound: usize) -> PyResult<Verdict> {
    let m = &model.inner;
    let table = TabularPolicy::from_json(policy, m).map_err(value_error)?;
    let v = verify_closed_loop_opacity(m, &table, parse_mode(mode)?, bound).map_err(value_error)?;
    Ok(Verdict::closed_loop(m, v))
}

/// Opacity-enforcing control structures, empty when none exists.
#[pyfunction]
#[pyo3(signature = (model, mode = "observation", policy = "first_feasible", size_guard = 1_000_000))]
fn synthesize(
    py: Python<'_>,
    model: &PyModel,
    mode: &str,
    policy: &str,
    size_guard: usize,
) -> PyResult<Vec<Structure>> {
    let cfg = SynthesisConfig {
        size_guard,
        ..SynthesisConfig::default()
    }
    .with_mode(parse_mode(mode)?)
    .with_policy(policy.parse::<ExtractionPolicy>().map_err(value_error)?);
    let m = &model.inner;
    let run = py
        .detach(|| opacity_core::synthesize(m, &cfg))
        .map_err(value_error)?;
    Ok(run
        .outcome
        .structures()
        .iter()
        .map(|s| Structure {
            model: m.clone(),
            inner: s.structure.clone(),
        })
        .collect())
}

#[pymodule]
fn opacity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<Structure>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    Ok(())
}
