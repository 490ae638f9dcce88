//! The intruder's side: information flows under both issuance mechanisms, the
//! state estimator over augmented strings, and the flow-level estimate update.

use std::fmt;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Decision, PlantModel};
use crate::policy::SupervisorPolicy;
use crate::sets::{EventId, StateId, StateSet};

/// When the supervisor releases a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssuanceMode {
    /// A decision is released after every supervisor observation.
    #[default]
    ObservationTriggered,
    /// A decision is released only when it differs from the one in force.
    DecisionTriggered,
}

impl IssuanceMode {
    pub const ALL: [IssuanceMode; 2] = [
        IssuanceMode::ObservationTriggered,
        IssuanceMode::DecisionTriggered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IssuanceMode::ObservationTriggered => "observation",
            IssuanceMode::DecisionTriggered => "decision",
        }
    }
}

impl fmt::Display for IssuanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IssuanceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "observation" | "observation_triggered" => Ok(IssuanceMode::ObservationTriggered),
            "decision" | "decision_triggered" => Ok(IssuanceMode::DecisionTriggered),
            other => Err(format!("unknown issuance mode `{other}`")),
        }
    }
}

/// One element of an information flow: an intruder-observed event and/or a
/// released decision. Never both empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ObservationPair {
    pub event: Option<EventId>,
    pub decision: Option<Decision>,
}

/// A plant event (empty only in the leading element) paired with the decision
/// in force right after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugmentedEvent {
    pub event: Option<EventId>,
    pub decision: Decision,
}

/// A state of the intruder estimator: true plant state, intruder estimate and
/// decision in force, or the distinguished initial state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorState {
    Initial,
    Tracking {
        plant: StateId,
        estimate: StateSet,
        decision: Decision,
    },
}

impl EstimatorState {
    pub fn plant(&self) -> Option<StateId> {
        match *self {
            EstimatorState::Tracking { plant, .. } => Some(plant),
            EstimatorState::Initial => None,
        }
    }

    pub fn estimate(&self) -> Option<StateSet> {
        match *self {
            EstimatorState::Tracking { estimate, .. } => Some(estimate),
            EstimatorState::Initial => None,
        }
    }

    pub fn decision(&self) -> Option<Decision> {
        match *self {
            EstimatorState::Tracking { decision, .. } => Some(decision),
            EstimatorState::Initial => None,
        }
    }
}

/// Builds the augmented string of `s`: each event paired with the decision the
/// supervisor holds right after it, led by `(ε, S(ε))`.
pub fn augment(
    model: &PlantModel,
    s: &[EventId],
    policy: &dyn SupervisorPolicy,
) -> Result<Vec<AugmentedEvent>> {
    let mut observation = Vec::new();
    let mut decision = policy
        .decide(&observation)
        .ok_or(Error::PolicyUndefined { length: 0 })?;
    let mut out = Vec::with_capacity(s.len() + 1);
    out.push(AugmentedEvent {
        event: None,
        decision,
    });
    let mut x = model.initial();
    for (i, &e) in s.iter().enumerate() {
        x = model
            .step(x, e)
            .ok_or(Error::NotInPlantLanguage { position: i })?;
        if !decision.enables(e) {
            return Err(Error::DisabledBySupervisor { position: i });
        }
        if model.is_supervisor_observable(e) {
            observation.push(e);
            decision = policy.decide(&observation).ok_or(Error::PolicyUndefined {
                length: observation.len(),
            })?;
        }
        out.push(AugmentedEvent {
            event: Some(e),
            decision,
        });
    }
    Ok(out)
}

/// What the intruder sees of an augmented string.
pub fn flow_of_augmented(
    model: &PlantModel,
    augmented: &[AugmentedEvent],
    mode: IssuanceMode,
) -> Result<Vec<ObservationPair>> {
    let (first, rest) = augmented
        .split_first()
        .ok_or_else(|| Error::MalformedFlow("empty augmented string".into()))?;
    if first.event.is_some() {
        return Err(Error::MalformedFlow(
            "augmented string must start with (ε, γ)".into(),
        ));
    }
    let mut flow = vec![ObservationPair {
        event: None,
        decision: Some(first.decision),
    }];
    let mut current = first.decision;
    for (i, step) in rest.iter().enumerate() {
        let e = step
            .event
            .ok_or_else(|| Error::MalformedFlow(format!("empty event at position {}", i + 1)))?;
        let seen_by_supervisor = model.is_supervisor_observable(e);
        if !seen_by_supervisor && step.decision != current {
            return Err(Error::DecisionChangedSilently { position: i });
        }
        let released = match mode {
            IssuanceMode::ObservationTriggered => seen_by_supervisor,
            IssuanceMode::DecisionTriggered => step.decision != current,
        };
        let pair = ObservationPair {
            event: model.is_intruder_observable(e).then_some(e),
            decision: released.then_some(step.decision),
        };
        if pair.event.is_some() || pair.decision.is_some() {
            flow.push(pair);
        }
        current = step.decision;
    }
    Ok(flow)
}

/// The intruder's information flow of `s` under `policy`.
pub fn information_flow(
    model: &PlantModel,
    s: &[EventId],
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
) -> Result<Vec<ObservationPair>> {
    flow_of_augmented(model, &augment(model, s, policy)?, mode)
}

/// One transition of the intruder estimator.
pub fn estimator_step(
    model: &PlantModel,
    m: EstimatorState,
    input: AugmentedEvent,
    mode: IssuanceMode,
) -> Result<EstimatorState> {
    let hidden = model.intruder_unobservable();
    match m {
        EstimatorState::Initial => {
            if input.event.is_some() {
                return Err(Error::NotEnabled);
            }
            let x0 = model.initial();
            Ok(EstimatorState::Tracking {
                plant: x0,
                estimate: model.unobservable_reach(
                    StateSet::singleton(x0),
                    input.decision.events(),
                    hidden,
                ),
                decision: input.decision,
            })
        }
        EstimatorState::Tracking {
            plant,
            estimate,
            decision,
        } => {
            let e = input.event.ok_or(Error::NotEnabled)?;
            if !decision.enables(e) {
                return Err(Error::NotEnabled);
            }
            let next_plant = model.step(plant, e).ok_or(Error::NotEnabled)?;
            let next = input.decision;
            let visible = model.is_intruder_observable(e);
            let released = match mode {
                IssuanceMode::ObservationTriggered => model.is_supervisor_observable(e),
                IssuanceMode::DecisionTriggered => decision != next,
            };
            let ur = |q: StateSet, d: Decision| model.unobservable_reach(q, d.events(), hidden);
            let next_estimate = match (visible, released) {
                (true, false) => ur(model.observable_reach(estimate, e), decision),
                (false, true) => ur(
                    model.unobservable_reach_plus(estimate, decision.events()),
                    next,
                ),
                (true, true) => ur(model.observable_reach(estimate, e), next),
                (false, false) => estimate,
            };
            Ok(EstimatorState::Tracking {
                plant: next_plant,
                estimate: next_estimate,
                decision: next,
            })
        }
    }
}

/// Replays an augmented string from the initial estimator state.
pub fn run_estimator(
    model: &PlantModel,
    augmented: &[AugmentedEvent],
    mode: IssuanceMode,
) -> Result<EstimatorState> {
    augmented.iter().try_fold(EstimatorState::Initial, |m, &e| {
        estimator_step(model, m, e, mode)
    })
}

/// The intruder's estimate computed directly from its information flow.
///
/// Flows that no behavior can produce (an event outside the decision in
/// force, or under decision-triggered issuance a released decision equal to
/// the current one) yield the empty set.
pub fn estimate_from_flow(
    model: &PlantModel,
    flow: &[ObservationPair],
    mode: IssuanceMode,
) -> Result<StateSet> {
    let (first, rest) = flow
        .split_first()
        .ok_or_else(|| Error::MalformedFlow("empty flow".into()))?;
    let mut current = match (first.event, first.decision) {
        (None, Some(d)) => d,
        _ => {
            return Err(Error::MalformedFlow(
                "flow must start with the initial decision (ε, γ)".into(),
            ))
        }
    };
    let hidden = model.intruder_unobservable();
    let ur = |q: StateSet, d: Decision| model.unobservable_reach(q, d.events(), hidden);
    let mut q = ur(StateSet::singleton(model.initial()), current);
    for (i, pair) in rest.iter().enumerate() {
        if let Some(e) = pair.event {
            if !model.is_intruder_observable(e) {
                return Err(Error::MalformedFlow(format!(
                    "event `{}` at position {} is not intruder-observable",
                    model.event_name(e),
                    i + 1
                )));
            }
        }
        let repeated = mode == IssuanceMode::DecisionTriggered && pair.decision == Some(current);
        q = match (pair.event, pair.decision) {
            (None, None) => {
                return Err(Error::MalformedFlow(format!(
                    "empty pair at position {}",
                    i + 1
                )))
            }
            _ if repeated => StateSet::EMPTY,
            (Some(e), _) if !current.enables(e) => StateSet::EMPTY,
            (Some(e), None) => ur(model.observable_reach(q, e), current),
            (Some(e), Some(next)) => ur(model.observable_reach(q, e), next),
            (None, Some(next)) => ur(model.unobservable_reach_plus(q, current.events()), next),
        };
        if let Some(next) = pair.decision {
            current = next;
        }
    }
    Ok(q)
}

/// Memoized estimator: states are materialized on demand and transitions are
/// cached, so the full state space is never enumerated. Safe to share across
/// threads.
pub struct Estimator<'m> {
    model: &'m PlantModel,
    mode: IssuanceMode,
    memo: DashMap<(EstimatorState, AugmentedEvent), Option<EstimatorState>>,
}

impl<'m> Estimator<'m> {
    pub fn new(model: &'m PlantModel, mode: IssuanceMode) -> Self {
        Estimator {
            model,
            mode,
            memo: DashMap::new(),
        }
    }

    pub fn model(&self) -> &'m PlantModel {
        self.model
    }

    pub fn mode(&self) -> IssuanceMode {
        self.mode
    }

    /// `None` where the transition is undefined.
    pub fn step(&self, m: EstimatorState, input: AugmentedEvent) -> Option<EstimatorState> {
        if let Some(hit) = self.memo.get(&(m, input)) {
            return *hit;
        }
        let next = estimator_step(self.model, m, input, self.mode).ok();
        *self.memo.entry((m, input)).or_insert(next)
    }

    pub fn cached_transitions(&self) -> usize {
        self.memo.len()
    }
}

/// Renders a flow in the line-oriented trace format.
pub fn format_trace(model: &PlantModel, flow: &[ObservationPair]) -> String {
    let mut out = String::new();
    for pair in flow {
        let event = pair.event.map_or("-", |e| model.event_name(e));
        let decision = pair
            .decision
            .map_or_else(|| "-".to_string(), |d| model.fmt_events(d.events()));
        out.push_str(&format!("event={event}, decision={decision}\n"));
    }
    out
}

/// Parses the trace format; blank lines and `#` comments are skipped.
pub fn parse_trace(model: &PlantModel, text: &str) -> Result<Vec<ObservationPair>> {
    let mut flow = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::MalformedTrace {
            line: line_no,
            message,
        };
        let (event_part, decision_part) = line
            .split_once(',')
            .ok_or_else(|| bad("expected `event=..., decision=...`".into()))?;
        let event_name = event_part
            .trim()
            .strip_prefix("event=")
            .ok_or_else(|| bad("missing `event=`".into()))?
            .trim();
        let decision_text = decision_part
            .trim()
            .strip_prefix("decision=")
            .ok_or_else(|| bad("missing `decision=`".into()))?
            .trim();
        let event = match event_name {
            "-" | "ε" => None,
            name => Some(model.event_id(name).map_err(|e| bad(e.to_string()))?),
        };
        let decision = match decision_text {
            "-" | "ε" => None,
            text => {
                let inner = text
                    .strip_prefix('{')
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| bad(format!("decision `{text}` is not a braced set")))?;
                let names: Vec<&str> = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                Some(
                    model
                        .decision_from_names(&names)
                        .map_err(|e| bad(e.to_string()))?,
                )
            }
        };
        if event.is_none() && decision.is_none() {
            return Err(bad("pair with neither event nor decision".into()));
        }
        flow.push(ObservationPair { event, decision });
    }
    Ok(flow)
}
