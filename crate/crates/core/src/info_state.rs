//! Information states: the supervisor's knowledge of what the intruder may
//! believe, and the two operators that update it.

use std::fmt;

use crate::intruder::{AugmentedEvent, Estimator, EstimatorState};
use crate::model::{Decision, PlantModel};
use crate::sets::{EventId, StateSet};

/// A set of estimator states, kept sorted and deduplicated so equality and
/// hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InformationState {
    members: Vec<EstimatorState>,
}

impl InformationState {
    pub fn new(mut members: Vec<EstimatorState>) -> Self {
        members.sort_unstable();
        members.dedup();
        InformationState { members }
    }

    /// `{m₀}`, the information before the first decision.
    pub fn initial() -> Self {
        InformationState {
            members: vec![EstimatorState::Initial],
        }
    }

    pub fn members(&self) -> &[EstimatorState] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, m: &EstimatorState) -> bool {
        self.members.binary_search(m).is_ok()
    }

    pub fn is_initial(&self) -> bool {
        self.members == [EstimatorState::Initial]
    }

    /// X(ı): plant states of the members.
    pub fn plant_states(&self) -> StateSet {
        self.members.iter().filter_map(|m| m.plant()).collect()
    }

    /// Q(ı): distinct intruder estimates of the members, in canonical order.
    pub fn estimates(&self) -> Vec<StateSet> {
        let mut qs: Vec<StateSet> = self.members.iter().filter_map(|m| m.estimate()).collect();
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// All members share one decision (and none is `m₀`).
    pub fn is_consistent(&self) -> bool {
        let mut ds = self.members.iter().map(|m| m.decision());
        match ds.next() {
            None => true,
            Some(None) => false,
            Some(Some(d)) => ds.all(|x| x == Some(d)),
        }
    }

    /// Γ(ı), defined when the state is consistent and nonempty.
    pub fn decision(&self) -> Option<Decision> {
        if self.is_consistent() {
            self.members.first().and_then(|m| m.decision())
        } else {
            None
        }
    }

    /// Events σ ∈ Σ_o ∩ Γ(ı) ∩ Λ(X(ı)) that can next be observed.
    pub fn feasible_observations(&self, model: &PlantModel) -> Vec<EventId> {
        let Some(d) = self.decision() else {
            return Vec::new();
        };
        model
            .partitions()
            .supervisor_observable
            .intersection(d.events())
            .intersection(model.active_events(self.plant_states()))
            .iter()
            .collect()
    }

    pub fn display<'a>(&'a self, model: &'a PlantModel) -> impl fmt::Display + 'a {
        DisplayInfo { state: self, model }
    }
}

impl fmt::Debug for InformationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.members).finish()
    }
}

struct DisplayInfo<'a> {
    state: &'a InformationState,
    model: &'a PlantModel,
}

impl fmt::Display for DisplayInfo<'_> {
    /// Compact form with the shared decision factored out, e.g.
    /// `{(3,{2,3,4,5,6,7}),(5,{5,7})}, {a,b,u2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.model;
        if self.state.is_initial() {
            return write!(f, "{{m0}}");
        }
        write!(f, "{{")?;
        for (i, member) in self.state.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match *member {
                EstimatorState::Initial => write!(f, "m0")?,
                EstimatorState::Tracking {
                    plant,
                    estimate,
                    decision,
                } => {
                    if self.state.is_consistent() {
                        write!(f, "({},{})", m.state_name(plant), m.fmt_states(estimate))?
                    } else {
                        write!(
                            f,
                            "({},{},{})",
                            m.state_name(plant),
                            m.fmt_states(estimate),
                            m.fmt_events(decision.events())
                        )?
                    }
                }
            }
        }
        write!(f, "}}")?;
        if let Some(d) = self.state.decision() {
            write!(f, ", {}", m.fmt_events(d.events()))?;
        }
        Ok(())
    }
}

/// One observed event σ followed by decision `decision`: the image of every
/// member under the estimator, dropping members where σ is not enabled.
/// From `{m₀}` pass `event = None` to issue the initial decision.
pub fn nx_is(
    estimator: &Estimator<'_>,
    state: &InformationState,
    event: Option<EventId>,
    decision: Decision,
) -> InformationState {
    let input = AugmentedEvent { event, decision };
    InformationState::new(
        state
            .members()
            .iter()
            .filter_map(|&m| estimator.step(m, input))
            .collect(),
    )
}

/// Closure under supervisor-unobservable events enabled by `decision`, all
/// carrying the unchanged decision.
pub fn ur_is(
    estimator: &Estimator<'_>,
    state: &InformationState,
    decision: Decision,
) -> InformationState {
    let model = estimator.model();
    let silent = model
        .supervisor_unobservable()
        .intersection(decision.events());
    let mut members: Vec<EstimatorState> = state.members().to_vec();
    let mut seen: std::collections::HashSet<EstimatorState> = members.iter().copied().collect();
    let mut stack = members.clone();
    while let Some(m) = stack.pop() {
        let Some(x) = m.plant() else { continue };
        for e in model.active_at(x).intersection(silent).iter() {
            let input = AugmentedEvent {
                event: Some(e),
                decision,
            };
            if let Some(next) = estimator.step(m, input) {
                if seen.insert(next) {
                    members.push(next);
                    stack.push(next);
                }
            }
        }
    }
    InformationState::new(members)
}

/// Observation state reached from a decision state by issuing `decision`.
pub fn decision_successor(
    estimator: &Estimator<'_>,
    state: &InformationState,
    event: Option<EventId>,
    decision: Decision,
) -> InformationState {
    ur_is(
        estimator,
        &nx_is(estimator, state, event, decision),
        decision,
    )
}

/// No member estimate lies entirely inside the secret.
pub fn is_safe(state: &InformationState, secret: StateSet) -> bool {
    state
        .members()
        .iter()
        .filter_map(|m| m.estimate())
        .all(|q| !q.is_subset(secret))
}
