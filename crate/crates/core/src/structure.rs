//! IS-based control structures: a bipartite graph of decision states (one
//! decision each) and observation states, and the supervisor it decodes to.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info_state::{decision_successor, is_safe, InformationState};
use crate::intruder::{Estimator, EstimatorState, IssuanceMode};
use crate::model::{Decision, PlantModel};
use crate::policy::SupervisorPolicy;
use crate::sets::EventId;

pub const STRUCTURE_FORMAT: &str = "control-structure";

/// A decision state `(ı, σ)`: the observation state it was entered from (or
/// none for the initial `({m₀}, ε)`) and the observed event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionState {
    pub source: Option<usize>,
    pub event: Option<EventId>,
    pub decision: Decision,
    pub successor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationState {
    pub info: InformationState,
    /// Outgoing observations, sorted by event.
    pub transitions: Vec<(EventId, usize)>,
}

impl ObservationState {
    pub fn next(&self, event: EventId) -> Option<usize> {
        self.transitions
            .binary_search_by_key(&event, |&(e, _)| e)
            .ok()
            .map(|i| self.transitions[i].1)
    }
}

/// Decision state 0 is the initial one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlStructure {
    pub mode: IssuanceMode,
    pub decision_states: Vec<DecisionState>,
    pub observation_states: Vec<ObservationState>,
}

/// Where an observation sequence leads in a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureRun {
    pub decision_state: usize,
    pub observation_state: usize,
    pub decisions: Vec<Decision>,
}

impl ControlStructure {
    pub fn initial(&self) -> &DecisionState {
        &self.decision_states[0]
    }

    /// The information held at a decision state: `{m₀}` for the initial one,
    /// otherwise that of its source observation state.
    pub fn decision_info(&self, d: usize) -> InformationState {
        match self.decision_states[d].source {
            Some(o) => self.observation_states[o].info.clone(),
            None => InformationState::initial(),
        }
    }

    pub fn run(&self, observation: &[EventId]) -> Result<StructureRun> {
        let mut d = 0;
        let mut decisions = vec![self.decision_states[0].decision];
        for (i, &e) in observation.iter().enumerate() {
            let o = self.decision_states[d].successor;
            d = self.observation_states[o]
                .next(e)
                .ok_or(Error::InfeasibleObservation { position: i })?;
            decisions.push(self.decision_states[d].decision);
        }
        Ok(StructureRun {
            decision_state: d,
            observation_state: self.decision_states[d].successor,
            decisions,
        })
    }

    /// Every observation state satisfies the safety condition.
    pub fn is_safe(&self, model: &PlantModel) -> bool {
        self.observation_states
            .iter()
            .all(|o| is_safe(&o.info, model.secret()))
    }

    /// Observation states missing a feasible observation.
    pub fn incomplete_states(&self, model: &PlantModel) -> Vec<usize> {
        (0..self.observation_states.len())
            .filter(|&o| {
                let obs = &self.observation_states[o];
                obs.info
                    .feasible_observations(model)
                    .into_iter()
                    .any(|e| obs.next(e).is_none())
            })
            .collect()
    }

    /// Recomputes every information state from the graph and the model and
    /// checks the stored ones, the structural links and reachability.
    pub fn validate(&self, model: &PlantModel) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStructure(msg));
        let (nd, no) = (self.decision_states.len(), self.observation_states.len());
        if nd == 0 {
            return bad("no decision states".into());
        }
        let first = &self.decision_states[0];
        if first.source.is_some() || first.event.is_some() {
            return bad("decision state 0 must be the initial ({m0}, ε)".into());
        }
        for (d, ds) in self.decision_states.iter().enumerate() {
            if ds.successor >= no {
                return bad(format!(
                    "decision state {d} points to missing observation state"
                ));
            }
            if d > 0 {
                let (Some(src), Some(e)) = (ds.source, ds.event) else {
                    return bad(format!("decision state {d} lacks a source observation"));
                };
                if src >= no || self.observation_states[src].next(e) != Some(d) {
                    return bad(format!(
                        "decision state {d} is not the target of its source"
                    ));
                }
            }
        }
        let mut incoming = vec![0usize; nd];
        for (o, os) in self.observation_states.iter().enumerate() {
            if !os.transitions.windows(2).all(|w| w[0].0 < w[1].0) {
                return bad(format!(
                    "observation state {o} has unsorted or repeated events"
                ));
            }
            for &(e, d) in &os.transitions {
                if d >= nd
                    || self.decision_states[d].source != Some(o)
                    || self.decision_states[d].event != Some(e)
                {
                    return bad(format!(
                        "observation state {o} has an inconsistent transition"
                    ));
                }
                if !model.is_supervisor_observable(e) {
                    return bad(format!(
                        "observation state {o} reacts to unobservable event `{}`",
                        model.event_name(e)
                    ));
                }
                incoming[d] += 1;
            }
        }
        if incoming.iter().skip(1).any(|&c| c != 1) {
            return bad(
                "every non-initial decision state needs exactly one incoming observation".into(),
            );
        }
        let estimator = Estimator::new(model, self.mode);
        let mut seen = vec![false; no];
        let mut stack = vec![0usize];
        while let Some(d) = stack.pop() {
            let ds = &self.decision_states[d];
            let expected =
                decision_successor(&estimator, &self.decision_info(d), ds.event, ds.decision);
            if expected != self.observation_states[ds.successor].info {
                return bad(format!(
                    "observation state {} does not match the recomputed information state",
                    ds.successor
                ));
            }
            if !std::mem::replace(&mut seen[ds.successor], true) {
                for &(_, next) in self.observation_states[ds.successor]
                    .transitions
                    .iter()
                    .rev()
                {
                    stack.push(next);
                }
            }
        }
        if let Some(o) = seen.iter().position(|s| !s) {
            return bad(format!("observation state {o} is unreachable"));
        }
        Ok(())
    }

    pub fn to_json(&self, model: &PlantModel) -> String {
        let doc = StructureDocument {
            format: STRUCTURE_FORMAT.into(),
            mode: self.mode.as_str().into(),
            decision_states: self
                .decision_states
                .iter()
                .map(|d| DecisionDoc {
                    source: d.source,
                    event: d.event.map(|e| model.event_name(e).to_string()),
                    decision: model.event_names(d.decision.events()),
                    successor: d.successor,
                })
                .collect(),
            observation_states: self
                .observation_states
                .iter()
                .map(|o| ObservationDoc {
                    members: o
                        .info
                        .members()
                        .iter()
                        .map(|m| member_doc(model, m))
                        .collect(),
                    transitions: o
                        .transitions
                        .iter()
                        .map(|&(e, d)| (model.event_name(e).to_string(), d))
                        .collect(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("structure serializes");
        text.push('\n');
        text
    }

    /// Parses and validates a structure against `model`.
    pub fn from_json(text: &str, model: &PlantModel) -> Result<Self> {
        let doc: StructureDocument = serde_json::from_str(text).map_err(|e| Error::syntax(&e))?;
        if doc.format != STRUCTURE_FORMAT {
            return Err(Error::InvalidStructure(format!(
                "expected format `{STRUCTURE_FORMAT}`, found `{}`",
                doc.format
            )));
        }
        let mode: IssuanceMode = doc.mode.parse().map_err(Error::InvalidStructure)?;
        let decision_states = doc
            .decision_states
            .into_iter()
            .map(|d| {
                Ok(DecisionState {
                    source: d.source,
                    event: d.event.map(|n| model.event_id(&n)).transpose()?,
                    decision: model.decision_from_names(&d.decision)?,
                    successor: d.successor,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let observation_states = doc
            .observation_states
            .into_iter()
            .map(|o| {
                let members = o
                    .members
                    .into_iter()
                    .map(|m| parse_member(model, m))
                    .collect::<Result<Vec<_>>>()?;
                let transitions = o
                    .transitions
                    .into_iter()
                    .map(|(n, d)| Ok((model.event_id(&n)?, d)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ObservationState {
                    info: InformationState::new(members),
                    transitions,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let structure = ControlStructure {
            mode,
            decision_states,
            observation_states,
        };
        structure.validate(model)?;
        Ok(structure)
    }

    /// Number of supervisor-observable transitions.
    pub fn num_observation_transitions(&self) -> usize {
        self.observation_states
            .iter()
            .map(|o| o.transitions.len())
            .sum()
    }
}

/// The decoded supervisor: follow the observation through the structure and
/// return the decision reached.
impl SupervisorPolicy for ControlStructure {
    fn decide(&self, observation: &[EventId]) -> Option<Decision> {
        self.run(observation)
            .ok()
            .map(|r| *r.decisions.last().expect("nonempty"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDocument {
    format: String,
    mode: String,
    decision_states: Vec<DecisionDoc>,
    observation_states: Vec<ObservationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionDoc {
    source: Option<usize>,
    event: Option<String>,
    decision: Vec<String>,
    successor: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationDoc {
    members: Vec<MemberDoc>,
    transitions: Vec<(String, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberDoc {
    state: String,
    estimate: Vec<String>,
    decision: Vec<String>,
}

fn member_doc(model: &PlantModel, m: &EstimatorState) -> MemberDoc {
    match *m {
        EstimatorState::Tracking {
            plant,
            estimate,
            decision,
        } => MemberDoc {
            state: model.state_name(plant).to_string(),
            estimate: model.state_names(estimate),
            decision: model.event_names(decision.events()),
        },
        EstimatorState::Initial => unreachable!("observation states never hold m0"),
    }
}

fn parse_member(model: &PlantModel, m: MemberDoc) -> Result<EstimatorState> {
    Ok(EstimatorState::Tracking {
        plant: model.state_id(&m.state)?,
        estimate: model.state_set(&m.estimate)?,
        decision: model.decision_from_names(&m.decision)?,
    })
}
