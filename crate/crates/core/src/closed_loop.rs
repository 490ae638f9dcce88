//! Closed-loop behavior of a supervised plant and opacity verification.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::intruder::{
    augment, estimate_from_flow, flow_of_augmented, AugmentedEvent, Estimator, EstimatorState,
    IssuanceMode, ObservationPair,
};
use crate::model::PlantModel;
use crate::policy::SupervisorPolicy;
use crate::sets::{EventId, StateSet};
use crate::structure::ControlStructure;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    NotInPlant,
    Disabled,
    PolicyUndefined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simulation {
    Accepted(Vec<AugmentedEvent>),
    Rejected {
        position: usize,
        reason: RejectReason,
    },
}

impl Simulation {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Simulation::Accepted(_))
    }
}

/// Runs `s` under `policy`; rejection is a verdict, not an error.
pub fn closed_loop_simulate(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    s: &[EventId],
) -> Simulation {
    match augment(model, s, policy) {
        Ok(aug) => Simulation::Accepted(aug),
        Err(Error::NotInPlantLanguage { position }) => Simulation::Rejected {
            position,
            reason: RejectReason::NotInPlant,
        },
        Err(Error::DisabledBySupervisor { position }) => Simulation::Rejected {
            position,
            reason: RejectReason::Disabled,
        },
        Err(Error::PolicyUndefined { length }) => Simulation::Rejected {
            position: length,
            reason: RejectReason::PolicyUndefined,
        },
        Err(e) => unreachable!("augment only fails on membership: {e}"),
    }
}

/// The supervisor's own state estimate after observing `observation`.
pub fn supervisor_estimate(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    observation: &[EventId],
) -> Result<StateSet> {
    let hidden = model.supervisor_unobservable();
    let mut decision = policy
        .decide(&[])
        .ok_or(Error::PolicyUndefined { length: 0 })?;
    let mut q = model.unobservable_reach(
        StateSet::singleton(model.initial()),
        decision.events(),
        hidden,
    );
    for (i, &e) in observation.iter().enumerate() {
        let stepped = if decision.enables(e) {
            model.observable_reach(q, e)
        } else {
            StateSet::EMPTY
        };
        if stepped.is_empty() {
            return Err(Error::UnreachableObservation { position: i });
        }
        decision = policy
            .decide(&observation[..=i])
            .ok_or(Error::PolicyUndefined { length: i + 1 })?;
        q = model.unobservable_reach(stepped, decision.events(), hidden);
    }
    Ok(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationScope {
    /// Every behavior of the closed loop was covered.
    Exact,
    /// Only strings up to this length were examined.
    UpToDepth(usize),
}

impl fmt::Display for VerificationScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerificationScope::Exact => f.write_str("exact"),
            VerificationScope::UpToDepth(n) => write!(f, "up to depth {n}"),
        }
    }
}

/// A revealing behavior: the intruder's estimate after it is secret-only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub string: Vec<EventId>,
    pub flow: Vec<ObservationPair>,
    pub estimate: StateSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedLoopVerdict {
    pub scope: VerificationScope,
    pub counterexample: Option<Counterexample>,
}

impl ClosedLoopVerdict {
    pub fn is_opaque(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn counterexample(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
    string: Vec<EventId>,
) -> Result<Counterexample> {
    let flow = flow_of_augmented(model, &augment(model, &string, policy)?, mode)?;
    let estimate = estimate_from_flow(model, &flow, mode)?;
    Ok(Counterexample {
        string,
        flow,
        estimate,
    })
}

/// Breadth-first search over the closed-loop language up to `depth_bound`,
/// checking the intruder's estimate after every string. Returns a shortest
/// counterexample. The verdict is exact when the language is exhausted
/// within the bound.
pub fn verify_closed_loop_opacity(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
    depth_bound: usize,
) -> Result<ClosedLoopVerdict> {
    let estimator = Estimator::new(model, mode);
    let secret = model.secret();
    let leaks = |m: &EstimatorState| m.estimate().is_some_and(|q| q.is_subset(secret));

    let d0 = policy
        .decide(&[])
        .ok_or(Error::PolicyUndefined { length: 0 })?;
    let m0 = estimator
        .step(
            EstimatorState::Initial,
            AugmentedEvent {
                event: None,
                decision: d0,
            },
        )
        .expect("initial step is always defined");
    // (string, supervisor observation, estimator state)
    let mut level = vec![(Vec::<EventId>::new(), Vec::<EventId>::new(), m0)];
    let mut depth = 0;
    loop {
        for (s, _, m) in &level {
            if leaks(m) {
                return Ok(ClosedLoopVerdict {
                    scope: VerificationScope::UpToDepth(depth),
                    counterexample: Some(counterexample(model, policy, mode, s.clone())?),
                });
            }
        }
        let mut next = Vec::new();
        for (s, obs, m) in &level {
            let (Some(x), Some(d)) = (m.plant(), m.decision()) else {
                continue;
            };
            for e in model.active_at(x).intersection(d.events()).iter() {
                let mut obs2 = obs.clone();
                let decision = if model.is_supervisor_observable(e) {
                    obs2.push(e);
                    policy
                        .decide(&obs2)
                        .ok_or(Error::PolicyUndefined { length: obs2.len() })?
                } else {
                    d
                };
                let m2 = estimator
                    .step(
                        *m,
                        AugmentedEvent {
                            event: Some(e),
                            decision,
                        },
                    )
                    .expect("enabled event");
                let mut s2 = s.clone();
                s2.push(e);
                next.push((s2, obs2, m2));
            }
        }
        if next.is_empty() {
            return Ok(ClosedLoopVerdict {
                scope: VerificationScope::Exact,
                counterexample: None,
            });
        }
        if depth == depth_bound {
            return Ok(ClosedLoopVerdict {
                scope: VerificationScope::UpToDepth(depth_bound),
                counterexample: None,
            });
        }
        depth += 1;
        level = next;
    }
}

/// Exact verification of the supervisor decoded from `structure`: a
/// breadth-first search over the finite product of structure observation
/// states and estimator states, independent of the information states stored
/// in the structure. Fails if the structure has no decision for a reachable
/// observation.
pub fn verify_structure_opacity(
    model: &PlantModel,
    structure: &ControlStructure,
) -> Result<ClosedLoopVerdict> {
    let estimator = Estimator::new(model, structure.mode);
    let secret = model.secret();
    let first = structure.initial();
    let m0 = estimator
        .step(
            EstimatorState::Initial,
            AugmentedEvent {
                event: None,
                decision: first.decision,
            },
        )
        .expect("initial step is always defined");
    let start = (first.successor, m0);
    // product node: (structure observation state, estimator state)
    type Node = (usize, EstimatorState);
    let mut parent: HashMap<Node, Option<(Node, EventId)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let (o, m) = node;
        if m.estimate().is_some_and(|q| q.is_subset(secret)) {
            let mut string = Vec::new();
            let mut cur = node;
            while let Some(Some((prev, e))) = parent.get(&cur) {
                string.push(*e);
                cur = *prev;
            }
            string.reverse();
            return Ok(ClosedLoopVerdict {
                scope: VerificationScope::Exact,
                counterexample: Some(counterexample(model, structure, structure.mode, string)?),
            });
        }
        let (Some(x), Some(d)) = (m.plant(), m.decision()) else {
            continue;
        };
        for e in model.active_at(x).intersection(d.events()).iter() {
            let (o2, decision) = if model.is_supervisor_observable(e) {
                let ds = structure.observation_states[o].next(e).ok_or_else(|| {
                    Error::InvalidStructure(format!(
                        "observation state {o} has no decision after feasible event `{}`",
                        model.event_name(e)
                    ))
                })?;
                let ds = &structure.decision_states[ds];
                (ds.successor, ds.decision)
            } else {
                (o, d)
            };
            let m2 = estimator
                .step(
                    m,
                    AugmentedEvent {
                        event: Some(e),
                        decision,
                    },
                )
                .expect("enabled event");
            let child = (o2, m2);
            if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(child) {
                slot.insert(Some((node, e)));
                queue.push_back(child);
            }
        }
    }
    Ok(ClosedLoopVerdict {
        scope: VerificationScope::Exact,
        counterexample: None,
    })
}
