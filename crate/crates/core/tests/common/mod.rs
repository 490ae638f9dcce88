//! Independent brute-force helpers shared by the property and acceptance
//! suites. Nothing here uses information-state operators or pruning.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use opacity_core::intruder::{augment, AugmentedEvent, Estimator, EstimatorState, IssuanceMode};
use opacity_core::model::PlantModel;
use opacity_core::policy::SupervisorPolicy;
use opacity_core::reach::project;
use opacity_core::sets::EventId;
use opacity_core::synthesis::Arena;

/// Every string of the closed-loop language up to `max_len`, shortest first.
pub fn closed_loop_strings(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    max_len: usize,
) -> Vec<Vec<EventId>> {
    let mut out = Vec::new();
    if policy.decide(&[]).is_none() {
        return out;
    }
    out.push(Vec::new());
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for e in model.events() {
                let mut t: Vec<EventId> = s.clone();
                t.push(e);
                if augment(model, &t, policy).is_ok() {
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Every supervisor observation string over Σ_o up to `max_len`.
pub fn observation_strings(model: &PlantModel, max_len: usize) -> Vec<Vec<EventId>> {
    let obs: Vec<EventId> = model.partitions().supervisor_observable.iter().collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &e in &obs {
                let mut t: Vec<EventId> = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// The estimator states `m(s)` of every closed-loop string `s` whose
/// supervisor observation is `alpha`, found by walking concrete events. The
/// search is exact: it explores (estimator state, observed prefix) pairs, so
/// unobservable cycles terminate without a length bound.
pub fn estimator_states_for_observation(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
    alpha: &[EventId],
) -> BTreeSet<EstimatorState> {
    let estimator = Estimator::new(model, mode);
    let mut result = BTreeSet::new();
    let Some(d0) = policy.decide(&[]) else {
        return result;
    };
    let m0 = estimator
        .step(
            EstimatorState::Initial,
            AugmentedEvent {
                event: None,
                decision: d0,
            },
        )
        .unwrap();
    let mut seen = HashSet::from([(m0, 0usize)]);
    let mut queue = VecDeque::from([(m0, 0usize)]);
    while let Some((m, k)) = queue.pop_front() {
        if k == alpha.len() {
            result.insert(m);
        }
        let (x, d) = (m.plant().unwrap(), m.decision().unwrap());
        for e in model.active_at(x).intersection(d.events()).iter() {
            let (k2, decision) = if model.is_supervisor_observable(e) {
                if alpha.get(k) != Some(&e) {
                    continue;
                }
                match policy.decide(&alpha[..=k]) {
                    Some(g) => (k + 1, g),
                    None => continue,
                }
            } else {
                (k, d)
            };
            let m2 = estimator
                .step(
                    m,
                    AugmentedEvent {
                        event: Some(e),
                        decision,
                    },
                )
                .unwrap();
            if seen.insert((m2, k2)) {
                queue.push_back((m2, k2));
            }
        }
    }
    result
}

/// Like `estimator_states_for_observation`, but literally over strings of
/// length at most `bound`.
pub fn bounded_estimator_states(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
    alpha: &[EventId],
    bound: usize,
) -> BTreeSet<EstimatorState> {
    let obs = model.partitions().supervisor_observable;
    closed_loop_strings(model, policy, bound)
        .into_iter()
        .filter(|s| project(s, obs) == alpha)
        .map(|s| {
            opacity_core::intruder::run_estimator(model, &augment(model, &s, policy).unwrap(), mode)
                .unwrap()
        })
        .collect()
}

/// Outcome of the exhaustive search for a complete structure inside a raw
/// (unpruned) arena.
#[derive(Debug, PartialEq, Eq)]
pub enum Exhaustive {
    Found(Vec<Option<usize>>),
    None,
    OverBudget,
}

/// Backtracking over decision assignments of the raw arena: a complete
/// sub-structure assigns an edge to every decision state reachable under the
/// assignment. Every observation state of the raw arena already has a
/// decision state per feasible observation, so completeness reduces to every
/// reachable decision state having a chosen edge.
pub fn exhaustive_complete_structure(arena: &Arena, budget: usize) -> Exhaustive {
    fn first_open(arena: &Arena, assignment: &[Option<usize>]) -> Option<usize> {
        let mut seen = vec![false; arena.observation_states.len()];
        let mut stack = vec![0usize];
        while let Some(d) = stack.pop() {
            let Some(k) = assignment[d] else {
                return Some(d);
            };
            let o = arena.decision_states[d].edges[k].1;
            if !std::mem::replace(&mut seen[o], true) {
                for &(_, next) in &arena.observation_states[o].transitions {
                    stack.push(next);
                }
            }
        }
        None
    }
    fn search(
        arena: &Arena,
        assignment: &mut Vec<Option<usize>>,
        steps: &mut usize,
        budget: usize,
    ) -> Option<bool> {
        *steps += 1;
        if *steps > budget {
            return None;
        }
        let Some(d) = first_open(arena, assignment) else {
            return Some(true);
        };
        for k in 0..arena.decision_states[d].edges.len() {
            assignment[d] = Some(k);
            match search(arena, assignment, steps, budget) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
        }
        assignment[d] = None;
        Some(false)
    }
    let mut assignment = vec![None; arena.decision_states.len()];
    let mut steps = 0;
    match search(arena, &mut assignment, &mut steps, budget) {
        Some(true) => Exhaustive::Found(assignment),
        Some(false) => Exhaustive::None,
        None => Exhaustive::OverBudget,
    }
}
