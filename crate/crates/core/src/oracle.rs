//! Brute-force controlled state estimate.
//!
//! Enumerates decorated strings `(σ₁,d₁,r₁)…(σ_k,d_k,r_k)`: plant events, the
//! decision in force after each, and whether the decision was released to the
//! intruder. The supervisor generating the flow is unconstrained apart from
//! (i) enabling every event it lets occur, (ii) keeping its decision on silent
//! steps and (iii) under decision-triggered issuance releasing exactly when the
//! decision changes. The result collects end states of every decoration whose
//! induced flow equals the queried one.
//!
//! Nothing here touches the estimator or the reach operators.

use std::collections::HashSet;

use crate::intruder::{IssuanceMode, ObservationPair};
use crate::model::{Decision, PlantModel};
use crate::sets::{EventId, StateId, StateSet};

#[derive(Clone, Copy)]
struct Move {
    target: StateId,
    decision: Decision,
    consumed: bool,
}

/// Every way to take one plant step from `(x, d)` while matching `flow[pos]`.
fn moves(
    model: &PlantModel,
    decisions: &[Decision],
    flow: &[ObservationPair],
    mode: IssuanceMode,
    x: StateId,
    pos: usize,
    d: Decision,
) -> Vec<Move> {
    let mut out = Vec::new();
    for e in model.events() {
        if !d.enables(e) {
            continue;
        }
        let Some(target) = model.step(x, e) else {
            continue;
        };
        let seen: Option<EventId> = model.is_intruder_observable(e).then_some(e);
        // silent step: decision kept, nothing released
        {
            let pair = ObservationPair {
                event: seen,
                decision: None,
            };
            if pair.event.is_none() {
                out.push(Move {
                    target,
                    decision: d,
                    consumed: false,
                });
            } else if flow.get(pos) == Some(&pair) {
                out.push(Move {
                    target,
                    decision: d,
                    consumed: true,
                });
            }
        }
        // released step: any decision, subject to the issuance mechanism
        for &next in decisions {
            if mode == IssuanceMode::DecisionTriggered && next == d {
                continue;
            }
            let pair = ObservationPair {
                event: seen,
                decision: Some(next),
            };
            if flow.get(pos) == Some(&pair) {
                out.push(Move {
                    target,
                    decision: next,
                    consumed: true,
                });
            }
        }
    }
    out
}

/// Plant states at the end of decorated strings of length at most `bound`
/// whose induced flow equals `flow`.
///
/// Breadth-first over `(plant state, flow position, decision)`; each node is
/// expanded once, at its minimal depth, which preserves the bounded semantics
/// because a node's continuations do not depend on how it was reached.
pub fn oracle_controlled_estimate(
    model: &PlantModel,
    flow: &[ObservationPair],
    mode: IssuanceMode,
    bound: usize,
) -> StateSet {
    let decisions = model.decisions();
    let mut result = StateSet::EMPTY;
    let Some(first) = flow.first() else {
        return result;
    };
    let mut frontier = Vec::new();
    let mut seen = HashSet::new();
    for &d0 in &decisions {
        let induced = ObservationPair {
            event: None,
            decision: Some(d0),
        };
        if &induced == first && seen.insert((model.initial(), 1usize, d0)) {
            frontier.push((model.initial(), 1usize, d0));
        }
    }
    for depth in 0..=bound {
        let mut next_frontier = Vec::new();
        for &(x, pos, d) in &frontier {
            if pos == flow.len() {
                result.insert(x);
            }
            if depth == bound {
                continue;
            }
            for mv in moves(model, &decisions, flow, mode, x, pos, d) {
                let node = (mv.target, pos + usize::from(mv.consumed), mv.decision);
                if seen.insert(node) {
                    next_frontier.push(node);
                }
            }
        }
        frontier = next_frontier;
    }
    result
}

/// Unmemoized depth-first enumeration of every decorated string up to `bound`.
/// Exponential; meant only to cross-check [`oracle_controlled_estimate`] on
/// very small inputs.
pub fn exhaustive_controlled_estimate(
    model: &PlantModel,
    flow: &[ObservationPair],
    mode: IssuanceMode,
    bound: usize,
) -> StateSet {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        model: &PlantModel,
        decisions: &[Decision],
        flow: &[ObservationPair],
        mode: IssuanceMode,
        remaining: usize,
        x: StateId,
        pos: usize,
        d: Decision,
        out: &mut StateSet,
    ) {
        if pos == flow.len() {
            out.insert(x);
        }
        if remaining == 0 {
            return;
        }
        for mv in moves(model, decisions, flow, mode, x, pos, d) {
            walk(
                model,
                decisions,
                flow,
                mode,
                remaining - 1,
                mv.target,
                pos + usize::from(mv.consumed),
                mv.decision,
                out,
            );
        }
    }

    let decisions = model.decisions();
    let mut out = StateSet::EMPTY;
    let Some(first) = flow.first() else {
        return out;
    };
    for &d0 in &decisions {
        if first.event.is_none() && first.decision == Some(d0) {
            walk(
                model,
                &decisions,
                flow,
                mode,
                bound,
                model.initial(),
                1,
                d0,
                &mut out,
            );
        }
    }
    out
}
