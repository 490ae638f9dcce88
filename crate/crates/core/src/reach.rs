//! Projections, reach operators and open-loop current-state opacity.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::PlantModel;
use crate::sets::{EventId, EventSet, StateSet};

/// Natural projection: erases every event outside `obs`.
pub fn project(s: &[EventId], obs: EventSet) -> Vec<EventId> {
    s.iter().copied().filter(|&e| obs.contains(e)).collect()
}

/// Outcome of open-loop opacity verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpenLoopVerdict {
    Opaque,
    /// A shortest intruder observation whose estimate lies inside the secret.
    NotOpaque {
        witness: Vec<EventId>,
        estimate: StateSet,
    },
}

impl OpenLoopVerdict {
    pub fn is_opaque(&self) -> bool {
        matches!(self, OpenLoopVerdict::Opaque)
    }
}

impl PlantModel {
    /// Λ(q): events defined at some state of `q`.
    pub fn active_events(&self, q: StateSet) -> EventSet {
        q.iter()
            .fold(EventSet::EMPTY, |acc, x| acc.union(self.active_at(x)))
    }

    /// States reached from `q` by strings over `enabled ∩ hidden`, including `q`.
    pub fn unobservable_reach(&self, q: StateSet, enabled: EventSet, hidden: EventSet) -> StateSet {
        let moves = enabled.intersection(hidden);
        let mut reach = q;
        let mut stack: Vec<_> = q.iter().collect();
        while let Some(x) = stack.pop() {
            for e in self.active_at(x).intersection(moves).iter() {
                let y = self.step(x, e).expect("active event has a successor");
                if reach.insert(y) {
                    stack.push(y);
                }
            }
        }
        reach
    }

    /// Intruder-unobservable reach in one or more steps under `enabled`.
    pub fn unobservable_reach_plus(&self, q: StateSet, enabled: EventSet) -> StateSet {
        let hidden = self.intruder_unobservable();
        let first = enabled
            .intersection(hidden)
            .iter()
            .fold(StateSet::EMPTY, |acc, e| {
                acc.union(self.observable_reach(q, e))
            });
        self.unobservable_reach(first, enabled, hidden)
    }

    /// NX_σ(q): one-step successors under `event`.
    pub fn observable_reach(&self, q: StateSet, event: EventId) -> StateSet {
        q.iter().filter_map(|x| self.step(x, event)).collect()
    }

    /// Open-loop estimate after observing `observed` through projection onto `obs`.
    pub fn open_loop_estimate(&self, observed: &[EventId], obs: EventSet) -> Result<StateSet> {
        let all = self.all_events();
        let hidden = all.difference(obs);
        let mut q = self.unobservable_reach(StateSet::singleton(self.initial()), all, hidden);
        for (i, &e) in observed.iter().enumerate() {
            if !obs.contains(e) {
                return Err(Error::UnreachableObservation { position: i });
            }
            q = self.unobservable_reach(self.observable_reach(q, e), all, hidden);
            if q.is_empty() {
                return Err(Error::UnreachableObservation { position: i + 1 });
            }
        }
        Ok(q)
    }

    /// Checks current-state opacity of the uncontrolled plant against an
    /// intruder observing Σ_a, by breadth-first exploration of the observer.
    pub fn verify_open_loop_opacity(&self) -> OpenLoopVerdict {
        let all = self.all_events();
        let obs = self.partitions().intruder_observable;
        let hidden = all.difference(obs);
        let secret = self.secret();
        let start = self.unobservable_reach(StateSet::singleton(self.initial()), all, hidden);

        let mut parent: HashMap<StateSet, Option<(StateSet, EventId)>> = HashMap::new();
        parent.insert(start, None);
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            if q.is_subset(secret) {
                let mut witness = Vec::new();
                let mut cur = q;
                while let Some(&Some((prev, e))) = parent.get(&cur) {
                    witness.push(e);
                    cur = prev;
                }
                witness.reverse();
                return OpenLoopVerdict::NotOpaque {
                    witness,
                    estimate: q,
                };
            }
            for e in obs.iter() {
                let next = self.unobservable_reach(self.observable_reach(q, e), all, hidden);
                if !next.is_empty() && !parent.contains_key(&next) {
                    parent.insert(next, Some((q, e)));
                    queue.push_back(next);
                }
            }
        }
        OpenLoopVerdict::Opaque
    }
}
