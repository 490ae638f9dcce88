//! Plant models: a deterministic automaton with three independent event
//! partitions and a set of secret states.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{EventId, EventSet, StateId, StateSet, MAX_ELEMENTS};

/// Identifier as written in a model document. Bare integers are accepted and
/// read as their decimal spelling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Name {
    Text(String),
    Number(i64),
}

impl Name {
    pub fn into_string(self) -> String {
        match self {
            Name::Text(s) => s,
            Name::Number(n) => n.to_string(),
        }
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::Text(s.to_string())
    }
}

/// The on-disk model format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub states: Vec<Name>,
    pub events: Vec<Name>,
    pub initial: Name,
    #[serde(default)]
    pub secret: Vec<Name>,
    #[serde(default)]
    pub transitions: Vec<(Name, Name, Name)>,
    #[serde(default)]
    pub observable_supervisor: Vec<Name>,
    #[serde(default)]
    pub observable_intruder: Vec<Name>,
    #[serde(default)]
    pub controllable: Vec<Name>,
}

/// The three event subsets. Complements are derived on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventPartitions {
    pub supervisor_observable: EventSet,
    pub intruder_observable: EventSet,
    pub controllable: EventSet,
}

/// A valid control pattern: an event set containing every uncontrollable event.
///
/// Only [`PlantModel::decision`] and friends construct these, so holding one
/// means validity was checked against some model.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Decision(EventSet);

impl Decision {
    #[inline]
    pub fn events(self) -> EventSet {
        self.0
    }

    #[inline]
    pub fn enables(self, event: EventId) -> bool {
        self.0.contains(event)
    }
}

/// A plant `G = (X, Σ, δ, x₀)` together with its event partitions and secret.
///
/// Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct PlantModel {
    state_names: Vec<String>,
    event_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    event_index: HashMap<String, EventId>,
    delta: Vec<Vec<Option<StateId>>>,
    active: Vec<EventSet>,
    transitions: Vec<(StateId, EventId, StateId)>,
    initial: StateId,
    secret: StateSet,
    partitions: EventPartitions,
}

impl fmt::Debug for PlantModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantModel")
            .field("states", &self.state_names)
            .field("events", &self.event_names)
            .field("transitions", &self.transitions.len())
            .finish()
    }
}

fn index_names<I: Copy>(
    names: &[String],
    make: impl Fn(u8) -> I,
    duplicate: impl Fn(String) -> Error,
) -> Result<HashMap<String, I>> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), make(i as u8)).is_some() {
            return Err(duplicate(n.clone()));
        }
    }
    Ok(map)
}

impl PlantModel {
    /// Parses and validates a JSON model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::syntax(&e))?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        let state_names: Vec<String> = doc.states.into_iter().map(Name::into_string).collect();
        let event_names: Vec<String> = doc.events.into_iter().map(Name::into_string).collect();
        if state_names.is_empty() {
            return Err(Error::NoStates);
        }
        for (kind, count) in [("states", state_names.len()), ("events", event_names.len())] {
            if count > MAX_ELEMENTS {
                return Err(Error::TooLarge {
                    kind,
                    count,
                    max: MAX_ELEMENTS,
                });
            }
        }
        let state_index = index_names(&state_names, StateId, Error::DuplicateState)?;
        let event_index = index_names(&event_names, EventId, Error::DuplicateEvent)?;

        let state = |n: Name| {
            let n = n.into_string();
            state_index.get(&n).copied().ok_or(Error::UnknownState(n))
        };
        let event = |n: Name| {
            let n = n.into_string();
            event_index.get(&n).copied().ok_or(Error::UnknownEvent(n))
        };
        let event_set = |names: Vec<Name>| -> Result<EventSet> {
            names.into_iter().map(&event).collect::<Result<EventSet>>()
        };

        let initial = state(doc.initial)?;
        let secret = doc
            .secret
            .into_iter()
            .map(&state)
            .collect::<Result<StateSet>>()?;
        let partitions = EventPartitions {
            supervisor_observable: event_set(doc.observable_supervisor)?,
            intruder_observable: event_set(doc.observable_intruder)?,
            controllable: event_set(doc.controllable)?,
        };

        let mut delta: Vec<Vec<Option<StateId>>> =
            vec![vec![None; event_names.len()]; state_names.len()];
        let mut active = vec![EventSet::EMPTY; state_names.len()];
        let mut transitions = Vec::with_capacity(doc.transitions.len());
        for (src, ev, dst) in doc.transitions {
            let (src, ev, dst) = (state(src)?, event(ev)?, state(dst)?);
            let slot = &mut delta[src.index()][ev.index()];
            match *slot {
                Some(prev) if prev == dst => {
                    return Err(Error::DuplicateTransition(
                        state_names[src.index()].clone(),
                        event_names[ev.index()].clone(),
                        state_names[dst.index()].clone(),
                    ))
                }
                Some(prev) => {
                    return Err(Error::Nondeterministic {
                        state: state_names[src.index()].clone(),
                        event: event_names[ev.index()].clone(),
                        first: state_names[prev.index()].clone(),
                        second: state_names[dst.index()].clone(),
                    })
                }
                None => *slot = Some(dst),
            }
            active[src.index()].insert(ev);
            transitions.push((src, ev, dst));
        }

        Ok(PlantModel {
            state_names,
            event_names,
            state_index,
            event_index,
            delta,
            active,
            transitions,
            initial,
            secret,
            partitions,
        })
    }

    /// Serializes back into the document format. Names are always written as strings.
    pub fn to_document(&self) -> ModelDocument {
        let s = |x: StateId| Name::Text(self.state_name(x).to_string());
        let e = |x: EventId| Name::Text(self.event_name(x).to_string());
        let es = |set: EventSet| set.iter().map(e).collect::<Vec<_>>();
        ModelDocument {
            states: self
                .state_names
                .iter()
                .map(|n| Name::Text(n.clone()))
                .collect(),
            events: self
                .event_names
                .iter()
                .map(|n| Name::Text(n.clone()))
                .collect(),
            initial: s(self.initial),
            secret: self.secret.iter().map(s).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|&(a, b, c)| (s(a), e(b), s(c)))
                .collect(),
            observable_supervisor: es(self.partitions.supervisor_observable),
            observable_intruder: es(self.partitions.intruder_observable),
            controllable: es(self.partitions.controllable),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model serializes")
    }

    /// Same plant with a different secret.
    pub fn with_secret(&self, secret: StateSet) -> Self {
        let mut m = self.clone();
        m.secret = secret.intersection(self.all_states());
        m
    }

    /// Same plant with different event partitions.
    pub fn with_partitions(&self, partitions: EventPartitions) -> Self {
        let all = self.all_events();
        let mut m = self.clone();
        m.partitions = EventPartitions {
            supervisor_observable: partitions.supervisor_observable.intersection(all),
            intruder_observable: partitions.intruder_observable.intersection(all),
            controllable: partitions.controllable.intersection(all),
        };
        m
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_events(&self) -> usize {
        self.event_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states() as u8).map(StateId)
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.num_events() as u8).map(EventId)
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.num_states())
    }

    pub fn all_events(&self) -> EventSet {
        EventSet::full(self.num_events())
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn secret(&self) -> StateSet {
        self.secret
    }

    pub fn partitions(&self) -> EventPartitions {
        self.partitions
    }

    /// Transitions in document order.
    pub fn transitions(&self) -> &[(StateId, EventId, StateId)] {
        &self.transitions
    }

    #[inline]
    pub fn step(&self, x: StateId, e: EventId) -> Option<StateId> {
        self.delta[x.index()][e.index()]
    }

    /// Runs a string from `x`; `None` if some event is undefined.
    pub fn run_from(&self, x: StateId, s: &[EventId]) -> Option<StateId> {
        s.iter().try_fold(x, |x, &e| self.step(x, e))
    }

    /// Active events Λ(x) of a single state.
    #[inline]
    pub fn active_at(&self, x: StateId) -> EventSet {
        self.active[x.index()]
    }

    pub fn state_name(&self, x: StateId) -> &str {
        &self.state_names[x.index()]
    }

    pub fn event_name(&self, e: EventId) -> &str {
        &self.event_names[e.index()]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn event_id(&self, name: &str) -> Result<EventId> {
        self.event_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(name.to_string()))
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        names.iter().map(|n| self.state_id(n.as_ref())).collect()
    }

    pub fn event_set<S: AsRef<str>>(&self, names: &[S]) -> Result<EventSet> {
        names.iter().map(|n| self.event_id(n.as_ref())).collect()
    }

    /// Parses a whitespace-separated event string such as `"a u1 u2"`.
    pub fn parse_string(&self, text: &str) -> Result<Vec<EventId>> {
        text.split_whitespace().map(|n| self.event_id(n)).collect()
    }

    pub fn supervisor_unobservable(&self) -> EventSet {
        self.all_events()
            .difference(self.partitions.supervisor_observable)
    }

    pub fn intruder_unobservable(&self) -> EventSet {
        self.all_events()
            .difference(self.partitions.intruder_observable)
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.all_events().difference(self.partitions.controllable)
    }

    pub fn is_supervisor_observable(&self, e: EventId) -> bool {
        self.partitions.supervisor_observable.contains(e)
    }

    pub fn is_intruder_observable(&self, e: EventId) -> bool {
        self.partitions.intruder_observable.contains(e)
    }

    /// Validates an event set as a control decision.
    pub fn decision(&self, events: EventSet) -> Result<Decision> {
        let events = events.intersection(self.all_events());
        match self.uncontrollable().difference(events).iter().next() {
            Some(e) => Err(Error::InvalidDecision(self.event_name(e).to_string())),
            None => Ok(Decision(events)),
        }
    }

    pub fn decision_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Decision> {
        self.decision(self.event_set(names)?)
    }

    /// The permissive decision Σ.
    pub fn full_decision(&self) -> Decision {
        Decision(self.all_events())
    }

    /// Every valid decision: subsets of Σ_c by increasing cardinality, then
    /// lexicographically by event index, each joined with Σ_uc.
    pub fn decisions(&self) -> Vec<Decision> {
        let controllable: Vec<EventId> = self.partitions.controllable.iter().collect();
        let base = self.uncontrollable();
        (0..=controllable.len())
            .flat_map(|k| controllable.iter().copied().combinations(k))
            .map(|subset| Decision(base.union(subset.into_iter().collect())))
            .collect()
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable_states(&self) -> StateSet {
        let mut seen = StateSet::singleton(self.initial);
        let mut stack = vec![self.initial];
        while let Some(x) = stack.pop() {
            for e in self.active_at(x).iter() {
                let y = self.step(x, e).expect("active event has a successor");
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Reachable states with no outgoing transition. A nonempty result means
    /// the generated language is not live; nothing downstream requires
    /// liveness, so this is only a diagnostic.
    pub fn deadlock_states(&self) -> StateSet {
        self.reachable_states()
            .iter()
            .filter(|&x| self.active_at(x).is_empty())
            .collect()
    }

    pub fn fmt_states(&self, set: StateSet) -> String {
        format!("{{{}}}", set.iter().map(|x| self.state_name(x)).join(","))
    }

    pub fn fmt_events(&self, set: EventSet) -> String {
        format!("{{{}}}", set.iter().map(|e| self.event_name(e)).join(","))
    }

    pub fn fmt_string(&self, s: &[EventId]) -> String {
        if s.is_empty() {
            "ε".to_string()
        } else {
            s.iter().map(|&e| self.event_name(e)).join(" ")
        }
    }

    pub fn event_names(&self, set: EventSet) -> Vec<String> {
        set.iter().map(|e| self.event_name(e).to_string()).collect()
    }

    pub fn state_names(&self, set: StateSet) -> Vec<String> {
        set.iter().map(|x| self.state_name(x).to_string()).collect()
    }
}
