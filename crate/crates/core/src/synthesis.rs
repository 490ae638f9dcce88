//! Supervisor synthesis as a safety game over information states: expand
//! every safe decision, prune incomplete states to a fixpoint, then extract
//! one decision per reachable decision state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::info_state::{decision_successor, is_safe, InformationState};
use crate::intruder::{Estimator, IssuanceMode};
use crate::model::{Decision, PlantModel};
use crate::sets::EventId;
use crate::structure::{ControlStructure, DecisionState, ObservationState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ExtractionPolicy {
    #[default]
    FirstFeasible,
    LocallyMaximal,
    EnumerateAll,
}

impl ExtractionPolicy {
    pub const ALL: [ExtractionPolicy; 3] = [
        ExtractionPolicy::FirstFeasible,
        ExtractionPolicy::LocallyMaximal,
        ExtractionPolicy::EnumerateAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExtractionPolicy::FirstFeasible => "first_feasible",
            ExtractionPolicy::LocallyMaximal => "locally_maximal",
            ExtractionPolicy::EnumerateAll => "enumerate_all",
        }
    }
}

impl fmt::Display for ExtractionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExtractionPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s.replace('-', "_"))
            .ok_or_else(|| {
                format!("unknown extraction policy `{s}` (expected first_feasible, locally_maximal or enumerate_all)")
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthesisConfig {
    pub mode: IssuanceMode,
    pub policy: ExtractionPolicy,
    /// Maximum number of arena states (decision plus observation).
    pub size_guard: usize,
    /// Maximum number of structures returned by `EnumerateAll`.
    pub enumerate_cap: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            mode: IssuanceMode::ObservationTriggered,
            policy: ExtractionPolicy::FirstFeasible,
            size_guard: 1_000_000,
            enumerate_cap: 64,
        }
    }
}

impl SynthesisConfig {
    pub fn with_mode(mut self, mode: IssuanceMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_policy(mut self, policy: ExtractionPolicy) -> Self {
        self.policy = policy;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaDecisionState {
    pub source: Option<usize>,
    pub event: Option<EventId>,
    /// Safe decisions and their observation states, in canonical decision order.
    pub edges: Vec<(Decision, usize)>,
    /// Decisions rejected because their target is unsafe, with an index into
    /// `Arena::unsafe_states`.
    pub unsafe_edges: Vec<(Decision, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaObservationState {
    pub info: InformationState,
    pub transitions: Vec<(EventId, usize)>,
}

/// The expanded game: like a control structure but with every safe decision
/// at each decision state. States are never removed; pruning clears their
/// alive flags so indices stay stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    pub mode: IssuanceMode,
    pub decision_states: Vec<ArenaDecisionState>,
    pub observation_states: Vec<ArenaObservationState>,
    pub unsafe_states: Vec<InformationState>,
    decision_alive: Vec<bool>,
    observation_alive: Vec<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArenaStats {
    pub decision_states: usize,
    pub observation_states: usize,
    pub decision_edges: usize,
    pub observation_edges: usize,
}

impl Arena {
    pub fn decision_alive(&self, d: usize) -> bool {
        self.decision_alive[d]
    }

    pub fn observation_alive(&self, o: usize) -> bool {
        self.observation_alive[o]
    }

    pub fn decision_info(&self, d: usize) -> InformationState {
        match self.decision_states[d].source {
            Some(o) => self.observation_states[o].info.clone(),
            None => InformationState::initial(),
        }
    }

    /// Edges of `d` whose target is still alive.
    pub fn live_edges(&self, d: usize) -> impl Iterator<Item = (Decision, usize)> + '_ {
        self.decision_states[d]
            .edges
            .iter()
            .copied()
            .filter(|&(_, o)| self.observation_alive[o])
    }

    /// The decision state reached from `o` on `event`, if any.
    pub fn next(&self, o: usize, event: EventId) -> Option<usize> {
        self.observation_states[o]
            .transitions
            .iter()
            .find(|&&(e, _)| e == event)
            .map(|&(_, d)| d)
    }

    pub fn find_decision_state(
        &self,
        info: &InformationState,
        event: Option<EventId>,
    ) -> Option<usize> {
        (0..self.decision_states.len())
            .find(|&d| self.decision_states[d].event == event && &self.decision_info(d) == info)
    }

    pub fn find_observation_state(&self, info: &InformationState) -> Option<usize> {
        self.observation_states.iter().position(|o| &o.info == info)
    }

    /// Counts over live states and live edges between them.
    pub fn live_stats(&self) -> ArenaStats {
        let mut stats = ArenaStats::default();
        for d in 0..self.decision_states.len() {
            if self.decision_alive[d] {
                stats.decision_states += 1;
                stats.decision_edges += self.live_edges(d).count();
            }
        }
        for (o, os) in self.observation_states.iter().enumerate() {
            if self.observation_alive[o] {
                stats.observation_states += 1;
                stats.observation_edges += os
                    .transitions
                    .iter()
                    .filter(|&&(_, d)| self.decision_alive[d])
                    .count();
            }
        }
        stats
    }

    pub fn total_stats(&self) -> ArenaStats {
        ArenaStats {
            decision_states: self.decision_states.len(),
            observation_states: self.observation_states.len(),
            decision_edges: self.decision_states.iter().map(|d| d.edges.len()).sum(),
            observation_edges: self
                .observation_states
                .iter()
                .map(|o| o.transitions.len())
                .sum(),
        }
    }
}

/// Expands the arena from `({m₀}, ε)` depth-first, trying every decision at
/// every decision state and committing only safe successors.
pub fn expand_arena(model: &PlantModel, cfg: &SynthesisConfig) -> Result<Arena> {
    let estimator = Estimator::new(model, cfg.mode);
    let decisions = model.decisions();
    let secret = model.secret();
    let mut arena = Arena {
        mode: cfg.mode,
        decision_states: vec![ArenaDecisionState {
            source: None,
            event: None,
            edges: Vec::new(),
            unsafe_edges: Vec::new(),
        }],
        observation_states: Vec::new(),
        unsafe_states: Vec::new(),
        decision_alive: Vec::new(),
        observation_alive: Vec::new(),
    };
    let mut observation_index: HashMap<InformationState, usize> = HashMap::new();
    let mut unsafe_index: HashMap<InformationState, usize> = HashMap::new();
    let guard = |arena: &Arena| {
        let (d, o) = (arena.decision_states.len(), arena.observation_states.len());
        if d + o > cfg.size_guard {
            Err(Error::SizeGuard {
                limit: cfg.size_guard,
                decision_states: d,
                observation_states: o,
            })
        } else {
            Ok(())
        }
    };

    let mut stack = vec![0usize];
    while let Some(d) = stack.pop() {
        let info = arena.decision_info(d);
        let event = arena.decision_states[d].event;
        let successors: Vec<InformationState> = decisions
            .par_iter()
            .map(|&g| decision_successor(&estimator, &info, event, g))
            .collect();
        let mut fresh = Vec::new();
        for (&g, succ) in decisions.iter().zip(successors) {
            if !is_safe(&succ, secret) {
                let next = unsafe_index.len();
                let u = *unsafe_index.entry(succ.clone()).or_insert(next);
                if u == arena.unsafe_states.len() {
                    arena.unsafe_states.push(succ);
                }
                arena.decision_states[d].unsafe_edges.push((g, u));
                continue;
            }
            let o = match observation_index.get(&succ) {
                Some(&o) => o,
                None => {
                    let o = arena.observation_states.len();
                    observation_index.insert(succ.clone(), o);
                    arena.observation_states.push(ArenaObservationState {
                        info: succ,
                        transitions: Vec::new(),
                    });
                    guard(&arena)?;
                    fresh.push(o);
                    o
                }
            };
            arena.decision_states[d].edges.push((g, o));
        }
        let mut children = Vec::new();
        for o in fresh {
            for e in arena.observation_states[o]
                .info
                .feasible_observations(model)
            {
                let child = arena.decision_states.len();
                arena.decision_states.push(ArenaDecisionState {
                    source: Some(o),
                    event: Some(e),
                    edges: Vec::new(),
                    unsafe_edges: Vec::new(),
                });
                guard(&arena)?;
                arena.observation_states[o].transitions.push((e, child));
                children.push(child);
            }
        }
        stack.extend(children.into_iter().rev());
    }
    arena.decision_alive = vec![true; arena.decision_states.len()];
    arena.observation_alive = vec![true; arena.observation_states.len()];
    Ok(arena)
}

/// Live decision states with no live decision and live observation states
/// missing a feasible observation.
pub fn find_incomplete(arena: &Arena, model: &PlantModel) -> (Vec<usize>, Vec<usize>) {
    let bad_decisions = (0..arena.decision_states.len())
        .filter(|&d| arena.decision_alive[d] && arena.live_edges(d).next().is_none())
        .collect();
    let bad_observations = (0..arena.observation_states.len())
        .filter(|&o| {
            arena.observation_alive[o]
                && arena.observation_states[o]
                    .info
                    .feasible_observations(model)
                    .into_iter()
                    .any(|e| !arena.next(o, e).is_some_and(|d| arena.decision_alive[d]))
        })
        .collect();
    (bad_decisions, bad_observations)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneRound {
    pub decision_states: Vec<usize>,
    pub observation_states: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneTrace {
    pub rounds: Vec<PruneRound>,
    pub unreachable_decision_states: Vec<usize>,
    pub unreachable_observation_states: Vec<usize>,
}

impl PruneTrace {
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
            && self.unreachable_decision_states.is_empty()
            && self.unreachable_observation_states.is_empty()
    }

    pub fn pruned_decision_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.rounds
            .iter()
            .flat_map(|r| r.decision_states.iter().copied())
    }

    pub fn pruned_observation_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.rounds
            .iter()
            .flat_map(|r| r.observation_states.iter().copied())
    }
}

/// Removes incomplete states until none remain, then drops states no longer
/// reachable from the initial decision state.
pub fn prune_incomplete(arena: &mut Arena, model: &PlantModel) -> PruneTrace {
    let mut trace = PruneTrace::default();
    loop {
        let (bad_d, bad_o) = find_incomplete(arena, model);
        if bad_d.is_empty() && bad_o.is_empty() {
            break;
        }
        for &d in &bad_d {
            arena.decision_alive[d] = false;
        }
        for &o in &bad_o {
            arena.observation_alive[o] = false;
        }
        trace.rounds.push(PruneRound {
            decision_states: bad_d,
            observation_states: bad_o,
        });
    }

    let mut seen_d = vec![false; arena.decision_states.len()];
    let mut seen_o = vec![false; arena.observation_states.len()];
    let mut stack = Vec::new();
    if arena.decision_alive[0] {
        seen_d[0] = true;
        stack.push(0);
    }
    while let Some(d) = stack.pop() {
        let targets: Vec<usize> = arena.live_edges(d).map(|(_, o)| o).collect();
        for o in targets {
            if std::mem::replace(&mut seen_o[o], true) {
                continue;
            }
            for &(_, next) in &arena.observation_states[o].transitions {
                if arena.decision_alive[next] && !std::mem::replace(&mut seen_d[next], true) {
                    stack.push(next);
                }
            }
        }
    }
    for (d, seen) in seen_d.into_iter().enumerate() {
        if arena.decision_alive[d] && !seen {
            arena.decision_alive[d] = false;
            trace.unreachable_decision_states.push(d);
        }
    }
    for (o, seen) in seen_o.into_iter().enumerate() {
        if arena.observation_alive[o] && !seen {
            arena.observation_alive[o] = false;
            trace.unreachable_observation_states.push(o);
        }
    }
    trace
}

/// A structure with the arena decision state behind each of its decision
/// states (same index order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedStructure {
    pub structure: ControlStructure,
    pub arena_decision_states: Vec<usize>,
    pub arena_observation_states: Vec<usize>,
}

impl ExtractedStructure {
    /// Arena decision state and the decision chosen there, in structure order.
    pub fn choices(&self) -> impl Iterator<Item = (usize, Decision)> + '_ {
        self.arena_decision_states
            .iter()
            .zip(&self.structure.decision_states)
            .map(|(&a, d)| (a, d.decision))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthesisOutcome {
    Solved(Vec<ExtractedStructure>),
    NoSolution,
}

impl SynthesisOutcome {
    pub fn structures(&self) -> &[ExtractedStructure] {
        match self {
            SynthesisOutcome::Solved(s) => s,
            SynthesisOutcome::NoSolution => &[],
        }
    }

    pub fn first(&self) -> Option<&ControlStructure> {
        self.structures().first().map(|s| &s.structure)
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, SynthesisOutcome::Solved(_))
    }
}

fn choose_locally_maximal(edges: &[(Decision, usize)]) -> usize {
    (0..edges.len())
        .find(|&i| {
            let g = edges[i].0.events();
            !edges
                .iter()
                .any(|(h, _)| h.events() != g && g.is_subset(h.events()))
        })
        .expect("a finite nonempty family has a maximal element")
}

/// Builds the structure reachable under `choice`, which maps an arena
/// decision state to an index into its live edges.
fn build(arena: &Arena, choice: &dyn Fn(usize) -> usize) -> ExtractedStructure {
    let mut structure = ControlStructure {
        mode: arena.mode,
        decision_states: Vec::new(),
        observation_states: Vec::new(),
    };
    let mut arena_d = Vec::new();
    let mut arena_o = Vec::new();
    let mut o_index: Vec<Option<usize>> = vec![None; arena.observation_states.len()];
    // (arena decision state, structure source observation state)
    let mut stack = vec![(0usize, None::<usize>)];
    while let Some((d, source)) = stack.pop() {
        let live: Vec<_> = arena.live_edges(d).collect();
        let (decision, target) = live[choice(d)];
        let sd = structure.decision_states.len();
        let ads = &arena.decision_states[d];
        let (successor, fresh) = match o_index[target] {
            Some(so) => (so, false),
            None => {
                let so = structure.observation_states.len();
                o_index[target] = Some(so);
                arena_o.push(target);
                structure.observation_states.push(ObservationState {
                    info: arena.observation_states[target].info.clone(),
                    transitions: Vec::new(),
                });
                (so, true)
            }
        };
        structure.decision_states.push(DecisionState {
            source,
            event: ads.event,
            decision,
            successor,
        });
        arena_d.push(d);
        if let (Some(src), Some(e)) = (source, ads.event) {
            structure.observation_states[src].transitions.push((e, sd));
        }
        if fresh {
            for &(_, next) in arena.observation_states[target].transitions.iter().rev() {
                stack.push((next, Some(successor)));
            }
        }
    }
    for o in &mut structure.observation_states {
        o.transitions.sort_unstable();
    }
    ExtractedStructure {
        structure,
        arena_decision_states: arena_d,
        arena_observation_states: arena_o,
    }
}

/// Reads one or more control structures off a pruned arena.
pub fn extract_structure(arena: &Arena, cfg: &SynthesisConfig) -> SynthesisOutcome {
    if !arena.decision_alive(0) {
        return SynthesisOutcome::NoSolution;
    }
    match cfg.policy {
        ExtractionPolicy::FirstFeasible => SynthesisOutcome::Solved(vec![build(arena, &|_| 0)]),
        ExtractionPolicy::LocallyMaximal => {
            let pick = |d: usize| {
                let live: Vec<_> = arena.live_edges(d).collect();
                choose_locally_maximal(&live)
            };
            SynthesisOutcome::Solved(vec![build(arena, &pick)])
        }
        ExtractionPolicy::EnumerateAll => SynthesisOutcome::Solved(
            StructureEnumerator::new(arena)
                .take(cfg.enumerate_cap.max(1))
                .collect(),
        ),
    }
}

/// First reachable decision state without an assigned edge, walking the
/// partially assigned structure in the same order as `build`.
fn next_choice_point(
    arena: &Arena,
    assignment: &[Option<usize>],
    seen_o: &mut [bool],
    stack: &mut Vec<usize>,
) -> Option<usize> {
    seen_o.fill(false);
    stack.clear();
    stack.push(0);
    while let Some(d) = stack.pop() {
        let Some(k) = assignment[d] else {
            return Some(d);
        };
        let target = arena.live_edges(d).nth(k).expect("valid choice").1;
        if !std::mem::replace(&mut seen_o[target], true) {
            for &(_, next) in arena.observation_states[target].transitions.iter().rev() {
                stack.push(next);
            }
        }
    }
    None
}

/// Lazily yields every structure extractable from a pruned arena: one per
/// assignment of a live decision to each decision state the assignment
/// itself makes reachable. Assignments are visited depth-first, alternatives
/// in canonical decision order, so the first item is the `FirstFeasible`
/// structure.
pub struct StructureEnumerator<'a> {
    arena: &'a Arena,
    assignment: Vec<Option<usize>>,
    points: Vec<usize>,
    started: bool,
    seen: Vec<bool>,
    stack: Vec<usize>,
}

impl<'a> StructureEnumerator<'a> {
    pub fn new(arena: &'a Arena) -> Self {
        StructureEnumerator {
            arena,
            assignment: vec![None; arena.decision_states.len()],
            points: Vec::new(),
            started: false,
            seen: vec![false; arena.observation_states.len()],
            stack: Vec::new(),
        }
    }

    fn descend(&mut self) {
        while let Some(d) = next_choice_point(
            self.arena,
            &self.assignment,
            &mut self.seen,
            &mut self.stack,
        ) {
            self.assignment[d] = Some(0);
            self.points.push(d);
        }
    }

    fn advance(&mut self) -> bool {
        while let Some(d) = self.points.pop() {
            let k = self.assignment[d].expect("choice points are assigned") + 1;
            if k < self.arena.live_edges(d).count() {
                self.assignment[d] = Some(k);
                self.points.push(d);
                return true;
            }
            self.assignment[d] = None;
        }
        false
    }
}

impl Iterator for StructureEnumerator<'_> {
    type Item = ExtractedStructure;

    fn next(&mut self) -> Option<ExtractedStructure> {
        if !self.arena.decision_alive(0) {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            return None;
        }
        self.descend();
        let assignment = &self.assignment;
        Some(build(self.arena, &|d| assignment[d].expect("assigned")))
    }
}

/// Extracts the structure that follows `policy`'s decisions, if the policy
/// is realizable in the pruned arena: every decision it takes along the way
/// is a live edge, and observations reaching the same decision state get the
/// same decision.
pub fn extract_following(
    arena: &Arena,
    policy: &dyn crate::policy::SupervisorPolicy,
) -> Option<ExtractedStructure> {
    if !arena.decision_alive(0) {
        return None;
    }
    let mut assignment: Vec<Option<usize>> = vec![None; arena.decision_states.len()];
    let mut seen_o = vec![false; arena.observation_states.len()];
    let mut stack = vec![(0usize, Vec::<EventId>::new())];
    while let Some((d, observation)) = stack.pop() {
        let decision = policy.decide(&observation)?;
        let k = arena.live_edges(d).position(|(g, _)| g == decision)?;
        match assignment[d] {
            Some(prev) if prev != k => return None,
            Some(_) => continue,
            None => assignment[d] = Some(k),
        }
        let target = arena.live_edges(d).nth(k).expect("found above").1;
        if !std::mem::replace(&mut seen_o[target], true) {
            for &(e, next) in &arena.observation_states[target].transitions {
                let mut longer = observation.clone();
                longer.push(e);
                stack.push((next, longer));
            }
        }
    }
    Some(build(arena, &|d| {
        assignment[d].expect("assigned along the walk")
    }))
}

/// Everything a synthesis run produced.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub arena: Arena,
    pub expanded: ArenaStats,
    pub trace: PruneTrace,
    pub outcome: SynthesisOutcome,
}

pub fn synthesize(model: &PlantModel, cfg: &SynthesisConfig) -> Result<Synthesis> {
    let mut arena = expand_arena(model, cfg)?;
    let expanded = arena.total_stats();
    let trace = prune_incomplete(&mut arena, model);
    let outcome = extract_structure(&arena, cfg);
    Ok(Synthesis {
        arena,
        expanded,
        trace,
        outcome,
    })
}
