//! Machine-readable summary of a synthesis run.

use std::time::Duration;

use serde::Serialize;

use crate::model::PlantModel;
use crate::synthesis::{ArenaStats, Synthesis, SynthesisConfig};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct StatsReport {
    pub decision_states: usize,
    pub observation_states: usize,
    pub decision_edges: usize,
    pub observation_edges: usize,
}

impl From<ArenaStats> for StatsReport {
    fn from(s: ArenaStats) -> Self {
        StatsReport {
            decision_states: s.decision_states,
            observation_states: s.observation_states,
            decision_edges: s.decision_edges,
            observation_edges: s.observation_edges,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ChoiceReport {
    pub arena_decision_state: usize,
    pub information: String,
    pub event: Option<String>,
    pub decision: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SynthesisReport {
    pub mode: String,
    pub extraction_policy: String,
    pub arena_before_pruning: StatsReport,
    pub arena_after_pruning: StatsReport,
    pub unsafe_decisions: usize,
    pub pruning_rounds: Vec<(usize, usize)>,
    pub unreachable_removed: (usize, usize),
    pub outcome: String,
    pub structures: usize,
    /// Decisions of the first returned structure.
    pub choices: Vec<ChoiceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl SynthesisReport {
    pub fn new(
        model: &PlantModel,
        cfg: &SynthesisConfig,
        run: &Synthesis,
        wall_time: Option<Duration>,
    ) -> Self {
        let choices = run
            .outcome
            .structures()
            .first()
            .map(|ex| {
                ex.choices()
                    .map(|(d, g)| ChoiceReport {
                        arena_decision_state: d,
                        information: run.arena.decision_info(d).display(model).to_string(),
                        event: run.arena.decision_states[d]
                            .event
                            .map(|e| model.event_name(e).to_string()),
                        decision: model.event_names(g.events()),
                    })
                    .collect()
            })
            .unwrap_or_default();
        SynthesisReport {
            mode: cfg.mode.as_str().into(),
            extraction_policy: cfg.policy.as_str().into(),
            arena_before_pruning: run.expanded.into(),
            arena_after_pruning: run.arena.live_stats().into(),
            unsafe_decisions: run
                .arena
                .decision_states
                .iter()
                .map(|d| d.unsafe_edges.len())
                .sum(),
            pruning_rounds: run
                .trace
                .rounds
                .iter()
                .map(|r| (r.decision_states.len(), r.observation_states.len()))
                .collect(),
            unreachable_removed: (
                run.trace.unreachable_decision_states.len(),
                run.trace.unreachable_observation_states.len(),
            ),
            outcome: if run.outcome.is_solved() {
                "solved".into()
            } else {
                "no_solution".into()
            },
            structures: run.outcome.structures().len(),
            choices,
            wall_time_ms: wall_time.map(|t| t.as_secs_f64() * 1e3),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
