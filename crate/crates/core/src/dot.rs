//! Graphviz exports. Decision states are rounded boxes, observation states
//! plain boxes; unsafe states are filled red and pruned states outlined red.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use crate::info_state::InformationState;
use crate::intruder::{AugmentedEvent, Estimator, EstimatorState, IssuanceMode};
use crate::model::PlantModel;
use crate::policy::SupervisorPolicy;
use crate::sets::EventId;
use crate::structure::ControlStructure;
use crate::synthesis::Arena;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(name: &str) -> String {
    format!(
        "digraph {} {{\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n",
        quote(name)
    )
}

fn info_label(model: &PlantModel, info: &InformationState, event: Option<EventId>) -> String {
    match event {
        Some(e) => format!("{}, {}", info.display(model), model.event_name(e)),
        None if info.is_initial() => "{m0}, ε".to_string(),
        None => info.display(model).to_string(),
    }
}

/// The plant: one node per state, one edge per transition. The initial
/// state is bold and secret states are filled red.
pub fn model_dot(model: &PlantModel) -> String {
    let mut out = header("plant");
    for x in model.states() {
        let mut attrs = vec!["shape=circle".to_string()];
        if x == model.initial() {
            attrs.push("penwidth=2".into());
        }
        if model.secret().contains(x) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=red".into());
        }
        let _ = writeln!(
            out,
            "  {} [{}];",
            quote(model.state_name(x)),
            attrs.join(", ")
        );
    }
    for &(x, e, y) in model.transitions() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(model.state_name(x)),
            quote(model.state_name(y)),
            quote(model.event_name(e))
        );
    }
    out.push_str("}\n");
    out
}

pub fn structure_dot(model: &PlantModel, structure: &ControlStructure) -> String {
    let mut out = header("control structure");
    for (d, ds) in structure.decision_states.iter().enumerate() {
        let label = info_label(model, &structure.decision_info(d), ds.event);
        let _ = writeln!(
            out,
            "  d{d} [shape=box, style=rounded, label={}];",
            quote(&label)
        );
    }
    for (o, os) in structure.observation_states.iter().enumerate() {
        let unsafe_fill = if crate::info_state::is_safe(&os.info, model.secret()) {
            ""
        } else {
            ", style=filled, fillcolor=red"
        };
        let _ = writeln!(
            out,
            "  o{o} [shape=box{unsafe_fill}, label={}];",
            quote(&os.info.display(model).to_string())
        );
    }
    for (d, ds) in structure.decision_states.iter().enumerate() {
        let _ = writeln!(
            out,
            "  d{d} -> o{} [label={}];",
            ds.successor,
            quote(&model.fmt_events(ds.decision.events()))
        );
    }
    for (o, os) in structure.observation_states.iter().enumerate() {
        for &(e, d) in &os.transitions {
            let _ = writeln!(
                out,
                "  o{o} -> d{d} [label={}];",
                quote(model.event_name(e))
            );
        }
    }
    out.push_str("}\n");
    out
}

/// The arena. With `live_only`, pruned states and rejected decisions are
/// omitted; otherwise pruned states are outlined red and unsafe targets are
/// drawn filled red behind dashed edges.
pub fn arena_dot(model: &PlantModel, arena: &Arena, live_only: bool) -> String {
    let mut out = header("arena");
    let pruned = ", color=red";
    for (d, ds) in arena.decision_states.iter().enumerate() {
        let alive = arena.decision_alive(d);
        if live_only && !alive {
            continue;
        }
        let label = info_label(model, &arena.decision_info(d), ds.event);
        let _ = writeln!(
            out,
            "  d{d} [shape=box, style=rounded{}, label={}];",
            if alive { "" } else { pruned },
            quote(&label)
        );
    }
    for (o, os) in arena.observation_states.iter().enumerate() {
        let alive = arena.observation_alive(o);
        if live_only && !alive {
            continue;
        }
        let _ = writeln!(
            out,
            "  o{o} [shape=box{}, label={}];",
            if alive { "" } else { pruned },
            quote(&os.info.display(model).to_string())
        );
    }
    if !live_only {
        for (u, info) in arena.unsafe_states.iter().enumerate() {
            let _ = writeln!(
                out,
                "  u{u} [shape=box, style=filled, fillcolor=red, label={}];",
                quote(&info.display(model).to_string())
            );
        }
    }
    for (d, ds) in arena.decision_states.iter().enumerate() {
        for &(g, o) in &ds.edges {
            if live_only && !(arena.decision_alive(d) && arena.observation_alive(o)) {
                continue;
            }
            let _ = writeln!(
                out,
                "  d{d} -> o{o} [label={}];",
                quote(&model.fmt_events(g.events()))
            );
        }
        if !live_only {
            for &(g, u) in &ds.unsafe_edges {
                let _ = writeln!(
                    out,
                    "  d{d} -> u{u} [style=dashed, label={}];",
                    quote(&model.fmt_events(g.events()))
                );
            }
        }
    }
    for (o, os) in arena.observation_states.iter().enumerate() {
        for &(e, d) in &os.transitions {
            if live_only && !(arena.observation_alive(o) && arena.decision_alive(d)) {
                continue;
            }
            let _ = writeln!(
                out,
                "  o{o} -> d{d} [label={}];",
                quote(model.event_name(e))
            );
        }
    }
    out.push_str("}\n");
    out
}

fn estimator_label(model: &PlantModel, m: &EstimatorState) -> String {
    match *m {
        EstimatorState::Initial => "m0".into(),
        EstimatorState::Tracking {
            plant,
            estimate,
            decision,
        } => format!(
            "({},{},{})",
            model.state_name(plant),
            model.fmt_states(estimate),
            model.fmt_events(decision.events())
        ),
    }
}

/// The part of the intruder estimator exercised by the closed loop under
/// `policy`, for strings up to `depth` events. States whose estimate is
/// secret-only are filled red.
pub fn estimator_slice_dot(
    model: &PlantModel,
    policy: &dyn SupervisorPolicy,
    mode: IssuanceMode,
    depth: usize,
) -> String {
    let estimator = Estimator::new(model, mode);
    let mut ids: HashMap<EstimatorState, usize> = HashMap::new();
    let mut nodes: Vec<EstimatorState> = Vec::new();
    let mut edges: Vec<(usize, usize, String)> = Vec::new();
    let mut intern = |m: EstimatorState, nodes: &mut Vec<EstimatorState>| -> usize {
        *ids.entry(m).or_insert_with(|| {
            nodes.push(m);
            nodes.len() - 1
        })
    };
    let root = intern(EstimatorState::Initial, &mut nodes);
    let mut seen_edges = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    if let Some(d0) = policy.decide(&[]) {
        let m1 = estimator
            .step(
                EstimatorState::Initial,
                AugmentedEvent {
                    event: None,
                    decision: d0,
                },
            )
            .expect("initial step is defined");
        let i = intern(m1, &mut nodes);
        edges.push((root, i, format!("ε, {}", model.fmt_events(d0.events()))));
        queue.push_back((m1, Vec::<EventId>::new(), 0usize));
    }
    while let Some((m, obs, len)) = queue.pop_front() {
        if len == depth {
            continue;
        }
        let (Some(x), Some(d)) = (m.plant(), m.decision()) else {
            continue;
        };
        let from = intern(m, &mut nodes);
        for e in model.active_at(x).intersection(d.events()).iter() {
            let mut obs2 = obs.clone();
            let decision = if model.is_supervisor_observable(e) {
                obs2.push(e);
                match policy.decide(&obs2) {
                    Some(g) => g,
                    None => continue,
                }
            } else {
                d
            };
            let next = estimator
                .step(
                    m,
                    AugmentedEvent {
                        event: Some(e),
                        decision,
                    },
                )
                .expect("enabled event");
            let to = intern(next, &mut nodes);
            let label = format!(
                "{}, {}",
                model.event_name(e),
                model.fmt_events(decision.events())
            );
            if seen_edges.insert((from, to, label.clone())) {
                edges.push((from, to, label));
            }
            queue.push_back((next, obs2, len + 1));
        }
    }
    let mut out = header("estimator");
    for (i, m) in nodes.iter().enumerate() {
        let fill = if m.estimate().is_some_and(|q| q.is_subset(model.secret())) {
            ", style=filled, fillcolor=red"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  m{i} [shape=ellipse{fill}, label={}];",
            quote(&estimator_label(model, m))
        );
    }
    for (a, b, label) in edges {
        let _ = writeln!(out, "  m{a} -> m{b} [label={}];", quote(&label));
    }
    out.push_str("}\n");
    out
}

/// Number of node and edge statements in a document produced here.
pub fn count_elements(dot: &str) -> (usize, usize) {
    let body = dot
        .lines()
        .filter(|l| l.starts_with("  ") && !l.trim_start().starts_with("node "));
    let (mut nodes, mut edges) = (0, 0);
    for line in body {
        if line.contains(" -> ") {
            edges += 1;
        } else if line.contains('[') {
            nodes += 1;
        }
    }
    (nodes, edges)
}
