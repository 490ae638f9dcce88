//! Acceptance suite: one line per criterion, with its time limit.
//!
//! Run with `cargo test -p opacity-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use opacity_core::closed_loop::{
    supervisor_estimate, verify_closed_loop_opacity, verify_structure_opacity, VerificationScope,
};
use opacity_core::fixtures::{info_state, leaky_supervisor, opaque_supervisor, running_example};
use opacity_core::intruder::{
    augment, estimate_from_flow, flow_of_augmented, format_trace, information_flow, parse_trace,
    run_estimator, EstimatorState, IssuanceMode,
};
use opacity_core::oracle::oracle_controlled_estimate;
use opacity_core::policy::SupervisorPolicy;
use opacity_core::random::{random_model, random_policy, rng, scaling_family, RandomModelConfig};
use opacity_core::synthesis::{
    expand_arena, synthesize, ExtractionPolicy, StructureEnumerator, SynthesisConfig,
};
use opacity_core::{Error, PlantModel, StateSet};

use common::*;

use IssuanceMode::*;

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: &'static str,
    limit: Duration,
    check: Check,
    /// Known to fail as literally stated; the check returns `Err` with the
    /// measured discrepancy and a companion criterion carries the assertion.
    known_red: bool,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(m: &PlantModel, names: &[&str]) -> StateSet {
    m.state_set(names).unwrap()
}

const SIGMA: [&str; 5] = ["a", "b", "u1", "u2", "u3"];

fn c1_estimator_trace() -> Result<String, String> {
    let m = running_example();
    let s = m.parse_string("a u1 u2 u2").unwrap();
    let aug = augment(&m, &s, &leaky_supervisor(&m)).map_err(|e| e.to_string())?;
    let mut states = Vec::new();
    let mut cur = EstimatorState::Initial;
    for &input in &aug {
        cur = opacity_core::intruder::estimator_step(&m, cur, input, ObservationTriggered)
            .map_err(|e| e.to_string())?;
        states.push(cur);
    }
    let expected = [
        ("0", vec!["0"], SIGMA.to_vec()),
        ("1", vec!["1", "2", "3", "4", "5", "6", "7"], SIGMA.to_vec()),
        (
            "2",
            vec!["2", "3", "4", "5", "6", "7"],
            vec!["a", "b", "u2"],
        ),
        ("5", vec!["5", "7"], vec!["a", "b", "u2"]),
        ("7", vec!["7"], SIGMA.to_vec()),
    ];
    ensure(states.len() == expected.len(), || {
        format!("{} states", states.len())
    })?;
    for (i, ((x, q, g), got)) in expected.iter().zip(&states).enumerate() {
        let want = EstimatorState::Tracking {
            plant: m.state_id(x).unwrap(),
            estimate: set(&m, q),
            decision: m.decision_from_names(g).unwrap(),
        };
        ensure(*got == want, || {
            format!("m{} = {got:?}, expected {want:?}", i + 1)
        })?;
    }
    let end = run_estimator(&m, &aug, ObservationTriggered).unwrap();
    ensure(end == states[4], || {
        "run_estimator disagrees with stepping".into()
    })?;
    Ok("m1..m5 match, ending at (7,{7},Σ)".into())
}

fn c2_controlled_vs_open_loop() -> Result<String, String> {
    let m = running_example();
    let a = m.parse_string("a").unwrap();
    let open = m
        .open_loop_estimate(&a, m.partitions().intruder_observable)
        .map_err(|e| e.to_string())?;
    ensure(
        open == set(&m, &["1", "2", "3", "4", "5", "6", "7"]),
        || format!("open-loop estimate {}", m.fmt_states(open)),
    )?;
    let flow = parse_trace(&m, include_str!("../../../fixtures/flow_example2.trace")).unwrap();
    let closed = estimate_from_flow(&m, &flow, ObservationTriggered).unwrap();
    ensure(closed == set(&m, &["7"]), || {
        format!("controlled estimate {}", m.fmt_states(closed))
    })?;
    Ok(format!(
        "open loop {}, controlled {}",
        m.fmt_states(open),
        m.fmt_states(closed)
    ))
}

fn c3_verdict_flip() -> Result<String, String> {
    let m = running_example();
    let leaky = verify_closed_loop_opacity(&m, &leaky_supervisor(&m), ObservationTriggered, 12)
        .map_err(|e| e.to_string())?;
    let cx = leaky
        .counterexample
        .ok_or("leaky supervisor verified opaque")?;
    ensure(m.fmt_string(&cx.string) == "a u1 u2 u2", || {
        format!("counterexample {}", m.fmt_string(&cx.string))
    })?;
    let sp = opaque_supervisor(&m);
    let fixed = verify_closed_loop_opacity(&m, &sp, ObservationTriggered, 12).unwrap();
    ensure(
        fixed.is_opaque() && fixed.scope == VerificationScope::Exact,
        || format!("S' verdict {fixed:?}"),
    )?;
    let flow = |t: &str| {
        let s = m.parse_string(t).unwrap();
        format_trace(
            &m,
            &information_flow(&m, &s, &sp, ObservationTriggered).unwrap(),
        )
    };
    let (f2, f1) = (flow("a u1 u2 u2"), flow("a u1 u2 u1"));
    ensure(f1 == f2, || format!("flows differ:\n{f2}\n{f1}"))?;
    Ok("S not opaque via a u1 u2 u2; S' opaque (exact); S' flows identical".into())
}

fn c4_decision_triggered_flip() -> Result<String, String> {
    let m = running_example();
    let flow = parse_trace(
        &m,
        include_str!("../../../fixtures/flow_decision_triggered.trace"),
    )
    .unwrap();
    let q = estimate_from_flow(&m, &flow, DecisionTriggered).unwrap();
    ensure(q == set(&m, &["5", "6", "7"]), || {
        format!("estimate {}", m.fmt_states(q))
    })?;
    let v = verify_closed_loop_opacity(&m, &leaky_supervisor(&m), DecisionTriggered, 12).unwrap();
    ensure(v.is_opaque() && v.scope == VerificationScope::Exact, || {
        format!("{v:?}")
    })?;
    Ok("estimate {5,6,7}; leaky supervisor opaque under decision-triggered issuance".into())
}

fn c5_algorithm_on_running_example() -> Result<String, String> {
    let m = running_example();
    let run = synthesize(&m, &SynthesisConfig::default()).map_err(|e| e.to_string())?;
    let u2 = m.event_id("u2").unwrap();
    let stuck = info_state(&m, &[("5", &["5", "7"])], &["a", "b", "u2"]);
    let d = run
        .arena
        .find_decision_state(&stuck, Some(u2))
        .ok_or("named decision state missing")?;
    let o = run
        .arena
        .find_observation_state(&stuck)
        .ok_or("named observation state missing")?;
    let rounds = &run.trace.rounds;
    ensure(rounds.len() == 2, || {
        format!("{} pruning rounds", rounds.len())
    })?;
    ensure(
        rounds[0].decision_states.contains(&d) && rounds[0].observation_states.is_empty(),
        || "first round is not the named decision state".into(),
    )?;
    ensure(
        rounds[1].observation_states.contains(&o) && rounds[1].decision_states.is_empty(),
        || "second round is not the named observation state".into(),
    )?;
    for &pd in &rounds[0].decision_states {
        let ds = &run.arena.decision_states[pd];
        ensure(ds.event == Some(u2) && ds.edges.is_empty(), || {
            format!("pruned decision state {pd} is not a dead u2 decision state")
        })?;
    }
    for &po in &rounds[1].observation_states {
        ensure(
            run.arena.observation_states[po]
                .transitions
                .iter()
                .any(|&(_, d)| rounds[0].decision_states.contains(&d)),
            || format!("pruned observation state {po} does not lead to a dead decision state"),
        )?;
    }

    // The opaque supervisor must appear in the uncapped enumeration.
    let sp = opaque_supervisor(&m);
    let observations: Vec<_> = observation_strings(&m, 4)
        .into_iter()
        .filter(|a| supervisor_estimate(&m, &sp, a).is_ok())
        .collect();
    let all_obs = observation_strings(&m, 4);
    let mut distinct = 0usize;
    let mut position = None;
    for (i, ex) in StructureEnumerator::new(&run.arena).enumerate() {
        distinct += 1;
        let s = &ex.structure;
        let same = observations.iter().all(|a| s.decide(a) == sp.decide(a))
            && all_obs
                .iter()
                .all(|a| s.decide(a).is_some() == observations.contains(a));
        if same {
            position = Some(i);
            break;
        }
    }
    let position = position.ok_or("no enumerated structure decodes to S'")?;
    ensure(distinct >= 2, || "fewer than two structures".into())?;
    Ok(format!(
        "pruned {} decision states then {} observation states; S' is enumerated structure #{}",
        rounds[0].decision_states.len(),
        rounds[1].observation_states.len(),
        position + 1
    ))
}

/// Shared driver for criterion 6: every closed-loop string of length at most
/// 6 under random tables on 500 random models, in both modes.
struct OracleTally {
    checks: usize,
    estimator_vs_flow: usize,
    literal_mismatches: usize,
    unexplained: usize,
    complete_mismatches: usize,
}

fn oracle_tally() -> OracleTally {
    let cfg = RandomModelConfig::default();
    let mut r = rng(0x6);
    let mut t = OracleTally {
        checks: 0,
        estimator_vs_flow: 0,
        literal_mismatches: 0,
        unexplained: 0,
        complete_mismatches: 0,
    };
    for _ in 0..500 {
        let m = random_model(&mut r, &cfg);
        let p = random_policy(&mut r, &m, 3);
        for mode in IssuanceMode::ALL {
            for s in closed_loop_strings(&m, &p, 6) {
                let aug = augment(&m, &s, &p).unwrap();
                let flow = flow_of_augmented(&m, &aug, mode).unwrap();
                let run = run_estimator(&m, &aug, mode).unwrap().estimate().unwrap();
                let fe = estimate_from_flow(&m, &flow, mode).unwrap();
                let literal = oracle_controlled_estimate(&m, &flow, mode, 6);
                // Between two consumed pairs a shortest decoration repeats no
                // plant state, so |α|·|X| steps reach every decoration end.
                let complete =
                    oracle_controlled_estimate(&m, &flow, mode, flow.len() * m.num_states());
                t.checks += 1;
                t.estimator_vs_flow += usize::from(run != fe);
                if literal != fe {
                    t.literal_mismatches += 1;
                    t.unexplained += usize::from(!literal.is_subset(fe));
                }
                t.complete_mismatches += usize::from(complete != fe);
            }
        }
    }
    t
}

fn c6_literal() -> Result<String, String> {
    let t = oracle_tally();
    let summary = format!(
        "{} checks; run_estimator vs estimate_from_flow: {} mismatches; oracle at bound 6: {} mismatches ({} not a strict subset)",
        t.checks, t.estimator_vs_flow, t.literal_mismatches, t.unexplained
    );
    if t.estimator_vs_flow == 0 && t.literal_mismatches == 0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c6_complete_bound() -> Result<String, String> {
    let t = oracle_tally();
    ensure(t.checks > 0, || "no strings generated".into())?;
    ensure(t.estimator_vs_flow == 0, || {
        format!("{} estimator/flow mismatches", t.estimator_vs_flow)
    })?;
    ensure(t.unexplained == 0, || {
        format!(
            "{} bound-6 oracle results outside the estimate",
            t.unexplained
        )
    })?;
    ensure(t.complete_mismatches == 0, || {
        format!("{} mismatches at the complete bound", t.complete_mismatches)
    })?;
    Ok(format!(
        "{} checks, 0 mismatches with bound |α|·|X|; every bound-6 shortfall is a strict subset",
        t.checks
    ))
}

/// Generator settings for the structure-level criteria: at least three states
/// so that most instances have something to observe.
fn structured_config() -> RandomModelConfig {
    RandomModelConfig {
        min_states: 3,
        ..RandomModelConfig::default()
    }
}

/// Solved (model, mode) instances from the seeded generator whose structure
/// has more than one observation state.
fn solved_instances(
    seed: u64,
    wanted: usize,
    policy: ExtractionPolicy,
) -> Vec<(PlantModel, IssuanceMode, opacity_core::ControlStructure)> {
    let cfg = structured_config();
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < wanted {
        let m = random_model(&mut r, &cfg);
        for mode in IssuanceMode::ALL {
            let sc = SynthesisConfig::default()
                .with_mode(mode)
                .with_policy(policy);
            let run = synthesize(&m, &sc).unwrap();
            match run.outcome.first() {
                Some(s) if s.observation_states.len() > 1 => out.push((m.clone(), mode, s.clone())),
                _ => {}
            }
        }
    }
    out
}

fn c7_information_state_semantics() -> Result<String, String> {
    let mut observations = 0usize;
    let instances = solved_instances(0x7, 100, ExtractionPolicy::FirstFeasible);
    for (k, (m, mode, s)) in instances.iter().enumerate() {
        let strings = closed_loop_strings(m, s, 6);
        for alpha in observation_strings(m, 4) {
            let decoded = s.run(&alpha);
            let estimate = supervisor_estimate(m, s, &alpha);
            ensure(decoded.is_ok() == estimate.is_ok(), || {
                format!(
                    "instance {k}: feasibility differs on {}",
                    m.fmt_string(&alpha)
                )
            })?;
            let (Ok(r), Ok(x)) = (decoded, estimate) else {
                continue;
            };
            observations += 1;
            let info = &s.observation_states[r.observation_state].info;
            ensure(info.plant_states() == x, || {
                format!("instance {k}: X differs on {}", m.fmt_string(&alpha))
            })?;
            let brute = estimator_states_for_observation(m, s, *mode, &alpha);
            let members: std::collections::BTreeSet<_> = info.members().iter().copied().collect();
            ensure(members == brute, || {
                format!("instance {k}: members differ on {}", m.fmt_string(&alpha))
            })?;
            let mut q: Vec<StateSet> = brute.iter().filter_map(|b| b.estimate()).collect();
            q.sort_unstable();
            q.dedup();
            ensure(info.estimates() == q, || format!("instance {k}: Q differs"))?;
            let obs = m.partitions().supervisor_observable;
            for st in strings
                .iter()
                .filter(|st| opacity_core::reach::project(st, obs) == alpha)
            {
                let end = run_estimator(m, &augment(m, st, s).unwrap(), *mode).unwrap();
                ensure(info.contains(&end), || {
                    format!("instance {k}: string {} escapes", m.fmt_string(st))
                })?;
            }
        }
    }
    Ok(format!(
        "{} structures, {} observations, 0 mismatches",
        instances.len(),
        observations
    ))
}

fn c8_soundness() -> Result<String, String> {
    let mut structures = 0;
    for policy in [
        ExtractionPolicy::FirstFeasible,
        ExtractionPolicy::LocallyMaximal,
    ] {
        for (k, (m, mode, s)) in solved_instances(0x8, 200, policy).iter().enumerate() {
            let exact = verify_structure_opacity(m, s).map_err(|e| e.to_string())?;
            ensure(exact.is_opaque(), || {
                format!("{policy} instance {k} ({mode}): {exact:?}")
            })?;
            let bounded = verify_closed_loop_opacity(m, s, *mode, 8).map_err(|e| e.to_string())?;
            ensure(bounded.is_opaque(), || {
                format!("{policy} instance {k} ({mode}): {bounded:?}")
            })?;
            structures += 1;
        }
    }
    Ok(format!(
        "{structures} structures verified opaque (exact product and bounded search)"
    ))
}

fn c9_completeness_proxy() -> Result<String, String> {
    let cfg = structured_config();
    let mut r = rng(0x9);
    let (mut decided, mut solvable, mut skipped, mut drawn) = (0, 0, 0, 0);
    while decided < 60 {
        drawn += 1;
        let m = random_model(&mut r, &cfg);
        for mode in IssuanceMode::ALL {
            let sc = SynthesisConfig {
                size_guard: 5_000,
                ..SynthesisConfig::default().with_mode(mode)
            };
            let raw = match expand_arena(&m, &sc) {
                Ok(a) => a,
                Err(Error::SizeGuard { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.to_string()),
            };
            let exhaustive = exhaustive_complete_structure(&raw, 200_000);
            if exhaustive == Exhaustive::OverBudget {
                skipped += 1;
                continue;
            }
            let solved = synthesize(&m, &sc).unwrap().outcome.is_solved();
            let exists = matches!(exhaustive, Exhaustive::Found(_));
            ensure(solved == exists, || {
                format!("instance {drawn} ({mode}): synthesis {solved}, exhaustive {exists}")
            })?;
            decided += 1;
            solvable += usize::from(exists);
        }
    }
    ensure(solvable > 0 && solvable < decided, || {
        "sample lacks one of the two outcomes".into()
    })?;
    Ok(format!(
        "{decided} instances ({solvable} solvable, {} unsolvable), {skipped} skipped, 0 mismatches",
        decided - solvable
    ))
}

fn c10_complexity_guard() -> Result<String, String> {
    let m = running_example();
    let tight = SynthesisConfig {
        size_guard: 50,
        ..SynthesisConfig::default()
    };
    match synthesize(&m, &tight) {
        Err(Error::SizeGuard { limit: 50, .. }) => {}
        other => {
            return Err(format!(
                "expected size guard error, got {:?}",
                other.map(|s| s.expanded)
            ))
        }
    }
    let mut lines = Vec::new();
    for mode in IssuanceMode::ALL {
        let sizes: Vec<usize> = (2..=6)
            .map(|n| {
                let run = synthesize(
                    &scaling_family(n),
                    &SynthesisConfig::default().with_mode(mode),
                )
                .unwrap();
                run.expanded.decision_states + run.expanded.observation_states
            })
            .collect();
        ensure(sizes.windows(2).all(|w| w[0] < w[1]), || {
            format!("{mode}: {sizes:?} not increasing")
        })?;
        lines.push(format!("{mode} {sizes:?}"));
    }
    Ok(format!(
        "size guard trips; arena sizes for n=2..6: {}",
        lines.join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: "1",
            limit: Duration::from_secs(1),
            check: c1_estimator_trace,
            known_red: false,
        },
        Criterion {
            id: "2",
            limit: Duration::from_secs(1),
            check: c2_controlled_vs_open_loop,
            known_red: false,
        },
        Criterion {
            id: "3",
            limit: Duration::from_secs(1),
            check: c3_verdict_flip,
            known_red: false,
        },
        Criterion {
            id: "4",
            limit: Duration::from_secs(1),
            check: c4_decision_triggered_flip,
            known_red: false,
        },
        Criterion {
            id: "5",
            limit: Duration::from_secs(10),
            check: c5_algorithm_on_running_example,
            known_red: false,
        },
        Criterion {
            id: "6",
            limit: Duration::from_secs(300),
            check: c6_literal,
            known_red: true,
        },
        Criterion {
            id: "6 (complete oracle bound)",
            limit: Duration::from_secs(300),
            check: c6_complete_bound,
            known_red: false,
        },
        Criterion {
            id: "7",
            limit: Duration::from_secs(300),
            check: c7_information_state_semantics,
            known_red: false,
        },
        Criterion {
            id: "8",
            limit: Duration::from_secs(600),
            check: c8_soundness,
            known_red: false,
        },
        Criterion {
            id: "9",
            limit: Duration::from_secs(600),
            check: c9_completeness_proxy,
            known_red: false,
        },
        Criterion {
            id: "10",
            limit: Duration::from_secs(60),
            check: c10_complexity_guard,
            known_red: false,
        },
    ];
    let mut unexpected = 0;
    for c in criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let (verdict, detail) = match result {
            Ok(d) if elapsed <= c.limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("too slow, limit {:?}; {d}", c.limit)),
            Err(d) => ("FAIL", d),
        };
        let note = if verdict == "FAIL" && c.known_red {
            " [known: the bound-6 oracle misses decorations longer than 6 steps]"
        } else {
            ""
        };
        if verdict == "FAIL" && !c.known_red {
            unexpected += 1;
        }
        println!(
            "criterion {}: {verdict} ({:.2?}) {detail}{note}",
            c.id, elapsed
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}
