//! Seeded random instances for property tests and the CLI `random` model.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ModelDocument, Name, PlantModel};
use crate::policy::TabularPolicy;
use crate::sets::EventId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModelConfig {
    pub min_states: usize,
    pub max_states: usize,
    pub min_events: usize,
    pub max_events: usize,
    /// Probability that a given (state, event) pair has a transition.
    pub density: f64,
    /// Probability that a state is secret (the initial state included).
    pub secret_ratio: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            min_states: 2,
            max_states: 5,
            min_events: 1,
            max_events: 4,
            density: 0.6,
            secret_ratio: 0.3,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(prefix: &str, n: usize) -> Vec<Name> {
    (0..n).map(|i| Name::Text(format!("{prefix}{i}"))).collect()
}

/// A random deterministic plant with independent random partitions.
pub fn random_model(rng: &mut impl Rng, cfg: &RandomModelConfig) -> PlantModel {
    let n = rng.gen_range(cfg.min_states..=cfg.max_states);
    let k = rng.gen_range(cfg.min_events..=cfg.max_events);
    let states = names("s", n);
    let events = names("e", k);
    let mut transitions = Vec::new();
    for x in &states {
        for e in &events {
            if rng.gen_bool(cfg.density) {
                let y = rng.gen_range(0..n);
                transitions.push((x.clone(), e.clone(), states[y].clone()));
            }
        }
    }
    let mut pick = |pool: &[Name], p: f64| -> Vec<Name> {
        pool.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
    };
    let secret = pick(&states, cfg.secret_ratio);
    let doc = ModelDocument {
        observable_supervisor: pick(&events, 0.5),
        observable_intruder: pick(&events, 0.5),
        controllable: pick(&events, 0.5),
        states,
        events,
        initial: Name::Text("s0".into()),
        secret,
        transitions,
    };
    PlantModel::from_document(doc).expect("generated models are valid")
}

/// A random tabular policy over observation strings up to `depth`, each entry
/// present with probability one half, with a random default.
pub fn random_policy(rng: &mut impl Rng, model: &PlantModel, depth: usize) -> TabularPolicy {
    let decisions = model.decisions();
    let observable: Vec<EventId> = model.partitions().supervisor_observable.iter().collect();
    let mut policy = TabularPolicy::new(*decisions.choose(rng).expect("Γ is nonempty"));
    let mut layer = vec![Vec::<EventId>::new()];
    for len in 0..=depth {
        let mut next = Vec::new();
        for obs in &layer {
            if rng.gen_bool(0.5) {
                policy.set(obs.clone(), *decisions.choose(rng).expect("Γ is nonempty"));
            }
            if len < depth {
                for &e in &observable {
                    let mut longer = obs.clone();
                    longer.push(e);
                    next.push(longer);
                }
            }
        }
        layer = next;
    }
    policy
}

/// A parameterized family whose arena grows with `n` (at least 2): a chain
/// advanced by a supervisor-observable `step` and a hidden `skip` over two
/// states, both controllable, plus an uncontrollable `reset` to the start
/// that only the intruder sees. The last state is secret.
pub fn scaling_family(n: usize) -> PlantModel {
    assert!(n >= 2, "family starts at two states");
    let states = names("s", n);
    let ev = |s: &str| Name::Text(s.into());
    let mut transitions = Vec::new();
    for i in 0..n {
        if i + 1 < n {
            transitions.push((states[i].clone(), ev("step"), states[i + 1].clone()));
        }
        if i + 2 < n {
            transitions.push((states[i].clone(), ev("skip"), states[i + 2].clone()));
        }
        transitions.push((states[i].clone(), ev("reset"), states[0].clone()));
    }
    let doc = ModelDocument {
        states: states.clone(),
        events: vec![ev("step"), ev("skip"), ev("reset")],
        initial: states[0].clone(),
        secret: vec![states[n - 1].clone()],
        transitions,
        observable_supervisor: vec![ev("step")],
        observable_intruder: vec![ev("reset")],
        controllable: vec![ev("step"), ev("skip")],
    };
    PlantModel::from_document(doc).expect("family members are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let cfg = RandomModelConfig::default();
        let a = random_model(&mut rng(7), &cfg);
        let b = random_model(&mut rng(7), &cfg);
        assert_eq!(a.to_json(), b.to_json());
        let pa = random_policy(&mut rng(3), &a, 2);
        let pb = random_policy(&mut rng(3), &a, 2);
        assert_eq!(pa, pb);
    }

    #[test]
    fn generated_models_respect_bounds() {
        let cfg = RandomModelConfig::default();
        let mut r = rng(1);
        for _ in 0..200 {
            let m = random_model(&mut r, &cfg);
            assert!((2..=5).contains(&m.num_states()));
            assert!((1..=4).contains(&m.num_events()));
        }
    }

    #[test]
    fn family_sizes() {
        for n in 2..=6 {
            let m = scaling_family(n);
            assert_eq!(m.num_states(), n);
            assert_eq!(m.transitions().len(), 3 * n - 3);
        }
    }
}
