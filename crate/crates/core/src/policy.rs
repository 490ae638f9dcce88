//! Supervisor policies: maps from the supervisor's observation string to a
//! control decision.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Decision, PlantModel};
use crate::sets::EventId;

/// A partial-observation supervisor `S : P_o(L(G)) → Γ`.
///
/// `None` means the policy is undefined on that observation, which only
/// happens for control structures queried outside their feasible observations.
pub trait SupervisorPolicy {
    fn decide(&self, observation: &[EventId]) -> Option<Decision>;
}

impl<P: SupervisorPolicy + ?Sized> SupervisorPolicy for &P {
    fn decide(&self, observation: &[EventId]) -> Option<Decision> {
        (**self).decide(observation)
    }
}

/// Any closure over observations is a policy.
pub struct FnPolicy<F>(pub F);

impl<F: Fn(&[EventId]) -> Option<Decision>> SupervisorPolicy for FnPolicy<F> {
    fn decide(&self, observation: &[EventId]) -> Option<Decision> {
        (self.0)(observation)
    }
}

/// Finite table of observation strings with a default decision for every
/// unlisted observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabularPolicy {
    entries: BTreeMap<Vec<EventId>, Decision>,
    default: Decision,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabularDocument {
    format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<Vec<String>>,
    decisions: Vec<TabularEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabularEntry {
    observation: Vec<String>,
    decision: Vec<String>,
}

pub const TABULAR_FORMAT: &str = "tabular-policy";

impl TabularPolicy {
    pub fn new(default: Decision) -> Self {
        TabularPolicy {
            entries: BTreeMap::new(),
            default,
        }
    }

    /// The constant policy `S ≡ Σ`.
    pub fn permissive(model: &PlantModel) -> Self {
        Self::new(model.full_decision())
    }

    pub fn set(&mut self, observation: Vec<EventId>, decision: Decision) {
        self.entries.insert(observation, decision);
    }

    pub fn default_decision(&self) -> Decision {
        self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[EventId], Decision)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn from_json(text: &str, model: &PlantModel) -> Result<Self> {
        let doc: TabularDocument = serde_json::from_str(text).map_err(|e| Error::syntax(&e))?;
        if doc.format != TABULAR_FORMAT {
            return Err(Error::InvalidPolicy(format!(
                "expected format `{TABULAR_FORMAT}`, found `{}`",
                doc.format
            )));
        }
        let default = match doc.default {
            Some(names) => model.decision_from_names(&names)?,
            None => model.full_decision(),
        };
        let mut policy = TabularPolicy::new(default);
        for entry in doc.decisions {
            let obs = entry
                .observation
                .iter()
                .map(|n| {
                    let e = model.event_id(n)?;
                    if model.is_supervisor_observable(e) {
                        Ok(e)
                    } else {
                        Err(Error::InvalidPolicy(format!(
                            "event `{n}` in an observation is not supervisor-observable"
                        )))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let decision = model.decision_from_names(&entry.decision)?;
            if policy.entries.insert(obs, decision).is_some() {
                return Err(Error::InvalidPolicy(format!(
                    "observation {:?} listed twice",
                    entry.observation
                )));
            }
        }
        Ok(policy)
    }

    pub fn to_json(&self, model: &PlantModel) -> String {
        let doc = TabularDocument {
            format: TABULAR_FORMAT.to_string(),
            default: Some(model.event_names(self.default.events())),
            decisions: self
                .entries
                .iter()
                .map(|(obs, d)| TabularEntry {
                    observation: obs
                        .iter()
                        .map(|&e| model.event_name(e).to_string())
                        .collect(),
                    decision: model.event_names(d.events()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("policy serializes")
    }
}

impl SupervisorPolicy for TabularPolicy {
    fn decide(&self, observation: &[EventId]) -> Option<Decision> {
        Some(
            self.entries
                .get(observation)
                .copied()
                .unwrap_or(self.default),
        )
    }
}
