//! The running example plant and the two tabular supervisors used throughout
//! the tests and the documentation.

use crate::info_state::InformationState;
use crate::intruder::EstimatorState;
use crate::model::PlantModel;
use crate::policy::TabularPolicy;

pub const RUNNING_EXAMPLE: &str = include_str!("../../../fixtures/run.json");
pub const SUPERVISOR_LEAKY: &str = include_str!("../../../fixtures/srun.json");
pub const SUPERVISOR_OPAQUE: &str = include_str!("../../../fixtures/srun_prime.json");

pub fn running_example() -> PlantModel {
    PlantModel::from_json(RUNNING_EXAMPLE).expect("bundled model parses")
}

/// Supervisor that disables `u1,u3` after `u1` and `u1 u2`, `u2,u3` after `u2`
/// and `u2 u1`, and enables everything otherwise. Leaks state 7 under
/// observation-triggered issuance.
pub fn leaky_supervisor(model: &PlantModel) -> TabularPolicy {
    TabularPolicy::from_json(SUPERVISOR_LEAKY, model).expect("bundled policy parses")
}

/// The leaky supervisor with the decision after `u1 u2` relaxed to Σ.
pub fn opaque_supervisor(model: &PlantModel) -> TabularPolicy {
    TabularPolicy::from_json(SUPERVISOR_OPAQUE, model).expect("bundled policy parses")
}

/// Builds a consistent information state from `(plant, estimate)` pairs and
/// their shared decision, all by name. Panics on unknown names.
pub fn info_state(
    model: &PlantModel,
    members: &[(&str, &[&str])],
    decision: &[&str],
) -> InformationState {
    let decision = model.decision_from_names(decision).expect("valid decision");
    InformationState::new(
        members
            .iter()
            .map(|&(x, q)| EstimatorState::Tracking {
                plant: model.state_id(x).expect("known state"),
                estimate: model.state_set(q).expect("known states"),
                decision,
            })
            .collect(),
    )
}
