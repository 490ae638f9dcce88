//! Opacity verification and opacity-enforcing supervisor synthesis for
//! partially observed discrete-event systems, against an intruder that also
//! sees the supervisor's online control decisions.

pub mod closed_loop;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod info_state;
pub mod intruder;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod random;
pub mod reach;
pub mod report;
pub mod sets;
pub mod structure;
pub mod synthesis;

pub use closed_loop::{ClosedLoopVerdict, VerificationScope};
pub use error::{Error, Result};
pub use info_state::InformationState;
pub use intruder::{AugmentedEvent, Estimator, EstimatorState, IssuanceMode, ObservationPair};
pub use model::{Decision, EventPartitions, ModelDocument, PlantModel};
pub use policy::{SupervisorPolicy, TabularPolicy};
pub use reach::OpenLoopVerdict;
pub use sets::{EventId, EventSet, StateId, StateSet};
pub use structure::ControlStructure;
pub use synthesis::{synthesize, ExtractionPolicy, Synthesis, SynthesisConfig, SynthesisOutcome};
