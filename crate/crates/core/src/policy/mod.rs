//! Policies under test.
//!
//! A [`Policy`] is immutable and shared across workers. Each episode opens
//! its own [`PolicySession`], which owns any per-episode memory such as the
//! observation history.

pub mod history;
pub mod latents;
pub mod moe;
pub mod nn;
pub mod scripted;
pub mod weights;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::goals::CommandTriple;
use crate::robot::JointArray;
use crate::sim::Observation;

pub use history::ObservationHistory;
pub use latents::{pca_project, LatentRecorder, LatentRow};
pub use moe::{load_balance_diagnostic, softmax, MoEArch, MoEOutput, MoEPolicy};
pub use nn::{Activation, Linear, Mlp};
pub use scripted::{scripted_policy, ScriptedKind, ScriptedPolicy};

/// What a policy sees at one control step.
#[derive(Clone, Copy, Debug)]
pub struct PolicyInput<'a> {
    pub obs: &'a Observation,
    pub cmd: CommandTriple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSample {
    pub z: Vec<f64>,
    pub gate: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutput {
    pub action: JointArray,
    pub latent: Option<LatentSample>,
}

pub trait PolicySession {
    fn act(&mut self, input: &PolicyInput<'_>) -> Result<PolicyOutput>;
}

pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    fn session(&self, control_dt: f64) -> Result<Box<dyn PolicySession + '_>>;
}
