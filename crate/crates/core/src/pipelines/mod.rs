//! Evaluation orchestration.
//!
//! * [`base`] runs one goal on one terrain/DR/level cell;
//! * [`level`] finds the highest passing level by binary search;
//! * [`pool`] fans independent jobs out over worker threads;
//! * [`stress`] sweeps every terrain and DR preset into a [`ScoreTree`](crate::scoring::ScoreTree);
//! * [`manifest`] records what a run did so it can be repeated.

pub mod base;
pub mod level;
pub mod manifest;
pub mod pool;
pub mod seeds;
pub mod stress;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::goals::{GoalConfig, GoalKind};
use crate::metrics::NormalizationConfig;
use crate::policy::Policy;
use crate::robot::RobotDescription;
use crate::sim::{BackendFactory, DomainRandomization, SimConfig};
use crate::terrain::TerrainKind;

pub use base::{base_pipeline, GoalOutcome, TrialOutcome};
pub use level::{binary_search_level, level_pipeline, linear_scan_level, LevelPlan};
pub use manifest::RunManifest;
pub use pool::{run_pool, JobFailure, ProgressEvent, ProgressSink};
pub use seeds::derive_seed;
pub use stress::{dr_presets, stress_pipeline, DrSet, StressPlan};

/// Shared, read-only inputs of every evaluation.
#[derive(Clone, Copy)]
pub struct EvalContext<'a> {
    pub backend: &'a dyn BackendFactory,
    pub policy: &'a dyn Policy,
    pub robot: &'a Arc<RobotDescription>,
    pub sim: &'a SimConfig,
    pub goals: &'a GoalConfig,
    /// Overrides the per-terrain normalization defaults.
    pub normalization: Option<&'a NormalizationConfig>,
    pub keep_traces: bool,
    pub record_latents: bool,
}

impl EvalContext<'_> {
    pub fn normalization_for(&self, kind: TerrainKind) -> NormalizationConfig {
        match self.normalization {
            Some(n) => *n,
            None => NormalizationConfig::from_limits(&self.goals.limits_for(kind)),
        }
    }
}

/// One terrain/DR/level/goal/seed combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationCell {
    pub terrain: TerrainKind,
    pub level: u8,
    pub dr_index: usize,
    pub dr: DomainRandomization,
    pub goal: GoalKind,
    pub seed: u64,
    pub terrain_seed: u64,
}

impl EvaluationCell {
    pub fn key(&self) -> String {
        format!("{}/dr{:02}/L{}/{}/{:016x}", self.terrain, self.dr_index, self.level, self.goal, self.seed)
    }
}
