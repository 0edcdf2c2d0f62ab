//! Full terrain × DR sweep assembled into a [`ScoreTree`].

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::level::{level_pipeline, LevelPlan};
use super::pool::{run_pool, ProgressSink};
use super::EvalContext;
use crate::error::{Error, Result};
use crate::scoring::{dr_key, CellError, CellNode, ScoreTree, TerrainNode, TreeMeta};
use crate::sim::DomainRandomization;
use crate::terrain::TerrainKind;

/// Which domain-randomization presets a sweep visits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrSet {
    /// Friction 0.2, 0.3, ..., 1.0 with every other term nominal.
    #[default]
    Default9,
    /// Friction 0.1, 0.2, ..., 1.0.
    FrictionSweep10,
    /// Nominal dynamics only.
    Nominal,
}

impl FromStr for DrSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default9" | "default" => Ok(DrSet::Default9),
            "friction_sweep10" | "sweep" => Ok(DrSet::FrictionSweep10),
            "nominal" => Ok(DrSet::Nominal),
            other => Err(Error::Unknown {
                what: "dr set",
                value: other.into(),
            }),
        }
    }
}

/// Labelled presets of a DR set, in canonical order.
pub fn dr_presets(set: DrSet) -> Vec<(String, DomainRandomization)> {
    let frictions: Vec<u32> = match set {
        DrSet::Default9 => (2..=10).collect(),
        DrSet::FrictionSweep10 => (1..=10).collect(),
        DrSet::Nominal => vec![10],
    };
    frictions
        .into_iter()
        .map(|f| {
            let mu = f64::from(f) / 10.0;
            (format!("friction={mu:.1}"), DomainRandomization::with_friction(mu))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StressPlan {
    pub terrains: Vec<TerrainKind>,
    pub dr_set: DrSet,
    pub level: LevelPlan,
    pub workers: usize,
}

impl Default for StressPlan {
    fn default() -> Self {
        StressPlan {
            terrains: TerrainKind::EVALUATION.to_vec(),
            dr_set: DrSet::Default9,
            level: LevelPlan::default(),
            workers: 1,
        }
    }
}

impl StressPlan {
    pub fn validate(&self) -> Result<()> {
        if self.terrains.is_empty() {
            return Err(Error::Empty("terrain set"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "at least one worker is required"));
        }
        if self.level.metric_seeds == 0 {
            return Err(Error::param("metric_seeds", "at least one metric seed is required"));
        }
        if self.level.goals.is_empty() {
            return Err(Error::Empty("goal set"));
        }
        self.level.pass_rule.validate()?;
        self.level.weights.validate()
    }

    /// `(terrain, dr index)` pairs in canonical order.
    pub fn jobs(&self) -> Vec<(TerrainKind, usize)> {
        let n = dr_presets(self.dr_set).len();
        self.terrains
            .iter()
            .flat_map(|&t| (0..n).map(move |j| (t, j)))
            .collect()
    }
}

/// Runs the level search and quality measurement for every terrain/DR pair.
/// Cells that fail twice are listed in `errors`; the aggregate scores are
/// left empty when anything is missing.
pub fn stress_pipeline(
    ctx: &EvalContext<'_>,
    plan: &StressPlan,
    config_hash: &str,
    progress: Option<ProgressSink<'_>>,
) -> Result<ScoreTree> {
    plan.validate()?;
    let presets = dr_presets(plan.dr_set);
    let jobs = plan.jobs();
    let results = run_pool(
        &jobs,
        plan.workers,
        |(t, j)| format!("{t}/{}", dr_key(*j)),
        |&(terrain, j)| level_pipeline(ctx, &plan.level, terrain, j, &presets[j].1),
        progress,
    );

    let mut terrains: BTreeMap<TerrainKind, TerrainNode> = plan
        .terrains
        .iter()
        .map(|&t| {
            (
                t,
                TerrainNode {
                    cells: BTreeMap::new(),
                    score: None,
                },
            )
        })
        .collect();
    let mut errors = Vec::new();
    for (&(terrain, j), result) in jobs.iter().zip(results) {
        match result {
            Ok(cell) => {
                let node: &mut TerrainNode = terrains.get_mut(&terrain).expect("terrain node exists");
                node.cells.insert(dr_key(j), cell);
            }
            Err(e) => errors.push(CellError {
                terrain,
                dr: dr_key(j),
                message: e.message,
            }),
        }
    }

    let meta = TreeMeta {
        engine_version: crate::ENGINE_VERSION.into(),
        config_hash: config_hash.into(),
        policy: ctx.policy.name(),
        backend: ctx.backend.describe(),
        seed_root: plan.level.seed_root,
        weights: plan.level.weights.clone(),
        aggregation: plan.level.aggregation,
        pass_rule: plan.level.pass_rule,
        metric_seeds: plan.level.metric_seeds,
        dr_labels: presets.iter().map(|(l, _)| l.clone()).collect(),
        normalization: plan.terrains.iter().map(|&t| (t, ctx.normalization_for(t))).collect(),
    };
    let mut tree = ScoreTree {
        meta,
        terrains,
        score: None,
        errors,
    };
    tree.refresh_aggregates();
    Ok(tree)
}

/// Levels found for each terrain, keyed by DR label, for quick inspection.
pub fn level_table(tree: &ScoreTree) -> BTreeMap<TerrainKind, Vec<u8>> {
    tree.terrains
        .iter()
        .map(|(k, n)| (*k, n.cells.values().map(|c: &CellNode| c.level).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_sets() {
        let d9 = dr_presets(DrSet::Default9);
        assert_eq!(d9.len(), 9);
        assert_eq!(d9[0].1.friction, 0.2);
        assert_eq!(d9[8].1.friction, 1.0);
        assert_eq!(d9[3].0, "friction=0.5");
        let s10 = dr_presets(DrSet::FrictionSweep10);
        assert_eq!(s10.len(), 10);
        assert_eq!(s10[0].1.friction, 0.1);
        for (_, dr) in d9.iter().chain(&s10) {
            dr.validate().unwrap();
        }
    }

    #[test]
    fn default_job_matrix_is_seven_by_nine() {
        let plan = StressPlan::default();
        let jobs = plan.jobs();
        assert_eq!(jobs.len(), 63);
        assert_eq!(jobs[0], (TerrainKind::EVALUATION[0], 0));
        assert_eq!(jobs[9], (TerrainKind::EVALUATION[1], 0));
    }
}
