//! Highest passing difficulty level for one terrain/DR pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::base::base_pipeline;
use super::seeds::{metric_seed, pass_seed, terrain_seed};
use super::{EvalContext, EvaluationCell};
use crate::error::Result;
use crate::goals::GoalKind;
use crate::metrics::Aggregation;
use crate::scoring::{cell_score, cell_vector, quality_score, CellNode, PassRule, ScoreWeights, MAX_LEVEL};
use crate::sim::DomainRandomization;
use crate::terrain::TerrainKind;

/// Binary search for the largest level in `1..=max` that passes, with
/// sentinels `0` (pass) and `max + 1` (fail). Returns 0 when level 1 fails.
///
/// Under a monotone predicate this is the linear-scan maximum. Otherwise the
/// result still passes (or is 0) and its successor fails (or it is `max`).
pub fn binary_search_level<F>(max: u8, pass: &mut F) -> Result<u8>
where
    F: FnMut(u8) -> Result<bool>,
{
    let (mut lo, mut hi) = (0u8, max + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pass(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest passing level found by testing every level.
pub fn linear_scan_level<F>(max: u8, pass: &mut F) -> Result<u8>
where
    F: FnMut(u8) -> Result<bool>,
{
    let mut best = 0;
    for level in 1..=max {
        if pass(level)? {
            best = level;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelPlan {
    pub seed_root: u64,
    pub pass_rule: PassRule,
    pub metric_seeds: usize,
    pub goals: Vec<GoalKind>,
    pub aggregation: Aggregation,
    pub weights: ScoreWeights,
}

impl Default for LevelPlan {
    fn default() -> Self {
        LevelPlan {
            seed_root: 0,
            pass_rule: PassRule::default(),
            metric_seeds: 3,
            goals: GoalKind::ALL.to_vec(),
            aggregation: Aggregation::Worst50,
            weights: ScoreWeights::default(),
        }
    }
}

/// Pass-seed outcomes of the target-position goal at one level.
pub fn pass_outcomes(
    ctx: &EvalContext<'_>,
    plan: &LevelPlan,
    terrain: TerrainKind,
    dr_index: usize,
    dr: &DomainRandomization,
    level: u8,
) -> Result<Vec<bool>> {
    (0..plan.pass_rule.seeds)
        .map(|s| {
            let cell = EvaluationCell {
                terrain,
                level,
                dr_index,
                dr: dr.clone(),
                goal: GoalKind::TargetPosition,
                seed: pass_seed(plan.seed_root, terrain, dr_index, level, s),
                terrain_seed: terrain_seed(plan.seed_root, terrain, level),
            };
            Ok(base_pipeline(ctx, &cell)?.success)
        })
        .collect()
}

/// Finds `L*` and measures quality there (at level 1 when nothing passes).
pub fn level_pipeline(
    ctx: &EvalContext<'_>,
    plan: &LevelPlan,
    terrain: TerrainKind,
    dr_index: usize,
    dr: &DomainRandomization,
) -> Result<CellNode> {
    plan.pass_rule.validate()?;
    plan.weights.validate()?;
    let mut pass_results = BTreeMap::new();
    let level = binary_search_level(MAX_LEVEL, &mut |l| {
        let outcomes = pass_outcomes(ctx, plan, terrain, dr_index, dr, l)?;
        let ok = plan.pass_rule.passes(&outcomes);
        pass_results.insert(l, outcomes);
        Ok(ok)
    })?;
    let quality_level = level.max(1);
    let mut goals = BTreeMap::new();
    for &goal in &plan.goals {
        let mut leaves = Vec::with_capacity(plan.metric_seeds);
        for s in 0..plan.metric_seeds {
            let cell = EvaluationCell {
                terrain,
                level: quality_level,
                dr_index,
                dr: dr.clone(),
                goal,
                seed: metric_seed(plan.seed_root, terrain, dr_index, quality_level, goal.as_str(), s),
                terrain_seed: terrain_seed(plan.seed_root, terrain, quality_level),
            };
            leaves.push(base_pipeline(ctx, &cell)?.leaf);
        }
        goals.insert(goal, leaves);
    }
    let vector = cell_vector(&goals, plan.aggregation, plan.metric_seeds)?;
    let quality = quality_score(&vector, &plan.weights.metric_weights)?;
    Ok(CellNode {
        dr: dr.clone(),
        pass_results,
        level,
        quality_level,
        goals,
        cell_vector: vector,
        quality,
        score: cell_score(level, quality, &plan.weights)?,
    })
}
