//! Binary level search against the reference backend with a per-terrain
//! capability profile, checked against a linear scan of every level.

use std::sync::Arc;

use locobench::goals::GoalConfig;
use locobench::pipelines::level::{binary_search_level, linear_scan_level, pass_outcomes, LevelPlan};
use locobench::pipelines::EvalContext;
use locobench::policy::{scripted_policy, ScriptedKind};
use locobench::robot::RobotDescription;
use locobench::scoring::MAX_LEVEL;
use locobench::sim::reference::{CapabilityProfile, ReferenceConfig, ReferenceFactory};
use locobench::sim::{DomainRandomization, SimConfig};
use locobench::terrain::TerrainKind;

fn main() -> locobench::Result<()> {
    let profile = CapabilityProfile::uniform(10)
        .with_level(TerrainKind::StairsUp, 4)
        .with_level(TerrainKind::Obstacle, 7);
    let backend = ReferenceFactory::new(ReferenceConfig {
        capability: profile,
        ..ReferenceConfig::default()
    });
    let policy = scripted_policy(ScriptedKind::TrotTracker);
    let robot = Arc::new(RobotDescription::go2());
    let (sim, goals) = (SimConfig::default(), GoalConfig::default());
    let ctx = EvalContext {
        backend: &backend,
        policy: &policy,
        robot: &robot,
        sim: &sim,
        goals: &goals,
        normalization: None,
        keep_traces: false,
        record_latents: false,
    };
    let plan = LevelPlan::default();
    let dr = DomainRandomization::nominal();
    for terrain in [TerrainKind::Flat, TerrainKind::StairsUp, TerrainKind::Obstacle] {
        let mut calls = 0;
        let mut pass = |level: u8| {
            calls += 1;
            Ok(plan.pass_rule.passes(&pass_outcomes(&ctx, &plan, terrain, 0, &dr, level)?))
        };
        let found = binary_search_level(MAX_LEVEL, &mut pass)?;
        let scanned = linear_scan_level(MAX_LEVEL, &mut |level| {
            Ok(plan.pass_rule.passes(&pass_outcomes(&ctx, &plan, terrain, 0, &dr, level)?))
        })?;
        println!("{:<10} L*={found} (linear scan {scanned}) after {calls} level probes", terrain.as_str());
    }
    Ok(())
}
