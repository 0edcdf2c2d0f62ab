//! Records one episode, round-trips the trace through both file formats
//! and recomputes the six metrics from the reloaded copy.

use std::sync::Arc;

use locobench::goals::{GoalConfig, GoalKind};
use locobench::metrics::{compute_metrics, raw_metrics, NormalizationConfig, METRIC_NAMES};
use locobench::pipelines::base::{cell_terrain, run_trial};
use locobench::pipelines::{EvalContext, EvaluationCell};
use locobench::policy::{scripted_policy, ScriptedKind};
use locobench::robot::RobotDescription;
use locobench::sim::reference::ReferenceFactory;
use locobench::sim::{DomainRandomization, SimConfig};
use locobench::terrain::TerrainKind;
use locobench::trace::EpisodeTrace;

fn main() -> locobench::Result<()> {
    let backend = ReferenceFactory::default();
    let robot = Arc::new(RobotDescription::go2());
    let sim = SimConfig::default();
    let goals = GoalConfig::default();
    for kind in [ScriptedKind::TrotTracker, ScriptedKind::Faulty] {
        let policy = scripted_policy(kind);
        let ctx = EvalContext {
            backend: &backend,
            policy: &policy,
            robot: &robot,
            sim: &sim,
            goals: &goals,
            normalization: None,
            keep_traces: true,
            record_latents: false,
        };
        let cell = EvaluationCell {
            terrain: TerrainKind::Wave,
            level: 4,
            dr_index: 0,
            dr: DomainRandomization::nominal(),
            goal: GoalKind::MaxVelocity,
            seed: 5,
            terrain_seed: 5,
        };
        let terrain = cell_terrain(&cell)?;
        let schedule = locobench::goals::build_goal(cell.goal, goals.limits_for(cell.terrain), &goals);
        let (trace, _) = run_trial(&ctx, &cell, &terrain, &schedule.trials[0], 0, 9)?;

        let mut bin = Vec::new();
        trace.write_binary(&mut bin)?;
        let mut nd = Vec::new();
        trace.write_ndjson(&mut nd)?;
        let from_bin = EpisodeTrace::read_binary(&bin[..])?;
        let from_nd = EpisodeTrace::read_ndjson(&nd[..])?;

        let norm = NormalizationConfig::for_terrain(cell.terrain);
        let m = compute_metrics(&from_bin, &norm)?;
        assert_eq!(m, compute_metrics(&from_nd, &norm)?);
        println!("{kind}: {} steps, {} B binary, {} B ndjson", trace.len(), bin.len(), nd.len());
        println!("  raw {:?}", raw_metrics(&from_bin)?);
        for (name, v) in METRIC_NAMES.iter().zip(m.to_array()) {
            println!("  {name:<10} {v:.4}");
        }
    }
    Ok(())
}
