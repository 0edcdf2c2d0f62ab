//! Starts the echo bridge server on a local port and runs one goal through
//! it, exactly as an out-of-process physics backend would be used.

use std::sync::Arc;

use locobench::bridge::{spawn_stub, RemoteFactory, StubMode};
use locobench::goals::{GoalConfig, GoalKind};
use locobench::pipelines::{base_pipeline, EvalContext, EvaluationCell};
use locobench::policy::{scripted_policy, ScriptedKind};
use locobench::robot::RobotDescription;
use locobench::sim::{BackendFactory, DomainRandomization, SimConfig};
use locobench::terrain::TerrainKind;

fn main() -> locobench::Result<()> {
    let addr = spawn_stub(StubMode::Echo)?;
    let backend = RemoteFactory::new(addr.to_string());
    println!("backend: {}", backend.describe());
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
    let cell = EvaluationCell {
        terrain: TerrainKind::Flat,
        level: 1,
        dr_index: 0,
        dr: DomainRandomization::nominal(),
        goal: GoalKind::DiagonalVelocity,
        seed: 3,
        terrain_seed: 3,
    };
    let out = base_pipeline(&ctx, &cell)?;
    println!("{} trials, success={}", out.trials.len(), out.success);
    println!("worst50 {:?}", out.leaf.worst50.to_array());
    Ok(())
}
