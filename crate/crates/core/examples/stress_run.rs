//! Full stress sweep of a scripted policy on the reference backend:
//! seven terrains times nine friction presets, printed as a summary table.
//!
//! ```text
//! cargo run --release --example stress_run -- 4
//! ```

use std::sync::Arc;

use locobench::goals::GoalConfig;
use locobench::pipelines::{stress_pipeline, EvalContext, StressPlan};
use locobench::policy::{scripted_policy, ScriptedKind};
use locobench::report::{radar_csv, render_table, summarize};
use locobench::robot::RobotDescription;
use locobench::sim::reference::{CapabilityProfile, ReferenceConfig, ReferenceFactory};
use locobench::sim::SimConfig;

fn main() -> locobench::Result<()> {
    let workers = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let backend = ReferenceFactory::new(ReferenceConfig {
        capability: CapabilityProfile {
            friction_sensitivity: 6.0,
            ..CapabilityProfile::uniform(8)
        },
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
    let plan = StressPlan {
        workers,
        ..StressPlan::default()
    };
    let tree = stress_pipeline(&ctx, &plan, "example", None)?;
    let summary = summarize(&[&tree]);
    print!("{}", render_table(&summary));
    print!("{}", radar_csv(&tree));
    for (terrain, levels) in locobench::pipelines::stress::level_table(&tree) {
        println!("{terrain:<12} levels by friction 0.2..1.0: {levels:?}");
    }
    Ok(())
}
