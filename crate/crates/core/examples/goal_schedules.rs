//! Prints the command schedules of the three evaluation goals.

use locobench::goals::{build_goal, GoalConfig, GoalKind};
use locobench::terrain::TerrainKind;

fn main() -> locobench::Result<()> {
    let cfg = GoalConfig::default();
    for terrain in [TerrainKind::Flat, TerrainKind::StairsUp] {
        let limits = cfg.limits_for(terrain);
        println!("== {terrain}: limits vx={} vy={} wz={}", limits.vx, limits.vy, limits.wz);
        for kind in GoalKind::ALL {
            let schedule = build_goal(kind, limits, &cfg);
            println!("{kind}: {} trial(s)", schedule.trials.len());
            for (i, trial) in schedule.trials.iter().enumerate().take(2) {
                println!("  trial {i}: {}", serde_json::to_string(&trial.segments)?);
            }
        }
    }
    Ok(())
}
