//! Replays every reward term over a recorded trot, for the multi-terrain
//! and the high-speed reward variants.

use std::sync::Arc;

use locobench::goals::CommandTriple;
use locobench::rewards::{episode_reward_report, hip_symmetry, RewardConfig};
use locobench::robot::RobotDescription;
use locobench::sim::gait::TrotGenerator;
use locobench::sim::reference::ReferenceFactory;
use locobench::sim::{BackendFactory, DomainRandomization, SimConfig, Simulator};
use locobench::terrain::{generate, TerrainKind, TerrainSpec};
use locobench::trace::{EpisodeTrace, TraceMeta, TraceRecord};

fn main() -> locobench::Result<()> {
    let robot = Arc::new(RobotDescription::go2());
    let cfg = SimConfig::default();
    let mut sim = Simulator::new(ReferenceFactory::default().create()?, cfg.clone(), robot.clone())?;
    let field = Arc::new(generate(&TerrainSpec::tile(TerrainKind::Flat, 0.1, 0))?);
    sim.reset(field, &DomainRandomization::nominal(), 0)?;

    let cmd = CommandTriple::new(1.2, 0.0, 0.3);
    let mut gait = TrotGenerator::new(cfg.control_dt());
    let mut trace = EpisodeTrace::new(TraceMeta::for_robot(&robot, cfg.control_dt()));
    for _ in 0..150 {
        let action = gait.next_action(&cmd);
        let r = sim.step(&action)?;
        trace.records.push(TraceRecord {
            time: sim.time(),
            segment: 0,
            cmd,
            state: r.state,
            action,
            fallen: r.fallen,
            collisions: r.collisions,
            height_above_ground: r.height_above_ground,
        });
    }

    for (label, rc) in [("multi-terrain", RewardConfig::multi_terrain()), ("high-speed", RewardConfig::high_speed())] {
        let report = episode_reward_report(&trace, &rc, None)?;
        println!("== {label}: mean weighted reward {:.4}", report.total_mean);
        report.write_csv(std::io::stdout())?;
    }
    let q = trace.records.last().expect("recorded steps").state.q;
    println!("hip symmetry at the last step: {:.4}", hip_symmetry(&cmd, &q));
    Ok(())
}
