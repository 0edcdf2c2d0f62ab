//! Drives the reference backend with the built-in trot generator and
//! reports how far the robot travelled on each terrain.

use std::sync::Arc;

use locobench::goals::CommandTriple;
use locobench::sim::gait::run_reference_gait;
use locobench::sim::reference::{CapabilityProfile, ReferenceConfig};
use locobench::sim::DomainRandomization;
use locobench::terrain::{generate, TerrainKind, TerrainSpec};

fn main() -> locobench::Result<()> {
    let cmd = CommandTriple::new(1.0, 0.0, 0.0);
    let reference = ReferenceConfig {
        capability: CapabilityProfile::uniform(6),
        ..ReferenceConfig::default()
    };
    for kind in TerrainKind::EVALUATION {
        for level in [3u8, 8] {
            let field = Arc::new(generate(&TerrainSpec::for_level(kind, level, 1))?);
            for friction in [1.0, 0.4] {
                let dr = DomainRandomization::with_friction(friction);
                let run = run_reference_gait(field.clone(), &dr, cmd, 4.0, reference.clone(), 7)?;
                let (first, last) = (&run.states[0], run.states.last().expect("at least one state"));
                println!(
                    "{:<12} L{level:<2} mu={friction:.1}  dx={:5.2} m  fell={}",
                    kind.as_str(),
                    last.position[0] - first.position[0],
                    run.fell
                );
            }
        }
    }
    Ok(())
}
