//! Records gate weights and latents of an untrained MoE policy on two
//! terrains and projects the latents onto two principal components.

use std::sync::Arc;

use locobench::goals::{GoalConfig, GoalKind};
use locobench::pipelines::{base_pipeline, EvalContext, EvaluationCell};
use locobench::policy::{pca_project, LatentRecorder, MoEArch, MoEPolicy};
use locobench::robot::RobotDescription;
use locobench::sim::reference::ReferenceFactory;
use locobench::sim::{DomainRandomization, SimConfig};
use locobench::terrain::TerrainKind;

fn main() -> locobench::Result<()> {
    let arch = MoEArch::default();
    let policy = MoEPolicy::random(arch.clone(), 17)?;
    let backend = ReferenceFactory::default();
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
        record_latents: true,
    };
    let mut recorder = LatentRecorder::new(true, arch.num_experts, arch.latent_dim);
    for terrain in [TerrainKind::Flat, TerrainKind::StairsUp] {
        let cell = EvaluationCell {
            terrain,
            level: 3,
            dr_index: 0,
            dr: DomainRandomization::nominal(),
            goal: GoalKind::TargetPosition,
            seed: 1,
            terrain_seed: 1,
        };
        for row in base_pipeline(&ctx, &cell)?.latents {
            recorder.record(row)?;
        }
    }
    let proj = pca_project(&recorder.latent_matrix())?;
    println!("{} latent rows", proj.len());
    for (row, p) in recorder.rows().iter().zip(&proj).step_by(25) {
        println!(
            "t={:5.2} {:<10} pc=({:+.4}, {:+.4})",
            row.time,
            row.terrain.map_or("-", |t| t.as_str()),
            p[0],
            p[1]
        );
    }
    Ok(())
}
