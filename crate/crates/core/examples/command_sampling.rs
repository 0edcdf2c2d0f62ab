//! Samples training commands and tallies the sample kinds, then shows the
//! velocity- and level-dependent tracking coefficient.

use locobench::goals::{sample_training_command, CommandTriple, CurriculumStage, SampleKind, SigmaSchedule};
use locobench::terrain::TerrainKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> locobench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20_000;
    let (mut stationary, mut pivot, mut extreme) = (0, 0, 0);
    let history = [CommandTriple::new(0.5, 0.0, 0.0)];
    for _ in 0..n {
        let s = sample_training_command(&mut rng, CurriculumStage::Advanced, TerrainKind::Flat, &history, 2.0, 20.0)?;
        match s.kind {
            SampleKind::Stationary => stationary += 1,
            SampleKind::Pivot => pivot += 1,
            SampleKind::Extreme => extreme += 1,
            SampleKind::Uniform => {}
        }
    }
    let pct = |c: i32| 100.0 * f64::from(c) / f64::from(n);
    println!(
        "stationary {:.1}% (pivot {:.1}%), extreme {:.1}%",
        pct(stationary + pivot),
        pct(pivot),
        pct(extreme)
    );

    for level in [0.0, 5.0, 10.0] {
        let sched = SigmaSchedule::linear(TerrainKind::Obstacle, level);
        let row: Vec<String> = [0.0, 0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&v| sched.sigma_now(v).map(|s| format!("{s:.3}")))
            .collect::<locobench::Result<_>>()?;
        println!("obstacle L={level:>4}: sigma(v=0..2) = {}", row.join(" "));
    }
    Ok(())
}
