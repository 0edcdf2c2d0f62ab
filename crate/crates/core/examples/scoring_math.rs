//! Quality, overlapping terrain score and the aggregation modes on
//! hand-picked numbers.

use locobench::metrics::{aggregate_values, Aggregation, MetricVector};
use locobench::scoring::{quality_score, terrain_score, ScoreWeights};

fn main() -> locobench::Result<()> {
    let w = ScoreWeights::default();
    let m = MetricVector::from_array([0.9, 0.9, 0.8, 0.8, 0.8, 0.8]);
    let q = quality_score(&m, &w.metric_weights)?;
    println!("Q({:?}) = {q:.6}", m.to_array());

    let mut broken = m;
    broken.orient = 0.0;
    println!("Q with one zero metric = {}", quality_score(&broken, &w.metric_weights)?);

    println!("S(L=5, Q=0.8)  = {:.4}", terrain_score(5, 0.8, w.alpha, w.beta)?);
    println!("S(L=6, Q=0.1)  = {:.4}", terrain_score(6, 0.1, w.alpha, w.beta)?);
    println!("S(L=5, Q=0.95) = {:.4}", terrain_score(5, 0.95, w.alpha, w.beta)?);
    println!("S(L=10, Q=1)   = {:.4}", terrain_score(10, 1.0, w.alpha, w.beta)?);

    let scores = [0.2, 0.9, 0.5, 0.7, 0.95, 0.4];
    for mode in Aggregation::ALL {
        println!("{:<8} {:.4}", mode.as_str(), aggregate_values(&scores, mode)?);
    }
    Ok(())
}
