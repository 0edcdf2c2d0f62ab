//! Builds a randomly initialised mixture-of-experts policy, saves and
//! reloads its weights, and runs it over an observation history.

use locobench::policy::{load_balance_diagnostic, weights, MoEArch, MoEPolicy, ObservationHistory};
use locobench::sim::Observation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> locobench::Result<()> {
    let arch = MoEArch::default();
    let policy = MoEPolicy::random(arch.clone(), 3)?;
    println!(
        "experts={} history={} latent={} parameters={}",
        arch.num_experts,
        arch.history,
        arch.latent_dim,
        policy.parameter_count()
    );

    let path = std::env::temp_dir().join("moe_example.rgpw");
    weights::save(&policy, &path)?;
    let reloaded = weights::load(&path)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut hist = ObservationHistory::new(arch.history)?;
    let mut gates = Vec::new();
    for step in 0..20 {
        let obs: Observation = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        hist.push(&obs);
        let out = reloaded.forward(&hist)?;
        if step % 5 == 0 {
            let g: Vec<String> = out.gate.iter().map(|w| format!("{w:.3}")).collect();
            println!("step {step:2}: gate [{}]  a0={:+.4}", g.join(", "), out.action[0]);
        }
        gates.push(out.gate);
    }
    println!("load-balance diagnostic: {:.4}", load_balance_diagnostic(&gates)?);
    Ok(())
}
