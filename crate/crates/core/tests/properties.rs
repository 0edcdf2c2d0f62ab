use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use locobench::goals::{
    build_goal, dynamic_sigma, exclusion_speed, sample_training_command, sigma_max, CommandLimits, CommandTriple,
    CurriculumStage, GoalConfig, GoalKind, SampleKind, SigmaInterpolation, BASE_SIGMA, LINEAR_BAND,
};
use locobench::metrics::{aggregate_goal_scores, aggregate_values, compute_metrics, Aggregation, MetricVector, NormalizationConfig};
use locobench::pipelines::seeds::pass_seed;
use locobench::pipelines::{binary_search_level, derive_seed, linear_scan_level};
use locobench::policy::{load_balance_diagnostic, softmax, Activation, MoEArch, MoEPolicy, ObservationHistory};
use locobench::rewards::{compute_step_rewards, hip_symmetry, RewardConfig, RewardTerm, StepContext, NUM_TERMS};
use locobench::robot::{RobotDescription, HIP_JOINTS};
use locobench::scoring::{quality_score, terrain_score, ScoreWeights};
use locobench::sim::gait::run_reference_gait;
use locobench::sim::reference::{ReferenceBackend, ReferenceConfig};
use locobench::sim::{latency_steps, DomainRandomization, LatencyQueue, RobotState, SimConfig, Simulator, OBS_DIM};
use locobench::terrain::{generate, stair_step_height, wave_amplitude, TerrainKind, TerrainSpec};
use locobench::trace::{EpisodeTrace, TraceRecord};

fn terrain_kind() -> impl Strategy<Value = TerrainKind> {
    prop::sample::select(TerrainKind::ALL.to_vec())
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

fn metric_vector() -> impl Strategy<Value = MetricVector> {
    prop::array::uniform6(0.01f64..=1.0).prop_map(MetricVector::from_array)
}

// ---------------------------------------------------------------- terrain

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn terrain_generation_is_pure(kind in terrain_kind(), level in 1u8..=10, seed in any::<u64>()) {
        let spec = TerrainSpec::for_level(kind, level, seed);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        prop_assert_eq!(a.heights(), b.heights());
    }

    #[test]
    fn amplitude_non_decreasing_in_difficulty(
        kind in prop::sample::select(vec![
            TerrainKind::SlopeUp, TerrainKind::SlopeDown, TerrainKind::StairsUp,
            TerrainKind::StairsDown, TerrainKind::Obstacle,
        ]),
        level in 1u8..10,
        seed in any::<u64>(),
    ) {
        let lo = generate(&TerrainSpec::for_level(kind, level, seed)).unwrap().max_abs_height();
        let hi = generate(&TerrainSpec::for_level(kind, level + 1, seed)).unwrap().max_abs_height();
        prop_assert!(lo <= hi + 1e-6, "{kind} level {level}: {lo} > {hi}");
    }

    #[test]
    fn wave_bounded_by_twice_amplitude(level in 1u8..=10, seed in any::<u64>()) {
        let hf = generate(&TerrainSpec::for_level(TerrainKind::Wave, level, seed)).unwrap();
        let a = wave_amplitude(f64::from(level) / 10.0);
        prop_assert!(hf.heights().iter().all(|&z| f64::from(z).abs() <= 2.0 * a + 1e-6));
    }
}

#[test]
fn stair_heights_at_piece_boundary() {
    assert!((stair_step_height(0.4) - 0.17).abs() < 1e-12);
    assert!((stair_step_height(0.5) - 0.18).abs() < 1e-12);
}

// ---------------------------------------------------------------- sim

fn reference_sim() -> Simulator {
    Simulator::new(
        Box::new(ReferenceBackend::new(ReferenceConfig::default())),
        SimConfig::default(),
        Arc::new(RobotDescription::go2()),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reference_sim_is_deterministic(
        seed in any::<u64>(),
        actions in prop::collection::vec(prop::array::uniform12(-0.3f64..0.3), 1..40),
        friction in 0.1f64..=1.0,
    ) {
        let terrain = Arc::new(generate(&TerrainSpec::for_level(TerrainKind::Wave, 3, 11)).unwrap());
        let dr = DomainRandomization::with_friction(friction);
        let run = || {
            let mut sim = reference_sim();
            let mut out = vec![sim.reset(terrain.clone(), &dr, seed).unwrap()];
            for a in &actions {
                out.push(sim.step(a).unwrap().state);
            }
            out
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn latency_queue_is_fifo(delay in 0usize..10, pushes in prop::collection::vec(-1.0f64..1.0, 1..50)) {
        let initial = [7.0; 12];
        let mut queue = LatencyQueue::new(delay, initial);
        prop_assert_eq!(queue.len(), delay);
        let mut seen = Vec::new();
        for &p in &pushes {
            seen.push(queue.push([p; 12])[0]);
            prop_assert_eq!(queue.len(), delay);
        }
        let expected: Vec<f64> = std::iter::repeat_n(7.0, delay).chain(pushes.iter().copied()).take(pushes.len()).collect();
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn latency_steps_rounds_to_physics_ticks(ms in 0u32..200) {
        let latency = f64::from(ms) / 1000.0;
        prop_assert_eq!(latency_steps(latency, 200), (latency * 200.0).round() as usize);
    }

    #[test]
    fn reference_speed_is_bounded(vx in -2.0f64..=2.0, vy in -1.0f64..=1.0, wz in -2.0f64..=2.0, seed in any::<u64>()) {
        let terrain = Arc::new(generate(&TerrainSpec::for_level(TerrainKind::Flat, 1, 0)).unwrap());
        let cfg = ReferenceConfig::default();
        let v_max = cfg.max_speed;
        let traj = run_reference_gait(terrain, &DomainRandomization::nominal(), CommandTriple::new(vx, vy, wz), 2.0, cfg, seed).unwrap();
        for s in &traj.states {
            prop_assert!(s.lin_vel.iter().map(|v| v * v).sum::<f64>().sqrt() <= v_max + 1e-9);
        }
    }
}

// ---------------------------------------------------------------- policy

fn tiny_arch(k: usize) -> MoEArch {
    MoEArch {
        num_experts: k,
        history: 5,
        obs_dim: OBS_DIM,
        expert_hidden: vec![16],
        gate_hidden: vec![8],
        latent_dim: 6,
        head_hidden: vec![8],
        action_dim: 12,
        activation: Activation::Elu,
    }
}

fn history_from(values: &[f64]) -> ObservationHistory {
    let mut hist = ObservationHistory::new(5).unwrap();
    for chunk in values.chunks(OBS_DIM) {
        let obs: [f64; OBS_DIM] = std::array::from_fn(|i| chunk[i]);
        if hist.is_empty() {
            hist.reset(&obs);
        } else {
            hist.push(&obs);
        }
    }
    hist
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_weights_on_simplex(
        seed in any::<u64>(),
        k in 1usize..6,
        input in prop::collection::vec(-3.0f64..3.0, 5 * OBS_DIM),
    ) {
        let policy = MoEPolicy::random(tiny_arch(k), seed).unwrap();
        let out = policy.forward(&history_from(&input)).unwrap();
        prop_assert_eq!(out.gate.len(), k);
        prop_assert!(out.gate.iter().all(|&w| w >= 0.0));
        prop_assert!((out.gate.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gate_logit_shift_changes_nothing(
        seed in any::<u64>(),
        shift in -20.0f64..20.0,
        input in prop::collection::vec(-3.0f64..3.0, 5 * OBS_DIM),
    ) {
        let policy = MoEPolicy::random(tiny_arch(4), seed).unwrap();
        let mut shifted = policy.clone();
        for b in &mut shifted.gate.layers.last_mut().unwrap().bias {
            *b += shift;
        }
        let hist = history_from(&input);
        let a = policy.forward(&hist).unwrap();
        let b = shifted.forward(&hist).unwrap();
        for (x, y) in a.gate.iter().zip(&b.gate).chain(a.latent.iter().zip(&b.latent)).chain(a.action.iter().zip(&b.action)) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn softmax_shift_invariant(logits in prop::collection::vec(-30.0f64..30.0, 1..8), c in -100.0f64..100.0) {
        let a = softmax(&logits);
        let shifted: Vec<f64> = logits.iter().map(|l| l + c).collect();
        let b = softmax(&shifted);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_pure(seed in any::<u64>(), input in prop::collection::vec(-3.0f64..3.0, 5 * OBS_DIM)) {
        let policy = MoEPolicy::random(tiny_arch(3), seed).unwrap();
        let hist = history_from(&input);
        prop_assert_eq!(policy.forward(&hist).unwrap(), policy.forward(&hist).unwrap());
    }

    #[test]
    fn load_balance_permutation_invariant(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 1..20), seed in any::<u64>()) {
        let gates: Vec<Vec<f64>> = rows.iter().map(|r| softmax(r)).collect();
        let mut shuffled = gates.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut rng);
        let a = load_balance_diagnostic(&gates).unwrap();
        let b = load_balance_diagnostic(&shuffled).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn load_balance_zero_for_uniform_columns(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..10)) {
        let gates: Vec<Vec<f64>> = rows.iter().map(|r| softmax(r)).collect();
        // rotating every row through all K positions makes the column means uniform
        let mut balanced = Vec::new();
        for g in &gates {
            for r in 0..3 {
                let mut row = g.clone();
                row.rotate_left(r);
                balanced.push(row);
            }
        }
        prop_assert!(load_balance_diagnostic(&balanced).unwrap() < 1e-12);
    }
}

// ---------------------------------------------------------------- goals

proptest! {
    #[test]
    fn sigma_equals_base_at_level_zero(kind in terrain_kind(), v in 0.0f64..5.0) {
        let s = dynamic_sigma(BASE_SIGMA, sigma_max(kind), v, LINEAR_BAND, 0.0, SigmaInterpolation::Continuous).unwrap();
        prop_assert_eq!(s, BASE_SIGMA);
    }

    #[test]
    fn sigma_monotone_in_level_above_band(kind in terrain_kind(), v in 1.5f64..5.0, l1 in 0.0f64..=10.0, l2 in 0.0f64..=10.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let f = |l| dynamic_sigma(BASE_SIGMA, sigma_max(kind), v, LINEAR_BAND, l, SigmaInterpolation::Continuous).unwrap();
        prop_assert!(f(lo) <= f(hi) + 1e-15);
        prop_assert!(f(hi) <= sigma_max(kind) + 1e-15);
        prop_assert!(f(lo) >= BASE_SIGMA - 1e-15);
    }

    #[test]
    fn sampled_speeds_avoid_exclusion_band(
        seed in any::<u64>(),
        stage in prop::sample::select(vec![CurriculumStage::Initial, CurriculumStage::Intermediate, CurriculumStage::Advanced]),
        kind in terrain_kind(),
        prior in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4),
    ) {
        let history: Vec<CommandTriple> = prior.iter().map(|&(x, y)| CommandTriple::new(x, y, 0.0)).collect();
        let limits = stage.limits().min(CommandLimits::for_terrain(kind));
        let vsx = exclusion_speed(&history, 4.0, 20.0, limits.vx).unwrap();
        let vsy = exclusion_speed(&history, 4.0, 20.0, limits.vy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let s = sample_training_command(&mut rng, stage, kind, &history, 4.0, 20.0).unwrap();
            if s.kind.is_stationary() {
                prop_assert_eq!(s.command.linear_norm(), 0.0);
                continue;
            }
            prop_assert!(s.command.vx.abs() >= vsx, "vx {} inside ±{vsx}", s.command.vx);
            prop_assert!(s.command.vy.abs() >= vsy, "vy {} inside ±{vsy}", s.command.vy);
            if s.kind == SampleKind::Extreme {
                prop_assert_eq!(s.command.vx.abs(), limits.vx);
            }
        }
    }
}

#[test]
fn goal_trial_counts() {
    for kind in TerrainKind::ALL {
        for goal in GoalKind::ALL {
            let g = build_goal(goal, CommandLimits::for_terrain(kind), &GoalConfig::default());
            let expected = match goal {
                GoalKind::MaxVelocity => 6,
                GoalKind::DiagonalVelocity => 8,
                GoalKind::TargetPosition => 1,
            };
            assert_eq!(g.trials.len(), expected);
        }
    }
}

// ---------------------------------------------------------------- metrics

#[derive(Clone, Debug)]
struct Step {
    cmd: (f64, f64, f64),
    vel: (f64, f64, f64),
    tau: f64,
    dq: f64,
    q_offset: f64,
    roll: f64,
}

fn step_strategy() -> impl Strategy<Value = Step> {
    (
        (-2.0f64..2.0, -1.0f64..1.0, -2.0f64..2.0),
        (-2.0f64..2.0, -1.0f64..1.0, -2.0f64..2.0),
        -30.0f64..30.0,
        -10.0f64..10.0,
        -1.5f64..1.5,
        -1.2f64..1.2,
    )
        .prop_map(|(cmd, vel, tau, dq, q_offset, roll)| Step { cmd, vel, tau, dq, q_offset, roll })
}

fn record(k: usize, s: &Step) -> TraceRecord {
    let robot = RobotDescription::go2();
    let pose = robot.default_pose();
    let mut state = RobotState::standing([0.0, 0.0, 0.38], 0.0, std::array::from_fn(|i| pose[i] + s.q_offset));
    state.orientation = locobench::sim::quat_from_euler(s.roll, 0.0, 0.0);
    state.projected_gravity = locobench::sim::projected_gravity(&state.orientation);
    state.lin_vel = [s.vel.0, s.vel.1, 0.0];
    state.ang_vel = [0.0, 0.0, s.vel.2];
    state.tau = std::array::from_fn(|i| s.tau * (1.0 + i as f64 / 12.0));
    state.dq = [s.dq; 12];
    TraceRecord {
        time: k as f64 * 0.02,
        segment: 0,
        cmd: CommandTriple::new(s.cmd.0, s.cmd.1, s.cmd.2),
        state,
        action: [0.0; 12],
        fallen: false,
        collisions: 0,
        height_above_ground: 0.38,
    }
}

fn trace_of(steps: &[Step]) -> EpisodeTrace {
    EpisodeTrace {
        records: steps.iter().enumerate().map(|(k, s)| record(k, s)).collect(),
        ..EpisodeTrace::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metrics_stay_in_unit_interval(steps in prop::collection::vec(step_strategy(), 1..40)) {
        let m = compute_metrics(&trace_of(&steps), &NormalizationConfig::default()).unwrap();
        prop_assert!(m.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
        // generous scale constants never move these two
        let huge = NormalizationConfig { c_lin: 1e9, c_ang: 1e9, c_power: 1e9, c_smooth: 1e9 };
        let m2 = compute_metrics(&trace_of(&steps), &huge).unwrap();
        prop_assert_eq!(m.dof_limits, m2.dof_limits);
        prop_assert_eq!(m.orient, m2.orient);
    }

    #[test]
    fn larger_errors_never_raise_metrics(steps in prop::collection::vec(step_strategy(), 2..30), factor in 1.0f64..4.0) {
        let base = trace_of(&steps);
        let worse: Vec<Step> = steps
            .iter()
            .map(|s| Step {
                vel: (
                    s.cmd.0 + factor * (s.vel.0 - s.cmd.0),
                    s.cmd.1 + factor * (s.vel.1 - s.cmd.1),
                    s.cmd.2 + factor * (s.vel.2 - s.cmd.2),
                ),
                tau: s.tau * factor,
                roll: (s.roll * factor).clamp(-1.5, 1.5),
                ..s.clone()
            })
            .collect();
        let norm = NormalizationConfig::default();
        let a = compute_metrics(&base, &norm).unwrap();
        let b = compute_metrics(&trace_of(&worse), &norm).unwrap();
        prop_assert!(b.lin_trk <= a.lin_trk + 1e-12);
        prop_assert!(b.ang_trk <= a.ang_trk + 1e-12);
        prop_assert!(b.dof_power <= a.dof_power + 1e-12);
        prop_assert!(b.orient <= a.orient + 1e-12);
        prop_assert!(b.smooth <= a.smooth + 1e-12);
    }

    #[test]
    fn repetition_leaves_metrics_unchanged(mut steps in prop::collection::vec(step_strategy(), 1..20), tau in -30.0f64..30.0) {
        for s in &mut steps {
            s.tau = tau;
        }
        let doubled: Vec<Step> = steps.iter().chain(&steps).cloned().collect();
        let norm = NormalizationConfig::default();
        let a = compute_metrics(&trace_of(&steps), &norm).unwrap().to_array();
        let b = compute_metrics(&trace_of(&doubled), &norm).unwrap().to_array();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn aggregators_permutation_invariant_and_ordered(values in prop::collection::vec(unit(), 1..16), seed in any::<u64>()) {
        let mut shuffled = values.clone();
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut ChaCha8Rng::seed_from_u64(seed));
        for mode in Aggregation::ALL {
            prop_assert_eq!(aggregate_values(&values, mode).unwrap(), aggregate_values(&shuffled, mode).unwrap());
        }
        let w = aggregate_values(&values, Aggregation::Worst50).unwrap();
        let m = aggregate_values(&values, Aggregation::Mean).unwrap();
        let t = aggregate_values(&values, Aggregation::Top25).unwrap();
        prop_assert!(w <= m + 1e-12 && m <= t + 1e-12);
    }

    #[test]
    fn vector_aggregation_is_componentwise(trials in prop::collection::vec(metric_vector(), 1..9)) {
        for mode in Aggregation::ALL {
            let agg = aggregate_goal_scores(&trials, mode).unwrap().to_array();
            for (k, v) in agg.iter().enumerate() {
                let column: Vec<f64> = trials.iter().map(|t| t.to_array()[k]).collect();
                prop_assert_eq!(*v, aggregate_values(&column, mode).unwrap());
            }
        }
    }
}

// ---------------------------------------------------------------- rewards

fn reward_ctx_state(vel: [f64; 3], hips: [f64; 4]) -> RobotState {
    let mut s = RobotState::standing([0.0, 0.0, 0.38], 0.0, RobotDescription::go2().default_pose());
    s.lin_vel = vel;
    s.ang_vel = [0.0, 0.0, vel[2]];
    for (j, h) in HIP_JOINTS.iter().zip(hips) {
        s.q[*j] = h;
    }
    s
}

fn rewards_for(state: &RobotState, cmd: CommandTriple, cfg: &RewardConfig) -> locobench::rewards::StepRewards {
    let limits = RobotDescription::go2().soft_limits();
    let zero = [0.0; 12];
    let ctx = StepContext {
        state,
        prev_state: None,
        action: &zero,
        prev_action: &zero,
        prev_prev_action: &zero,
        cmd,
        height_above_ground: 0.38,
        collisions: 0,
        soft_limits: &limits,
        dt: 0.02,
    };
    compute_step_rewards(&ctx, cfg, None)
}

proptest! {
    #[test]
    fn tracking_terms_in_half_open_unit(vel in prop::array::uniform3(-3.0f64..3.0), cmd in prop::array::uniform3(-2.0f64..2.0)) {
        let s = reward_ctx_state(vel, [0.1, -0.1, 0.1, -0.1]);
        let r = rewards_for(&s, CommandTriple::new(cmd[0], cmd[1], cmd[2]), &RewardConfig::default());
        for term in [RewardTerm::LinVelTracking, RewardTerm::AngVelTracking] {
            let v = r.get(term);
            prop_assert!(v > 0.0 && v <= 1.0);
        }
        let exact = rewards_for(&s, CommandTriple::new(vel[0], vel[1], vel[2]), &RewardConfig::default());
        prop_assert_eq!(exact.get(RewardTerm::LinVelTracking), 1.0);
        prop_assert_eq!(exact.get(RewardTerm::AngVelTracking), 1.0);
    }

    #[test]
    fn hip_symmetry_nonnegative_and_zero_when_antisymmetric(
        hips in prop::array::uniform4(-0.8f64..0.8),
        cmd in prop::array::uniform3(-2.0f64..2.0),
    ) {
        let cmd = CommandTriple::new(cmd[0], cmd[1], cmd[2]);
        let mut q = RobotDescription::go2().default_pose();
        for (j, h) in HIP_JOINTS.iter().zip(hips) {
            q[*j] = h;
        }
        prop_assert!(hip_symmetry(&cmd, &q) >= 0.0);
        q[HIP_JOINTS[1]] = -q[HIP_JOINTS[0]];
        q[HIP_JOINTS[3]] = -q[HIP_JOINTS[2]];
        prop_assert_eq!(hip_symmetry(&cmd, &q), 0.0);
    }

    #[test]
    fn reweighting_one_term_touches_only_it(
        term in 0usize..NUM_TERMS,
        scale in -5.0f64..5.0,
        vel in prop::array::uniform3(-2.0f64..2.0),
        hips in prop::array::uniform4(-0.5f64..0.5),
    ) {
        let s = reward_ctx_state(vel, hips);
        let cmd = CommandTriple::new(1.0, 0.2, 0.3);
        let mut cfg = RewardConfig::high_speed();
        let base = rewards_for(&s, cmd, &cfg);
        let name = RewardTerm::ALL[term];
        let mut weights: serde_json::Value = serde_json::to_value(&cfg.weights).unwrap();
        let w = weights[name.name()].as_f64().unwrap();
        weights[name.name()] = (w * scale).into();
        cfg.weights = serde_json::from_value(weights).unwrap();
        let scaled = rewards_for(&s, cmd, &cfg);
        for i in 0..NUM_TERMS {
            if i == term {
                prop_assert!((scaled.weighted[i] - scale * base.weighted[i]).abs() < 1e-12);
            } else {
                prop_assert_eq!(scaled.weighted[i], base.weighted[i]);
            }
        }
    }
}

// ---------------------------------------------------------------- scoring

proptest! {
    #[test]
    fn quality_between_extremes(m in metric_vector()) {
        let q = quality_score(&m, &ScoreWeights::default().metric_weights).unwrap();
        let a = m.to_array();
        let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().copied().fold(0.0, f64::max);
        prop_assert!(lo - 1e-12 <= q && q <= hi + 1e-12);
    }

    #[test]
    fn quality_monotone(m in metric_vector(), k in 0usize..6, bump in 0.0f64..1.0) {
        let w = ScoreWeights::default().metric_weights;
        let mut better = m.to_array();
        better[k] = (better[k] + bump).min(1.0);
        let a = quality_score(&m, &w).unwrap();
        let b = quality_score(&MetricVector::from_array(better), &w).unwrap();
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn quality_weight_scale_invariant(m in metric_vector(), w in prop::array::uniform6(0.1f64..5.0), c in 0.01f64..100.0) {
        let scaled = w.map(|x| x * c);
        let a = quality_score(&m, &w).unwrap();
        let b = quality_score(&m, &scaled).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn terrain_score_monotone_and_overlapping(level in 1u8..10, q1 in unit(), q2 in unit()) {
        let (alpha, beta) = (0.09, 0.19);
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(terrain_score(level, lo, alpha, beta).unwrap() <= terrain_score(level, hi, alpha, beta).unwrap());
        prop_assert!(terrain_score(level, lo, alpha, beta).unwrap() < terrain_score(level + 1, lo, alpha, beta).unwrap());
        // a perfect run at L outranks a zero-quality pass at L + 1
        prop_assert!(terrain_score(level, 1.0, alpha, beta).unwrap() > terrain_score(level + 1, 0.0, alpha, beta).unwrap());
    }
}

// ---------------------------------------------------------------- pipelines

proptest! {
    #[test]
    fn binary_search_matches_scan_on_monotone(cap in 0u8..=10) {
        let mut calls = 0;
        let found = binary_search_level(10, &mut |l| { calls += 1; Ok(l <= cap) }).unwrap();
        prop_assert_eq!(found, linear_scan_level(10, &mut |l| Ok(l <= cap)).unwrap());
        // ceil(log2 10) + 1 levels at most
        prop_assert!(calls <= 5);
    }

    #[test]
    fn binary_search_lands_on_a_boundary(pattern in prop::array::uniform10(any::<bool>())) {
        let found = binary_search_level(10, &mut |l| Ok(pattern[usize::from(l) - 1])).unwrap();
        prop_assert!(found == 0 || pattern[usize::from(found) - 1]);
        prop_assert!(found == 10 || !pattern[usize::from(found)]);
    }

    #[test]
    fn derived_seeds_are_distinct(root in any::<u64>()) {
        let mut seen = HashSet::new();
        for kind in TerrainKind::EVALUATION {
            for dr in 0..9 {
                for level in 1..=10u8 {
                    for s in 0..5 {
                        prop_assert!(seen.insert(pass_seed(root, kind, dr, level, s)));
                    }
                }
            }
        }
        prop_assert!(seen.insert(derive_seed(root, "other")));
    }
}

#[test]
fn config_defaults_follow_published_hyperparameters() {
    let cfg = locobench::config::RunConfig::default();
    let w = &cfg.plan.level.weights;
    assert_eq!((w.alpha, w.beta), (0.09, 0.19));
    assert_eq!(w.metric_weights, [2.0, 2.0, 1.0, 1.0, 1.0, 1.0]);
    assert_eq!((cfg.sim.kp, cfg.sim.kd), (20.0, 0.5));
    assert_eq!((cfg.sim.control_hz, cfg.sim.physics_hz), (50, 200));
    assert_eq!(MoEArch::default().history, 5);
    assert_eq!(RewardConfig::default().sigma, 0.25);
    assert_eq!(locobench::scoring::MAX_LEVEL, 10);
    assert_eq!(cfg.plan.level.pass_rule.seeds, 5);
    assert_eq!(cfg.plan.level.pass_rule.required, 4);
    assert_eq!(cfg.plan.level.metric_seeds, 3);
}
