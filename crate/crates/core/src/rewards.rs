//! Training reward terms evaluated on recorded episodes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goals::CommandTriple;
use crate::robot::{JointArray, HIP_JOINTS};
use crate::sim::RobotState;
use crate::trace::EpisodeTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTerm {
    LinVelTracking,
    AngVelTracking,
    LinVelZ,
    AngVelXy,
    JointAcc,
    JointPower,
    JointTorque,
    BaseHeight,
    ActionRate,
    ActionSmoothness,
    Collision,
    JointLimit,
    FootRegulation,
    HipRegulation,
    HipSymmetry,
}

pub const NUM_TERMS: usize = 15;

impl RewardTerm {
    pub const ALL: [RewardTerm; NUM_TERMS] = [
        RewardTerm::LinVelTracking,
        RewardTerm::AngVelTracking,
        RewardTerm::LinVelZ,
        RewardTerm::AngVelXy,
        RewardTerm::JointAcc,
        RewardTerm::JointPower,
        RewardTerm::JointTorque,
        RewardTerm::BaseHeight,
        RewardTerm::ActionRate,
        RewardTerm::ActionSmoothness,
        RewardTerm::Collision,
        RewardTerm::JointLimit,
        RewardTerm::FootRegulation,
        RewardTerm::HipRegulation,
        RewardTerm::HipSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardTerm::LinVelTracking => "lin_vel_tracking",
            RewardTerm::AngVelTracking => "ang_vel_tracking",
            RewardTerm::LinVelZ => "lin_vel_z",
            RewardTerm::AngVelXy => "ang_vel_xy",
            RewardTerm::JointAcc => "joint_acc",
            RewardTerm::JointPower => "joint_power",
            RewardTerm::JointTorque => "joint_torque",
            RewardTerm::BaseHeight => "base_height",
            RewardTerm::ActionRate => "action_rate",
            RewardTerm::ActionSmoothness => "action_smoothness",
            RewardTerm::Collision => "collision",
            RewardTerm::JointLimit => "joint_limit",
            RewardTerm::FootRegulation => "foot_regulation",
            RewardTerm::HipRegulation => "hip_regulation",
            RewardTerm::HipSymmetry => "hip_symmetry",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingKernel {
    /// `exp(-σ·err²)`
    #[default]
    Verbatim,
    /// `exp(-err²/σ)`
    Inverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub lin_vel_tracking: f64,
    pub ang_vel_tracking: f64,
    pub lin_vel_z: f64,
    pub ang_vel_xy: f64,
    pub joint_acc: f64,
    pub joint_power: f64,
    pub joint_torque: f64,
    pub base_height: f64,
    pub action_rate: f64,
    pub action_smoothness: f64,
    pub collision: f64,
    pub joint_limit: f64,
    pub foot_regulation: f64,
    pub hip_regulation: f64,
    pub hip_symmetry: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            lin_vel_tracking: 1.0,
            ang_vel_tracking: 0.5,
            lin_vel_z: -2.0,
            ang_vel_xy: -0.05,
            joint_acc: -2.5e-7,
            joint_power: -2e-5,
            joint_torque: -1e-4,
            base_height: -1.0,
            action_rate: -0.01,
            action_smoothness: -0.01,
            collision: -1.0,
            joint_limit: -2.0,
            foot_regulation: -0.05,
            hip_regulation: -0.05,
            hip_symmetry: 0.0,
        }
    }
}

impl RewardWeights {
    pub fn to_array(&self) -> [f64; NUM_TERMS] {
        [
            self.lin_vel_tracking,
            self.ang_vel_tracking,
            self.lin_vel_z,
            self.ang_vel_xy,
            self.joint_acc,
            self.joint_power,
            self.joint_torque,
            self.base_height,
            self.action_rate,
            self.action_smoothness,
            self.collision,
            self.joint_limit,
            self.foot_regulation,
            self.hip_regulation,
            self.hip_symmetry,
        ]
    }

    pub fn get(&self, term: RewardTerm) -> f64 {
        self.to_array()[term.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub weights: RewardWeights,
    pub sigma: f64,
    pub kernel: TrackingKernel,
    pub base_height_target: f64,
    /// Default hip angles FL, FR, RL, RR.
    pub default_hip: [f64; 4],
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            weights: RewardWeights::default(),
            sigma: 0.25,
            kernel: TrackingKernel::Verbatim,
            base_height_target: 0.38,
            default_hip: [0.1, -0.1, 0.1, -0.1],
        }
    }
}

impl RewardConfig {
    /// Multi-terrain model weights.
    pub fn multi_terrain() -> Self {
        Self::default()
    }

    /// Flat-ground high-speed model: doubled linear tracking, hip symmetry
    /// enabled and a lower base.
    pub fn high_speed() -> Self {
        let mut cfg = Self::default();
        cfg.weights.lin_vel_tracking = 2.0;
        cfg.weights.hip_symmetry = -1.0;
        cfg.base_height_target = 0.33;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite("reward weights", &self.weights.to_array())?;
        if !(self.base_height_target > 0.0) {
            return Err(Error::param("base_height_target", "must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", "must be positive"));
        }
        Ok(())
    }

    fn kernel(&self, err_sq: f64) -> f64 {
        match self.kernel {
            TrackingKernel::Verbatim => (-self.sigma * err_sq).exp(),
            TrackingKernel::Inverse => (-err_sq / self.sigma).exp(),
        }
    }
}

/// Everything one reward evaluation looks at.
#[derive(Clone, Copy, Debug)]
pub struct StepContext<'a> {
    pub state: &'a RobotState,
    pub prev_state: Option<&'a RobotState>,
    pub action: &'a JointArray,
    pub prev_action: &'a JointArray,
    pub prev_prev_action: &'a JointArray,
    pub cmd: CommandTriple,
    pub height_above_ground: f64,
    pub collisions: u32,
    pub soft_limits: &'a [(f64, f64)],
    pub dt: f64,
}

/// Hook for the foot-regulation term; the default contributes zero.
pub type FootRegulationHook<'h> = &'h dyn Fn(&StepContext<'_>) -> f64;

pub fn hip_symmetry(cmd: &CommandTriple, q: &JointArray) -> f64 {
    let norm = cmd.linear_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let [fl, fr, rl, rr] = HIP_JOINTS.map(|j| q[j]);
    cmd.vx.abs() / norm * ((fl + fr).abs() + (rl + rr).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRewards {
    /// Unweighted term values in [`RewardTerm::ALL`] order.
    pub raw: [f64; NUM_TERMS],
    pub weighted: [f64; NUM_TERMS],
    pub total: f64,
}

impl StepRewards {
    pub fn get(&self, term: RewardTerm) -> f64 {
        self.raw[term.index()]
    }
}

fn sq_norm(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|v| v * v).sum()
}

pub fn compute_step_rewards(ctx: &StepContext<'_>, cfg: &RewardConfig, foot_hook: Option<FootRegulationHook<'_>>) -> StepRewards {
    let s = ctx.state;
    let lin_err = sq_norm([ctx.cmd.vx - s.lin_vel[0], ctx.cmd.vy - s.lin_vel[1]].into_iter());
    let ang_err = (ctx.cmd.wz - s.ang_vel[2]).powi(2);
    let joint_acc = match ctx.prev_state {
        Some(p) => sq_norm(s.dq.iter().zip(&p.dq).map(|(a, b)| (a - b) / ctx.dt)),
        None => 0.0,
    };
    let a = ctx.action;
    let a1 = ctx.prev_action;
    let a2 = ctx.prev_prev_action;
    let limit_count = s
        .q
        .iter()
        .zip(ctx.soft_limits)
        .filter(|(q, (lo, hi))| **q < *lo || **q > *hi)
        .count();
    let hip_reg: f64 = HIP_JOINTS.iter().zip(&cfg.default_hip).map(|(&j, d)| (s.q[j] - d).abs()).sum();
    let mut raw = [0.0; NUM_TERMS];
    raw[RewardTerm::LinVelTracking.index()] = cfg.kernel(lin_err);
    raw[RewardTerm::AngVelTracking.index()] = cfg.kernel(ang_err);
    raw[RewardTerm::LinVelZ.index()] = s.lin_vel[2].powi(2);
    raw[RewardTerm::AngVelXy.index()] = s.ang_vel[0].powi(2) + s.ang_vel[1].powi(2);
    raw[RewardTerm::JointAcc.index()] = joint_acc;
    raw[RewardTerm::JointPower.index()] = s.tau.iter().zip(&s.dq).map(|(t, v)| t.abs() * v.abs()).sum();
    raw[RewardTerm::JointTorque.index()] = sq_norm(s.tau.iter().copied());
    raw[RewardTerm::BaseHeight.index()] = (cfg.base_height_target - ctx.height_above_ground).powi(2);
    raw[RewardTerm::ActionRate.index()] = sq_norm(a.iter().zip(a1).map(|(x, y)| x - y));
    raw[RewardTerm::ActionSmoothness.index()] = sq_norm((0..a.len()).map(|i| a[i] - 2.0 * a1[i] + a2[i]));
    raw[RewardTerm::Collision.index()] = f64::from(ctx.collisions);
    raw[RewardTerm::JointLimit.index()] = limit_count as f64;
    raw[RewardTerm::FootRegulation.index()] = foot_hook.map_or(0.0, |h| h(ctx));
    raw[RewardTerm::HipRegulation.index()] = hip_reg;
    raw[RewardTerm::HipSymmetry.index()] = hip_symmetry(&ctx.cmd, &s.q);
    let w = cfg.weights.to_array();
    let weighted: [f64; NUM_TERMS] = std::array::from_fn(|i| w[i] * raw[i]);
    StepRewards {
        raw,
        weighted,
        total: weighted.iter().sum(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub term: RewardTerm,
    pub weight: f64,
    /// `Σ value·dt` over the episode.
    pub integral: f64,
    pub mean: f64,
    pub weighted_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardReport {
    pub steps: usize,
    pub terms: Vec<TermSummary>,
    /// Mean per-step weighted reward.
    pub total_mean: f64,
}

impl RewardReport {
    /// Columns: `term,weight,integral,mean,weighted_mean`, one row per term
    /// plus a final `total` row carrying the mean weighted reward.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "term,weight,integral,mean,weighted_mean")?;
        for t in &self.terms {
            writeln!(w, "{},{},{},{},{}", t.term.name(), t.weight, t.integral, t.mean, t.weighted_mean)?;
        }
        writeln!(w, "total,,,,{}", self.total_mean)?;
        Ok(())
    }
}

/// Per-step rewards over a whole trace. Action history before the first
/// record is taken as zero.
pub fn replay_rewards(trace: &EpisodeTrace, cfg: &RewardConfig, foot_hook: Option<FootRegulationHook<'_>>) -> Result<Vec<StepRewards>> {
    cfg.validate()?;
    let zero = [0.0; 12];
    let recs = &trace.records;
    Ok((0..recs.len())
        .map(|k| {
            let ctx = StepContext {
                state: &recs[k].state,
                prev_state: k.checked_sub(1).map(|i| &recs[i].state),
                action: &recs[k].action,
                prev_action: k.checked_sub(1).map_or(&zero, |i| &recs[i].action),
                prev_prev_action: k.checked_sub(2).map_or(&zero, |i| &recs[i].action),
                cmd: recs[k].cmd,
                height_above_ground: recs[k].height_above_ground,
                collisions: recs[k].collisions,
                soft_limits: &trace.meta.soft_limits,
                dt: trace.meta.control_dt,
            };
            compute_step_rewards(&ctx, cfg, foot_hook)
        })
        .collect())
}

pub fn episode_reward_report(trace: &EpisodeTrace, cfg: &RewardConfig, foot_hook: Option<FootRegulationHook<'_>>) -> Result<RewardReport> {
    if trace.records.is_empty() {
        return Err(Error::Empty("episode trace"));
    }
    let steps = replay_rewards(trace, cfg, foot_hook)?;
    let n = steps.len() as f64;
    let dt = trace.meta.control_dt;
    let weights = cfg.weights.to_array();
    let terms: Vec<TermSummary> = RewardTerm::ALL
        .iter()
        .map(|&term| {
            let i = term.index();
            let sum: f64 = steps.iter().map(|s| s.raw[i]).sum();
            let mean = sum / n;
            TermSummary {
                term,
                weight: weights[i],
                integral: sum * dt,
                mean,
                weighted_mean: weights[i] * mean,
            }
        })
        .collect();
    let total_mean = terms.iter().map(|t| t.weighted_mean).sum();
    Ok(RewardReport {
        steps: steps.len(),
        terms,
        total_mean,
    })
}
