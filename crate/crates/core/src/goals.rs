//! Motion goals for evaluation and the training-side command mathematics.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::wrap_angle;
use crate::terrain::{Heightfield, TerrainKind};
use crate::trace::EpisodeTrace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandTriple {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl CommandTriple {
    pub const fn new(vx: f64, vy: f64, wz: f64) -> Self {
        CommandTriple { vx, vy, wz }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn linear_norm(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0 && self.wz == 0.0
    }
}

/// Symmetric command bounds `|vx| ≤ vx`, `|vy| ≤ vy`, `|wz| ≤ wz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandLimits {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl CommandLimits {
    pub const fn new(vx: f64, vy: f64, wz: f64) -> Self {
        CommandLimits { vx, vy, wz }
    }

    /// Per-terrain training limits.
    pub fn for_terrain(kind: TerrainKind) -> Self {
        match kind {
            TerrainKind::Flat => Self::new(2.0, 1.0, 2.0),
            TerrainKind::Wave => Self::new(1.5, 1.0, 1.5),
            TerrainKind::SlopeUp | TerrainKind::SlopeDown | TerrainKind::RoughSlope => Self::new(1.5, 1.0, 1.5),
            TerrainKind::StairsUp | TerrainKind::StairsDown => Self::new(1.0, 1.0, 1.5),
            TerrainKind::Obstacle => Self::new(1.0, 1.0, 1.5),
        }
    }

    /// Caps every axis at `cap` (the fixed model limit some baselines use).
    pub fn capped(self, cap: f64) -> Self {
        Self::new(self.vx.min(cap), self.vy.min(cap), self.wz.min(cap))
    }

    pub fn min(self, other: Self) -> Self {
        Self::new(self.vx.min(other.vx), self.vy.min(other.vy), self.wz.min(other.wz))
    }

    pub fn clip(&self, cmd: CommandTriple) -> CommandTriple {
        CommandTriple::new(
            cmd.vx.clamp(-self.vx, self.vx),
            cmd.vy.clamp(-self.vy, self.vy),
            cmd.wz.clamp(-self.wz, self.wz),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalKind {
    MaxVelocity,
    DiagonalVelocity,
    TargetPosition,
}

impl GoalKind {
    pub const ALL: [GoalKind; 3] = [GoalKind::MaxVelocity, GoalKind::DiagonalVelocity, GoalKind::TargetPosition];

    pub fn max_trials(self) -> usize {
        match self {
            GoalKind::MaxVelocity => 6,
            GoalKind::DiagonalVelocity => 8,
            GoalKind::TargetPosition => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GoalKind::MaxVelocity => "max_velocity",
            GoalKind::DiagonalVelocity => "diagonal_velocity",
            GoalKind::TargetPosition => "target_position",
        }
    }
}

impl fmt::Display for GoalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GoalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GoalKind::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "goal kind",
                value: s.to_string(),
            })
    }
}

/// Planar pose used by the position controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Directive {
    /// Hold a fixed command for `duration` seconds.
    Command { command: CommandTriple, duration: f64 },
    /// Drive to a point `distance` meters ahead of the spawn pose.
    ReachTarget {
        distance: f64,
        gain: f64,
        tolerance: f64,
        timeout: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub segments: Vec<Directive>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalSchedule {
    pub kind: GoalKind,
    pub limits: CommandLimits,
    pub trials: Vec<Trial>,
}

impl GoalSchedule {
    pub fn max_trials(&self) -> usize {
        self.kind.max_trials()
    }

    pub fn segment_count(&self) -> usize {
        self.trials.iter().map(|t| t.segments.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoalConfig {
    pub command_duration: f64,
    pub stop_duration: f64,
    pub diagonal_duration: f64,
    pub target_distance: f64,
    pub target_gain: f64,
    pub target_tolerance: f64,
    pub target_timeout: f64,
    /// Displacement that counts as a successful traversal, meters.
    pub success_distance: f64,
    /// Optional model-specific cap applied on top of the terrain limits.
    pub command_cap: Option<f64>,
}

impl Default for GoalConfig {
    fn default() -> Self {
        GoalConfig {
            command_duration: 3.0,
            stop_duration: 1.0,
            diagonal_duration: 3.0,
            target_distance: 4.5,
            target_gain: 1.0,
            target_tolerance: 0.3,
            target_timeout: 20.0,
            success_distance: 4.0,
            command_cap: None,
        }
    }
}

impl GoalConfig {
    pub fn limits_for(&self, terrain: TerrainKind) -> CommandLimits {
        let limits = CommandLimits::for_terrain(terrain);
        match self.command_cap {
            Some(cap) => limits.capped(cap),
            None => limits,
        }
    }
}

/// Builds the trial list of one motion goal.
///
/// * max velocity: `±vx`, `±vy`, `±wz` at the limit, each followed by a stop;
/// * diagonal velocity: the coupled pairs `(±vx, ±wz)` and `(±vx, ±vy)`;
/// * target position: one proportional-control run to a point ahead.
pub fn build_goal(kind: GoalKind, limits: CommandLimits, cfg: &GoalConfig) -> GoalSchedule {
    let hold = |command: CommandTriple, duration: f64| Directive::Command { command, duration };
    let trials = match kind {
        GoalKind::MaxVelocity => {
            let peaks = [
                CommandTriple::new(limits.vx, 0.0, 0.0),
                CommandTriple::new(-limits.vx, 0.0, 0.0),
                CommandTriple::new(0.0, limits.vy, 0.0),
                CommandTriple::new(0.0, -limits.vy, 0.0),
                CommandTriple::new(0.0, 0.0, limits.wz),
                CommandTriple::new(0.0, 0.0, -limits.wz),
            ];
            peaks
                .into_iter()
                .map(|c| Trial {
                    segments: vec![hold(c, cfg.command_duration), hold(CommandTriple::zero(), cfg.stop_duration)],
                })
                .collect()
        }
        GoalKind::DiagonalVelocity => {
            let mut trials = Vec::with_capacity(8);
            for sx in [1.0, -1.0] {
                for sw in [1.0, -1.0] {
                    let c = CommandTriple::new(sx * limits.vx, 0.0, sw * limits.wz);
                    trials.push(Trial { segments: vec![hold(c, cfg.diagonal_duration)] });
                }
            }
            for sx in [1.0, -1.0] {
                for sy in [1.0, -1.0] {
                    let c = CommandTriple::new(sx * limits.vx, sy * limits.vy, 0.0);
                    trials.push(Trial { segments: vec![hold(c, cfg.diagonal_duration)] });
                }
            }
            trials
        }
        GoalKind::TargetPosition => vec![Trial {
            segments: vec![Directive::ReachTarget {
                distance: cfg.target_distance,
                gain: cfg.target_gain,
                tolerance: cfg.target_tolerance,
                timeout: cfg.target_timeout,
            }],
        }],
    };
    GoalSchedule { kind, limits, trials }
}

/// Proportional position controller: the body-frame position error times
/// `gain`, attenuated by `max(0, cos(heading error))` so the robot turns
/// before it translates; the heading error (bearing to the target, or the
/// target yaw once within 0.1 m) drives the yaw rate.
pub fn target_position_controller(current: Pose2, target: Pose2, gain: f64, limits: &CommandLimits) -> CommandTriple {
    let dx = target.x - current.x;
    let dy = target.y - current.y;
    let (s, c) = current.yaw.sin_cos();
    let ex = c * dx + s * dy;
    let ey = -s * dx + c * dy;
    let dist = dx.hypot(dy);
    let heading_err = if dist > 0.1 {
        wrap_angle(dy.atan2(dx) - current.yaw)
    } else {
        wrap_angle(target.yaw - current.yaw)
    };
    let scale = heading_err.cos().max(0.0);
    limits.clip(CommandTriple::new(gain * ex * scale, gain * ey * scale, gain * heading_err))
}

/// Displacement that counts as traversal: half the terrain length.
pub fn success_threshold(terrain: &Heightfield) -> f64 {
    match &terrain.spec {
        Some(spec) => 0.5 * spec.length_m,
        None => {
            let (x0, x1, _, _) = terrain.bounds();
            0.5 * (x1 - x0)
        }
    }
}

/// Passes iff the episode never fell and ended at least `threshold` meters
/// (horizontally) from where it started.
pub fn success_check(trace: &EpisodeTrace, threshold: f64) -> bool {
    let (Some(first), Some(last)) = (trace.records.first(), trace.records.last()) else {
        return false;
    };
    if trace.records.iter().any(|r| r.fallen) {
        return false;
    }
    let dx = last.state.position[0] - first.state.position[0];
    let dy = last.state.position[1] - first.state.position[1];
    dx.hypot(dy) >= threshold
}

// ---------------------------------------------------------------------------
// Dynamic velocity-tracking precision
// ---------------------------------------------------------------------------

pub const BASE_SIGMA: f64 = 0.25;
pub const LINEAR_BAND: (f64, f64) = (0.5, 1.5);
pub const ANGULAR_BAND: (f64, f64) = (1.0, 2.0);

/// Largest tracking coefficient per terrain.
pub fn sigma_max(kind: TerrainKind) -> f64 {
    match kind {
        TerrainKind::Flat => 1.0 / 4.0,
        TerrainKind::Wave => 5.0 / 12.0,
        TerrainKind::SlopeUp | TerrainKind::SlopeDown | TerrainKind::RoughSlope => 1.0 / 4.0,
        TerrainKind::StairsUp | TerrainKind::StairsDown => 1.0 / 2.0,
        TerrainKind::Obstacle => 3.0 / 4.0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaInterpolation {
    /// Linear blend that meets σ at `v_min` and σ_max at `v_max`.
    #[default]
    Continuous,
    /// `σ(v - v_min) + σ_max(v_max - v)` exactly as printed.
    Verbatim,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSchedule {
    pub sigma: f64,
    pub sigma_max: f64,
    pub band: (f64, f64),
    pub level: f64,
    pub interpolation: SigmaInterpolation,
}

impl SigmaSchedule {
    pub fn linear(kind: TerrainKind, level: f64) -> Self {
        SigmaSchedule {
            sigma: BASE_SIGMA,
            sigma_max: sigma_max(kind),
            band: LINEAR_BAND,
            level,
            interpolation: SigmaInterpolation::Continuous,
        }
    }

    pub fn angular(kind: TerrainKind, level: f64) -> Self {
        SigmaSchedule {
            band: ANGULAR_BAND,
            ..Self::linear(kind, level)
        }
    }

    pub fn sigma_now(&self, v: f64) -> Result<f64> {
        dynamic_sigma(self.sigma, self.sigma_max, v, self.band, self.level, self.interpolation)
    }
}

/// Velocity- and level-dependent tracking coefficient.
pub fn dynamic_sigma(
    sigma: f64,
    sigma_max: f64,
    v: f64,
    band: (f64, f64),
    level: f64,
    interpolation: SigmaInterpolation,
) -> Result<f64> {
    let (v_min, v_max) = band;
    if !(v_max > v_min) {
        return Err(Error::param("v_band", format!("degenerate band [{v_min}, {v_max}]")));
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::param("v", format!("{v} must be non-negative")));
    }
    if !(0.0..=10.0).contains(&level) {
        return Err(Error::param("level", format!("{level} outside [0, 10]")));
    }
    let sigma_vel = if v < v_min {
        sigma
    } else if v < v_max {
        match interpolation {
            SigmaInterpolation::Continuous => (sigma * (v_max - v) + sigma_max * (v - v_min)) / (v_max - v_min),
            SigmaInterpolation::Verbatim => sigma * (v - v_min) + sigma_max * (v_max - v),
        }
    } else {
        sigma_max
    };
    let gain = ((level / 10.0).exp() - 1.0).min(1.0);
    Ok(sigma + gain * (sigma_vel - sigma))
}

// ---------------------------------------------------------------------------
// Training command sampling
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurriculumStage {
    Initial,
    Intermediate,
    Advanced,
}

impl CurriculumStage {
    pub fn from_training_step(step: u64) -> Self {
        if step < 20_000 {
            CurriculumStage::Initial
        } else if step < 50_000 {
            CurriculumStage::Intermediate
        } else {
            CurriculumStage::Advanced
        }
    }

    pub fn limits(self) -> CommandLimits {
        match self {
            CurriculumStage::Initial => CommandLimits::new(0.5, 0.5, 1.0),
            CurriculumStage::Intermediate => CommandLimits::new(1.0, 1.0, 1.5),
            CurriculumStage::Advanced => CommandLimits::new(2.0, 1.0, 2.0),
        }
    }
}

pub const STATIONARY_PROB: f64 = 0.10;
pub const EXTREME_PROB: f64 = 0.20;
pub const PIVOT_PROB: f64 = 0.20;
/// Displacement the sampled commands should accumulate per episode, meters.
pub const REQUIRED_DISPLACEMENT: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Zero command.
    Stationary,
    /// Zero linear command with maximal yaw rate.
    Pivot,
    /// All three axes at their limits.
    Extreme,
    Uniform,
}

impl SampleKind {
    pub fn is_stationary(self) -> bool {
        matches!(self, SampleKind::Stationary | SampleKind::Pivot)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledCommand {
    pub command: CommandTriple,
    pub kind: SampleKind,
    /// How long the command is held, seconds.
    pub duration: f64,
}

fn prior_displacement(history: &[CommandTriple], resample_interval: f64) -> f64 {
    let sx: f64 = history.iter().map(|c| c.vx).sum();
    let sy: f64 = history.iter().map(|c| c.vy).sum();
    sx.hypot(sy) * resample_interval
}

/// Lower edge of the excluded speed band for the next command on one axis
/// with symmetric bound `axis_limit`.
pub fn exclusion_speed(history: &[CommandTriple], resample_interval: f64, episode_length: f64, axis_limit: f64) -> Result<f64> {
    let remaining = episode_length - history.len() as f64 * resample_interval;
    if !(remaining > 0.0) {
        return Err(Error::param("episode_length", "no episode time left for another command"));
    }
    let numerator = REQUIRED_DISPLACEMENT - prior_displacement(history, resample_interval);
    Ok((numerator / remaining).clamp(0.0, axis_limit.abs()))
}

/// Hold time for a stationary command.
pub fn stationary_duration(history: &[CommandTriple], resample_interval: f64, episode_length: f64, limits: &CommandLimits) -> f64 {
    let remaining = episode_length - history.len() as f64 * resample_interval;
    let numerator = REQUIRED_DISPLACEMENT - prior_displacement(history, resample_interval);
    let catch_up = numerator / (0.8 * limits.vx.max(limits.vy));
    (remaining - catch_up).clamp(0.0, resample_interval)
}

/// Draws the next training command.
///
/// 10% zero linear command (a fifth of those pivot at full yaw rate),
/// 20% one of the eight all-axes-at-limit combinations, otherwise uniform
/// with each linear axis kept out of `(-v*, v*)`.
pub fn sample_training_command<R: Rng + ?Sized>(
    rng: &mut R,
    stage: CurriculumStage,
    terrain: TerrainKind,
    history: &[CommandTriple],
    resample_interval: f64,
    episode_length: f64,
) -> Result<SampledCommand> {
    let limits = stage.limits().min(CommandLimits::for_terrain(terrain));
    let v_star_x = exclusion_speed(history, resample_interval, episode_length, limits.vx)?;
    let v_star_y = exclusion_speed(history, resample_interval, episode_length, limits.vy)?;
    let sign = |rng: &mut R| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let u: f64 = rng.random();
    if u < STATIONARY_PROB {
        let duration = stationary_duration(history, resample_interval, episode_length, &limits);
        let (command, kind) = if rng.random_bool(PIVOT_PROB) {
            (CommandTriple::new(0.0, 0.0, sign(rng) * limits.wz), SampleKind::Pivot)
        } else {
            (CommandTriple::zero(), SampleKind::Stationary)
        };
        return Ok(SampledCommand { command, kind, duration });
    }
    if u < STATIONARY_PROB + EXTREME_PROB {
        let command = CommandTriple::new(sign(rng) * limits.vx, sign(rng) * limits.vy, sign(rng) * limits.wz);
        return Ok(SampledCommand {
            command,
            kind: SampleKind::Extreme,
            duration: resample_interval,
        });
    }
    let axis = |rng: &mut R, v_star: f64, lim: f64| {
        let mag = if v_star >= lim { lim } else { rng.random_range(v_star..=lim) };
        sign(rng) * mag
    };
    let vx = axis(rng, v_star_x, limits.vx);
    let vy = axis(rng, v_star_y, limits.vy);
    let wz = rng.random_range(-limits.wz..=limits.wz);
    Ok(SampledCommand {
        command: CommandTriple::new(vx, vy, wz),
        kind: SampleKind::Uniform,
        duration: resample_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RobotState;
    use crate::trace::TraceRecord;

    #[test]
    fn max_velocity_first_trial() {
        let g = build_goal(GoalKind::MaxVelocity, CommandLimits::new(2.0, 1.0, 2.0), &GoalConfig::default());
        assert_eq!(g.trials.len(), 6);
        assert_eq!(
            g.trials[0].segments,
            vec![
                Directive::Command { command: CommandTriple::new(2.0, 0.0, 0.0), duration: 3.0 },
                Directive::Command { command: CommandTriple::zero(), duration: 1.0 },
            ]
        );
    }

    #[test]
    fn trial_counts_match_objectives() {
        let limits = CommandLimits::for_terrain(TerrainKind::Flat);
        for kind in GoalKind::ALL {
            let g = build_goal(kind, limits, &GoalConfig::default());
            assert_eq!(g.trials.len(), kind.max_trials());
        }
        let diag = build_goal(GoalKind::DiagonalVelocity, limits, &GoalConfig::default());
        assert_eq!(diag.segment_count(), 8);
        let back: GoalSchedule = serde_json::from_str(&diag.to_json().unwrap()).unwrap();
        assert_eq!(back, diag);
    }

    #[test]
    fn controller_cases() {
        let lim = CommandLimits::new(1.0, 1.0, 1.5);
        let here = Pose2::default();
        assert_eq!(target_position_controller(here, here, 1.0, &lim), CommandTriple::zero());
        let ahead = Pose2 { x: 10.0, ..here };
        assert_eq!(target_position_controller(here, ahead, 1.0, &lim), CommandTriple::new(1.0, 0.0, 0.0));
        let left = Pose2 { y: 3.0, ..here };
        let c = target_position_controller(here, left, 1.0, &lim);
        assert!(c.wz > 0.0);
        assert!(c.vx.abs() < 1e-9 && c.vy.abs() < 1e-9);
    }

    fn trace_to(x: f64, fallen_at: Option<usize>) -> EpisodeTrace {
        let mut t = EpisodeTrace::default();
        for k in 0..10 {
            let mut state = RobotState::standing([x * k as f64 / 9.0, 0.0, 0.38], 0.0, [0.0; 12]);
            state.lin_vel[0] = 1.0;
            t.records.push(TraceRecord {
                time: k as f64 * 0.02,
                segment: 0,
                cmd: CommandTriple::zero(),
                state,
                action: [0.0; 12],
                fallen: fallen_at.is_some_and(|f| k >= f),
                collisions: 0,
                height_above_ground: 0.38,
            });
        }
        t
    }

    #[test]
    fn success_rule() {
        assert!(success_check(&trace_to(4.2, None), 4.0));
        assert!(!success_check(&trace_to(3.0, Some(9)), 4.0));
        assert!(!success_check(&trace_to(3.9, None), 4.0));
        assert!(!success_check(&EpisodeTrace::default(), 4.0));
    }

    #[test]
    fn sigma_boundaries() {
        let s = SigmaSchedule::linear(TerrainKind::Obstacle, 0.0);
        for v in [0.0, 0.7, 2.0] {
            assert_eq!(s.sigma_now(v).unwrap(), BASE_SIGMA);
        }
        let s = SigmaSchedule::linear(TerrainKind::Obstacle, 10.0);
        assert_eq!(s.sigma_now(0.2).unwrap(), BASE_SIGMA);
        assert!((s.sigma_now(1.5).unwrap() - 0.75).abs() < 1e-15);
        assert!(dynamic_sigma(0.25, 0.5, 1.0, (1.0, 1.0), 5.0, SigmaInterpolation::Continuous).is_err());
    }

    #[test]
    fn continuous_sigma_meets_branches() {
        let lo = dynamic_sigma(0.25, 0.75, 0.5, LINEAR_BAND, 10.0, SigmaInterpolation::Continuous).unwrap();
        assert!((lo - 0.25).abs() < 1e-15);
        let hi = dynamic_sigma(0.25, 0.75, 1.5 - 1e-12, LINEAR_BAND, 10.0, SigmaInterpolation::Continuous).unwrap();
        assert!((hi - 0.75).abs() < 1e-9);
        // the printed expression swaps the ends
        let v = dynamic_sigma(0.25, 0.75, 0.5, LINEAR_BAND, 10.0, SigmaInterpolation::Verbatim).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exclusion_speed_cases() {
        let v = exclusion_speed(&[], 5.0, 20.0, 0.5).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let covered = vec![CommandTriple::new(0.5, 0.0, 0.0); 2];
        assert_eq!(exclusion_speed(&covered, 5.0, 20.0, 0.5).unwrap(), 0.0);
        assert!(exclusion_speed(&covered, 10.0, 20.0, 0.5).is_err());
    }

    #[test]
    fn stage_table() {
        assert_eq!(CurriculumStage::from_training_step(0), CurriculumStage::Initial);
        assert_eq!(CurriculumStage::from_training_step(30_000), CurriculumStage::Intermediate);
        assert_eq!(CurriculumStage::from_training_step(60_000), CurriculumStage::Advanced);
        assert_eq!(CurriculumStage::Initial.limits(), CommandLimits::new(0.5, 0.5, 1.0));
    }
}
