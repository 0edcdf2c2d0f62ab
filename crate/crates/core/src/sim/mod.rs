//! Simulator contract and the engine-side episode wrapper.
//!
//! A [`Backend`] only integrates physics. Everything that must behave the
//! same on every backend lives in [`Simulator`]: action clipping, the
//! actuation-latency FIFO, observation noise, spawn checks and fall
//! detection.

pub mod actuator;
pub mod gait;
pub mod reference;
mod state;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::goals::CommandTriple;
use crate::robot::{JointArray, RobotDescription, NUM_JOINTS};
use crate::terrain::{BasePose, Heightfield, SPAWN_APRON};

pub use actuator::{latency_steps, pd_torque, LatencyQueue};
pub use state::{euler_from_quat, projected_gravity, quat_from_euler, wrap_angle, RobotState};

/// Observation layout: `[ω(3), g_proj(3), q(12), q̇(12), cmd(3), a_prev(12)]`.
pub const OBS_DIM: usize = 45;
pub type Observation = [f64; OBS_DIM];

/// Physical randomization applied to one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainRandomization {
    pub friction: f64,
    /// Extra mass on the base in kg (negative removes mass).
    pub payload_mass: f64,
    pub link_mass_scale: f64,
    /// Base center-of-mass shift in meters.
    pub com_offset: [f64; 3],
    pub restitution: f64,
    pub kp_scale: f64,
    pub kd_scale: f64,
    pub actuator_strength_scale: f64,
    /// Constant bias added to every joint target, rad.
    pub actuator_offset: f64,
    /// Seconds between issuing an action and its effect.
    pub control_latency: f64,
}

impl Default for DomainRandomization {
    fn default() -> Self {
        Self::nominal()
    }
}

impl DomainRandomization {
    pub fn nominal() -> Self {
        DomainRandomization {
            friction: 1.0,
            payload_mass: 0.0,
            link_mass_scale: 1.0,
            com_offset: [0.0; 3],
            restitution: 0.0,
            kp_scale: 1.0,
            kd_scale: 1.0,
            actuator_strength_scale: 1.0,
            actuator_offset: 0.0,
            control_latency: 0.0,
        }
    }

    pub fn with_friction(friction: f64) -> Self {
        DomainRandomization {
            friction,
            ..Self::nominal()
        }
    }

    /// Draws every term from its training range.
    pub fn sample_training<R: Rng + ?Sized>(rng: &mut R) -> Self {
        DomainRandomization {
            friction: rng.random_range(0.5..=1.5),
            payload_mass: rng.random_range(-1.0..=1.0),
            link_mass_scale: rng.random_range(0.9..=1.1),
            com_offset: std::array::from_fn(|_| rng.random_range(-0.03..=0.03)),
            restitution: rng.random_range(0.0..=0.5),
            kp_scale: rng.random_range(0.9..=1.1),
            kd_scale: rng.random_range(0.9..=1.1),
            actuator_strength_scale: rng.random_range(0.8..=1.2),
            actuator_offset: rng.random_range(-0.035..=0.035),
            control_latency: rng.random_range(0.0..=0.020),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps = 1e-12;
        let check = |name: &'static str, v: f64, lo: f64, hi: f64| {
            if v.is_finite() && v >= lo - eps && v <= hi + eps {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} outside [{lo}, {hi}]")))
            }
        };
        // evaluation sweeps go down to 0.1, training reaches 1.5
        check("friction", self.friction, 0.1, 1.5)?;
        check("payload_mass", self.payload_mass, -1.0, 1.0)?;
        check("link_mass_scale", self.link_mass_scale, 0.9, 1.1)?;
        for c in self.com_offset {
            check("com_offset", c, -0.03, 0.03)?;
        }
        check("restitution", self.restitution, 0.0, 0.5)?;
        check("kp_scale", self.kp_scale, 0.9, 1.1)?;
        check("kd_scale", self.kd_scale, 0.9, 1.1)?;
        check("actuator_strength_scale", self.actuator_strength_scale, 0.8, 1.2)?;
        check("actuator_offset", self.actuator_offset, -0.035, 0.035)?;
        check("control_latency", self.control_latency, 0.0, 0.020)
    }
}

/// Half-width of the uniform noise added to each observation group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub ang_vel: f64,
    pub gravity: f64,
    pub dof_pos: f64,
    pub dof_vel: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            enabled: true,
            ang_vel: 0.05,
            gravity: 0.025,
            dof_pos: 0.01,
            dof_vel: 1.5,
        }
    }
}

impl NoiseConfig {
    pub fn disabled() -> Self {
        NoiseConfig {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FallConfig {
    /// Base height above the local ground below which the robot is down.
    pub min_height: f64,
    /// Roll or pitch magnitude in rad beyond which the robot is down.
    pub max_tilt: f64,
    /// How long a violation must persist, seconds.
    pub hold: f64,
}

impl Default for FallConfig {
    fn default() -> Self {
        FallConfig {
            min_height: 0.12,
            max_tilt: 1.0,
            hold: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub control_hz: u32,
    pub physics_hz: u32,
    pub kp: f64,
    pub kd: f64,
    pub action_clip: f64,
    pub episode_timeout: f64,
    /// Allowed ground rise under the body footprint at spawn, meters.
    pub spawn_tolerance: f64,
    pub noise: NoiseConfig,
    pub fall: FallConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            control_hz: 50,
            physics_hz: 200,
            kp: 20.0,
            kd: 0.5,
            action_clip: 4.8,
            episode_timeout: 20.0,
            spawn_tolerance: 0.1,
            noise: NoiseConfig::default(),
            fall: FallConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.control_hz == 0 || self.physics_hz == 0 || !self.physics_hz.is_multiple_of(self.control_hz) {
            return Err(Error::param(
                "physics_hz",
                format!("{} is not a multiple of control_hz {}", self.physics_hz, self.control_hz),
            ));
        }
        if !(self.kp > 0.0 && self.kd >= 0.0 && self.action_clip > 0.0 && self.episode_timeout > 0.0) {
            return Err(Error::param("sim", "gains, clip and timeout must be positive"));
        }
        Ok(())
    }

    pub fn substeps(&self) -> usize {
        (self.physics_hz / self.control_hz) as usize
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / f64::from(self.control_hz)
    }

    pub fn physics_dt(&self) -> f64 {
        1.0 / f64::from(self.physics_hz)
    }
}

/// Everything a backend needs to start an episode.
pub struct ResetRequest<'a> {
    pub terrain: &'a Arc<Heightfield>,
    pub dr: &'a DomainRandomization,
    pub seed: u64,
    pub spawn: BasePose,
    pub robot: &'a RobotDescription,
    pub config: &'a SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackendStep {
    pub state: RobotState,
    /// Body/terrain penetration events during the control step.
    pub collisions: u32,
}

/// Physics integration behind the engine's episode wrapper.
pub trait Backend: Send {
    fn name(&self) -> &str;

    fn reset(&mut self, req: &ResetRequest<'_>) -> Result<RobotState>;

    /// Advances one control step. `substep_actions` holds the (already
    /// latency-shifted) joint offsets in force at each physics substep.
    fn step(&mut self, substep_actions: &[JointArray]) -> Result<BackendStep>;
}

/// Creates fresh backends, one per evaluation worker.
pub trait BackendFactory: Send + Sync {
    fn create(&self) -> Result<Box<dyn Backend>>;

    fn describe(&self) -> String;
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub state: RobotState,
    pub fallen: bool,
    pub collisions: u32,
    pub height_above_ground: f64,
}

struct Episode {
    terrain: Arc<Heightfield>,
    state: RobotState,
    latency: LatencyQueue,
    noise_rng: ChaCha8Rng,
    violation_time: f64,
    fallen: bool,
    time: f64,
}

/// One robot in one episode: wraps a backend with the shared contract.
pub struct Simulator {
    backend: Box<dyn Backend>,
    config: SimConfig,
    robot: Arc<RobotDescription>,
    episode: Option<Episode>,
}

/// Where robots are placed by default: on the spawn apron, centered
/// laterally, facing +x.
pub fn default_spawn(terrain: &Heightfield) -> BasePose {
    let (x0, _, y0, y1) = terrain.bounds();
    BasePose {
        x: x0 + 0.5 * SPAWN_APRON,
        y: 0.5 * (y0 + y1),
        z: 0.0,
        yaw: 0.0,
    }
}

impl Simulator {
    pub fn new(backend: Box<dyn Backend>, config: SimConfig, robot: Arc<RobotDescription>) -> Result<Self> {
        config.validate()?;
        robot.validate()?;
        Ok(Simulator {
            backend,
            config,
            robot,
            episode: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn robot(&self) -> &RobotDescription {
        &self.robot
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn reset(&mut self, terrain: Arc<Heightfield>, dr: &DomainRandomization, seed: u64) -> Result<RobotState> {
        let spawn = default_spawn(&terrain);
        self.reset_at(terrain, dr, seed, spawn)
    }

    pub fn reset_at(
        &mut self,
        terrain: Arc<Heightfield>,
        dr: &DomainRandomization,
        seed: u64,
        spawn: BasePose,
    ) -> Result<RobotState> {
        dr.validate()?;
        self.check_spawn(&terrain, &spawn)?;
        let spawn = BasePose {
            z: terrain.height_at_clamped(spawn.x, spawn.y) + self.robot.nominal_base_height,
            ..spawn
        };
        let state = self.backend.reset(&ResetRequest {
            terrain: &terrain,
            dr,
            seed,
            spawn,
            robot: &self.robot,
            config: &self.config,
        })?;
        state.validate()?;
        let delay = latency_steps(dr.control_latency, self.config.physics_hz);
        self.episode = Some(Episode {
            terrain,
            state: state.clone(),
            latency: LatencyQueue::new(delay, [0.0; NUM_JOINTS]),
            noise_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6f62_735f_6e6f_6973),
            violation_time: 0.0,
            fallen: false,
            time: 0.0,
        });
        Ok(state)
    }

    fn check_spawn(&self, terrain: &Heightfield, spawn: &BasePose) -> Result<()> {
        let ground = terrain.height_at_clamped(spawn.x, spawn.y);
        let (s, c) = spawn.yaw.sin_cos();
        let mut rise: f64 = 0.0;
        for i in 0..=6 {
            let bx = -0.3 + 0.1 * f64::from(i);
            for j in 0..=3 {
                let by = -0.15 + 0.1 * f64::from(j);
                let h = terrain.height_at_clamped(spawn.x + c * bx - s * by, spawn.y + s * bx + c * by);
                rise = rise.max(h - ground);
            }
        }
        if rise > self.config.spawn_tolerance {
            return Err(Error::SpawnCollision {
                rise,
                tolerance: self.config.spawn_tolerance,
            });
        }
        Ok(())
    }

    /// Applies one policy action (joint offsets from the default pose).
    pub fn step(&mut self, action: &JointArray) -> Result<StepResult> {
        ensure_finite("action", action)?;
        let clip = self.config.action_clip;
        let action = action.map(|a| a.clamp(-clip, clip));
        let substeps = self.config.substeps();
        let control_dt = self.config.control_dt();
        let episode = self.episode.as_mut().ok_or(Error::NotReset)?;
        let shifted: Vec<JointArray> = (0..substeps).map(|_| episode.latency.push(action)).collect();
        let out = self.backend.step(&shifted)?;
        out.state.validate()?;

        let ground = episode
            .terrain
            .height_at_clamped(out.state.position[0], out.state.position[1]);
        let height = out.state.position[2] - ground;
        let (roll, pitch, _) = out.state.euler();
        let fall = &self.config.fall;
        let violating = height < fall.min_height || roll.abs() > fall.max_tilt || pitch.abs() > fall.max_tilt;
        if violating {
            episode.violation_time += control_dt;
        } else {
            episode.violation_time = 0.0;
        }
        if episode.violation_time >= fall.hold - 1e-9 {
            episode.fallen = true;
        }
        episode.time += control_dt;
        episode.state = out.state.clone();
        Ok(StepResult {
            state: out.state,
            fallen: episode.fallen,
            collisions: out.collisions,
            height_above_ground: height,
        })
    }

    pub fn state(&self) -> Result<&RobotState> {
        self.episode.as_ref().map(|e| &e.state).ok_or(Error::NotReset)
    }

    pub fn time(&self) -> f64 {
        self.episode.as_ref().map_or(0.0, |e| e.time)
    }

    pub fn terrain(&self) -> Option<&Arc<Heightfield>> {
        self.episode.as_ref().map(|e| &e.terrain)
    }

    pub fn has_fallen(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.fallen)
    }

    /// Observation of the current state, noisy when noise is enabled.
    pub fn observe(&mut self, cmd: &CommandTriple, prev_action: &JointArray) -> Result<Observation> {
        let noise = self.config.noise.clone();
        let episode = self.episode.as_mut().ok_or(Error::NotReset)?;
        let rng = noise.enabled.then_some(&mut episode.noise_rng);
        Ok(observe(&episode.state, cmd, prev_action, &noise, rng))
    }
}

/// Assembles the 45-dim observation. Noise is drawn only when `rng` is
/// given and `noise.enabled` is set.
pub fn observe<R: Rng + ?Sized>(
    state: &RobotState,
    cmd: &CommandTriple,
    prev_action: &JointArray,
    noise: &NoiseConfig,
    rng: Option<&mut R>,
) -> Observation {
    let mut obs = [0.0; OBS_DIM];
    obs[0..3].copy_from_slice(&state.ang_vel);
    obs[3..6].copy_from_slice(&state.projected_gravity);
    obs[6..18].copy_from_slice(&state.q);
    obs[18..30].copy_from_slice(&state.dq);
    obs[30] = cmd.vx;
    obs[31] = cmd.vy;
    obs[32] = cmd.wz;
    obs[33..45].copy_from_slice(prev_action);
    if noise.enabled {
        if let Some(rng) = rng {
            let groups = [
                (0..3, noise.ang_vel),
                (3..6, noise.gravity),
                (6..18, noise.dof_pos),
                (18..30, noise.dof_vel),
            ];
            for (range, half) in groups {
                for v in &mut obs[range] {
                    *v += rng.random_range(-1.0..=1.0) * half;
                }
            }
        }
    }
    obs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::reference::ReferenceFactory;
    use crate::terrain::{generate, TerrainKind, TerrainSpec};

    fn sim() -> Simulator {
        let backend = ReferenceFactory::default().create().unwrap();
        Simulator::new(backend, SimConfig::default(), Arc::new(RobotDescription::go2())).unwrap()
    }

    fn flat() -> Arc<Heightfield> {
        Arc::new(generate(&TerrainSpec::tile(TerrainKind::Flat, 0.1, 0)).unwrap())
    }

    #[test]
    fn reset_on_flat_stands_at_nominal_height() {
        let mut s = sim();
        let st = s.reset(flat(), &DomainRandomization::nominal(), 3).unwrap();
        assert!((st.position[2] - 0.38).abs() < 1e-12);
        assert_eq!(st.q, RobotDescription::go2().default_pose());
    }

    #[test]
    fn step_before_reset_fails() {
        let mut s = sim();
        assert!(matches!(s.step(&[0.0; 12]), Err(Error::NotReset)));
        let mut s = sim();
        s.reset(flat(), &DomainRandomization::nominal(), 0).unwrap();
        let mut a = [0.0; 12];
        a[4] = f64::NAN;
        assert!(matches!(s.step(&a), Err(Error::NonFinite(_))));
    }

    #[test]
    fn zero_action_holds_zero_torque() {
        let mut s = sim();
        s.reset(flat(), &DomainRandomization::nominal(), 0).unwrap();
        for _ in 0..10 {
            let r = s.step(&[0.0; 12]).unwrap();
            assert!(r.state.tau.iter().all(|&t| t == 0.0));
            assert!(!r.fallen);
        }
    }

    #[test]
    fn observation_layout_and_noise_switch() {
        let mut s = sim();
        s.reset(flat(), &DomainRandomization::nominal(), 0).unwrap();
        let cmd = CommandTriple::new(0.5, -0.2, 0.3);
        let prev = [0.25; 12];
        let st = s.state().unwrap().clone();
        let clean = observe::<ChaCha8Rng>(&st, &cmd, &prev, &NoiseConfig::disabled(), None);
        assert_eq!(clean.len(), 45);
        assert_eq!(&clean[0..3], &[0.0; 3]);
        assert_eq!(&clean[3..6], &[0.0, 0.0, -1.0]);
        assert_eq!(&clean[30..33], &[0.5, -0.2, 0.3]);
        assert_eq!(&clean[33..45], &prev);
        let again = observe::<ChaCha8Rng>(&st, &cmd, &prev, &NoiseConfig::disabled(), None);
        assert_eq!(clean, again);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noisy = observe(&st, &cmd, &prev, &NoiseConfig::default(), Some(&mut rng));
        assert_ne!(noisy, clean);
        for i in 18..30 {
            assert!((noisy[i] - clean[i]).abs() <= 1.5);
        }
        // command and previous action stay clean
        assert_eq!(&noisy[30..45], &clean[30..45]);
    }

    #[test]
    fn bad_physics_rate_rejected() {
        let cfg = SimConfig {
            physics_hz: 210,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn spawn_on_a_box_is_rejected() {
        let mut heights = vec![0.0f32; 40 * 40];
        for ix in 0..40 {
            for iy in 0..40 {
                if (5..8).contains(&ix) && (18..22).contains(&iy) {
                    heights[ix * 40 + iy] = 0.3;
                }
            }
        }
        let hf = Arc::new(Heightfield::from_grid(40, 40, heights, 0.1).unwrap());
        let mut s = sim();
        let spawn = BasePose { x: 0.4, y: 1.95, z: 0.0, yaw: 0.0 };
        let err = s.reset_at(hf, &DomainRandomization::nominal(), 0, spawn).unwrap_err();
        assert!(matches!(err, Error::SpawnCollision { .. }));
    }

    #[test]
    fn dr_ranges_are_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            DomainRandomization::sample_training(&mut rng).validate().unwrap();
        }
        assert!(DomainRandomization::with_friction(0.05).validate().is_err());
        let dr = DomainRandomization {
            control_latency: 0.05,
            ..DomainRandomization::nominal()
        };
        assert!(dr.validate().is_err());
    }
}
