//! Deterministic kinodynamic reference backend.
//!
//! This is not a physics engine. The base rides the heightfield at its
//! nominal height and is propelled by stance-leg odometry decoded from the
//! joint offsets in force: a leg whose calf is not lifted (offset at or
//! above `-stance_threshold`) at both ends of a control period pushes the
//! body by `leg_length * Δthigh / dt` forward, `-leg_length * Δhip / dt`
//! laterally, and left/right speed differences over `track_width` produce
//! yaw. Joints follow their targets through a first-order lag and the
//! torque is the PD law evaluated on that motion.
//!
//! Degradation is a closed-form function of the episode:
//!
//! * tracking efficiency
//!   `η = clamp(1 - c_d·d - c_μ·(1 - μ)⁺ - c_p·payload⁺, η_min, 1)`
//!   with `d = 0` on flat ground;
//! * effective capability
//!   `L_eff = L_cap(kind) - round(s_μ·(1 - μ)⁺ + s_p·payload⁺)`;
//!   on a terrain of level `> L_eff` the robot tumbles once it has covered
//!   `fall_distance` meters;
//! * a forward center-of-mass shift `c` tilts the base nose-down by
//!   `atan(c / h_nominal) · com_compliance` (lateral shifts roll it).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendFactory, BackendStep, DomainRandomization, ResetRequest, RobotState};
use crate::error::{Error, Result};
use crate::robot::{JointArray, CALF_JOINTS, HIP_JOINTS, LEFT_LEGS, NUM_FEET, NUM_JOINTS, RIGHT_LEGS, THIGH_JOINTS};
use crate::sim::{pd_torque, projected_gravity, quat_from_euler};
use crate::terrain::{Heightfield, TerrainKind};

/// Effective leg lever used by the stance odometry, meters.
pub const LEG_LENGTH: f64 = 0.3;
/// Lateral distance between left and right feet, meters.
pub const TRACK_WIDTH: f64 = 0.3;
/// Calf offsets above `-STANCE_THRESHOLD` count as ground contact.
pub const STANCE_THRESHOLD: f64 = 0.02;

/// Highest level the proxy gait can traverse, per terrain kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapabilityProfile {
    pub levels: BTreeMap<TerrainKind, u8>,
    /// Levels lost per unit of friction below 1.0.
    pub friction_sensitivity: f64,
    /// Levels lost per kg of added payload.
    pub payload_sensitivity: f64,
}

impl Default for CapabilityProfile {
    fn default() -> Self {
        Self::uniform(10)
    }
}

impl CapabilityProfile {
    pub fn uniform(level: u8) -> Self {
        CapabilityProfile {
            levels: TerrainKind::ALL.iter().map(|&k| (k, level.min(10))).collect(),
            friction_sensitivity: 0.0,
            payload_sensitivity: 0.0,
        }
    }

    pub fn with_level(mut self, kind: TerrainKind, level: u8) -> Self {
        self.levels.insert(kind, level.min(10));
        self
    }

    pub fn level(&self, kind: TerrainKind) -> u8 {
        self.levels.get(&kind).copied().unwrap_or(10)
    }

    pub fn effective_level(&self, kind: TerrainKind, dr: &DomainRandomization) -> u8 {
        let loss = self.friction_sensitivity * (1.0 - dr.friction).max(0.0)
            + self.payload_sensitivity * dr.payload_mass.max(0.0);
        let loss = loss.round().max(0.0) as i32;
        (i32::from(self.level(kind)) - loss).max(0) as u8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceConfig {
    pub joint_time_constant: f64,
    pub base_time_constant: f64,
    pub difficulty_drag: f64,
    pub friction_drag: f64,
    pub payload_drag: f64,
    pub min_efficiency: f64,
    pub max_speed: f64,
    pub fall_distance: f64,
    pub com_compliance: f64,
    pub capability: CapabilityProfile,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            joint_time_constant: 0.03,
            base_time_constant: 0.1,
            difficulty_drag: 0.15,
            friction_drag: 0.3,
            payload_drag: 0.02,
            min_efficiency: 0.3,
            max_speed: 4.5,
            fall_distance: 1.5,
            com_compliance: 0.5,
            capability: CapabilityProfile::default(),
        }
    }
}

impl ReferenceConfig {
    /// Fraction of the decoded stride speed that reaches the base.
    pub fn efficiency(&self, kind: Option<TerrainKind>, difficulty: f64, dr: &DomainRandomization) -> f64 {
        let d = match kind {
            Some(TerrainKind::Flat) | None => 0.0,
            Some(_) => difficulty,
        };
        let eta = 1.0
            - self.difficulty_drag * d
            - self.friction_drag * (1.0 - dr.friction).max(0.0)
            - self.payload_drag * dr.payload_mass.max(0.0);
        eta.clamp(self.min_efficiency, 1.0)
    }

    /// Steady nose-down pitch caused by a center-of-mass shift.
    pub fn com_pitch_bias(&self, dr: &DomainRandomization, base_height: f64) -> f64 {
        (dr.com_offset[0] / base_height).atan() * self.com_compliance
    }

    pub fn com_roll_bias(&self, dr: &DomainRandomization, base_height: f64) -> f64 {
        -(dr.com_offset[1] / base_height).atan() * self.com_compliance
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReferenceFactory {
    pub config: ReferenceConfig,
}

impl ReferenceFactory {
    pub fn new(config: ReferenceConfig) -> Self {
        ReferenceFactory { config }
    }
}

impl BackendFactory for ReferenceFactory {
    fn create(&self) -> Result<Box<dyn Backend>> {
        Ok(Box::new(ReferenceBackend::new(self.config.clone())))
    }

    fn describe(&self) -> String {
        "reference".into()
    }
}

struct Live {
    terrain: Arc<Heightfield>,
    dr: DomainRandomization,
    default_pose: JointArray,
    hard_limits: [(f64, f64); NUM_JOINTS],
    torque_limits: JointArray,
    kp: f64,
    kd: f64,
    physics_dt: f64,
    control_dt: f64,
    substeps: usize,
    nominal_height: f64,
    mass_ratio: f64,
    efficiency: f64,
    over_capability: bool,
    // base
    x: f64,
    y: f64,
    z: f64,
    yaw: f64,
    roll: f64,
    pitch: f64,
    v_body: [f64; 2],
    v_z: f64,
    yaw_rate: f64,
    path_length: f64,
    tumbling: bool,
    tumble_pitch: f64,
    tumble_sag: f64,
    // joints
    q: JointArray,
    dq: JointArray,
    tau: JointArray,
    // applied actions of the last `substeps` physics steps
    history: Vec<JointArray>,
    cursor: usize,
    drive: [f64; 3],
}

pub struct ReferenceBackend {
    config: ReferenceConfig,
    live: Option<Live>,
}

impl ReferenceBackend {
    pub fn new(config: ReferenceConfig) -> Self {
        ReferenceBackend { config, live: None }
    }
}

fn in_stance(action: &JointArray, leg: usize) -> bool {
    action[CALF_JOINTS[leg]] >= -STANCE_THRESHOLD
}

/// Body-frame `(vx, vy, wz)` decoded from two action samples one control
/// period apart.
pub fn decode_drive(before: &JointArray, after: &JointArray, control_dt: f64) -> [f64; 3] {
    let mut fwd = [None; NUM_FEET];
    let mut lat_sum = 0.0;
    let mut n = 0usize;
    for leg in 0..NUM_FEET {
        if in_stance(before, leg) && in_stance(after, leg) {
            let t = THIGH_JOINTS[leg];
            let h = HIP_JOINTS[leg];
            fwd[leg] = Some(LEG_LENGTH * (after[t] - before[t]) / control_dt);
            lat_sum += -LEG_LENGTH * (after[h] - before[h]) / control_dt;
            n += 1;
        }
    }
    if n == 0 {
        return [0.0; 3];
    }
    let vx = fwd.iter().flatten().sum::<f64>() / n as f64;
    let vy = lat_sum / n as f64;
    let side_mean = |legs: [usize; 2]| {
        let vals: Vec<f64> = legs.iter().filter_map(|&l| fwd[l]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let wz = match (side_mean(RIGHT_LEGS), side_mean(LEFT_LEGS)) {
        (Some(r), Some(l)) => (r - l) / TRACK_WIDTH,
        _ => 0.0,
    };
    [vx, vy, wz]
}

impl Live {
    fn ground(&self, x: f64, y: f64) -> f64 {
        self.terrain.height_at_clamped(x, y)
    }

    fn terrain_attitude(&self) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        let r = 0.2;
        let fwd = (self.ground(self.x + c * r, self.y + s * r) - self.ground(self.x - c * r, self.y - s * r)) / (2.0 * r);
        let lat = (self.ground(self.x - s * r, self.y + c * r) - self.ground(self.x + s * r, self.y - c * r)) / (2.0 * r);
        (lat.atan(), -fwd.atan())
    }

    fn collisions(&self) -> u32 {
        let (s, c) = self.yaw.sin_cos();
        let bottom = self.z - 0.08;
        let mut n = 0;
        for (bx, by) in [(0.19, 0.06), (0.19, -0.06), (-0.19, 0.06), (-0.19, -0.06)] {
            if self.ground(self.x + c * bx - s * by, self.y + s * bx + c * by) > bottom {
                n += 1;
            }
        }
        n
    }

    fn substep(&mut self, config: &ReferenceConfig, action: &JointArray) {
        let dt = self.physics_dt;
        let before = self.history[self.cursor];
        self.history[self.cursor] = *action;
        self.cursor = (self.cursor + 1) % self.substeps;
        self.drive = decode_drive(&before, action, self.control_dt);

        // base
        let alpha = (dt / (config.base_time_constant * self.mass_ratio)).min(1.0);
        let mut target = [self.efficiency * self.drive[0], self.efficiency * self.drive[1]];
        let mut target_yaw = self.efficiency * self.drive[2];
        let speed = target[0].hypot(target[1]);
        if speed > config.max_speed {
            target = target.map(|v| v * config.max_speed / speed);
        }
        if self.tumbling {
            target = [0.0; 2];
            target_yaw = 0.0;
        }
        for (v, t) in self.v_body.iter_mut().zip(target) {
            *v += (t - *v) * alpha;
        }
        self.yaw_rate += (target_yaw - self.yaw_rate) * alpha;
        self.yaw += self.yaw_rate * dt;
        let (s, c) = self.yaw.sin_cos();
        self.x += (c * self.v_body[0] - s * self.v_body[1]) * dt;
        self.y += (s * self.v_body[0] + c * self.v_body[1]) * dt;
        self.path_length += self.v_body[0].hypot(self.v_body[1]) * dt;
        if self.over_capability && self.path_length >= config.fall_distance {
            self.tumbling = true;
        }
        if self.tumbling {
            self.tumble_pitch += 6.0 * dt;
            self.tumble_sag = (self.tumble_sag + 1.0 * dt).min(self.nominal_height - 0.05);
        }
        let z_prev = self.z;
        self.z = self.ground(self.x, self.y) + self.nominal_height - self.tumble_sag;
        self.v_z = (self.z - z_prev) / dt;
        let (roll_t, pitch_t) = self.terrain_attitude();
        self.roll = roll_t + config.com_roll_bias(&self.dr, self.nominal_height);
        self.pitch = pitch_t + config.com_pitch_bias(&self.dr, self.nominal_height) + self.tumble_pitch;

        // joints
        let strength = self.dr.actuator_strength_scale;
        let kp = self.kp * self.dr.kp_scale;
        let kd = self.kd * self.dr.kd_scale;
        let tc = config.joint_time_constant / (strength * self.dr.kp_scale);
        for i in 0..NUM_JOINTS {
            let target = self.default_pose[i] + action[i] + self.dr.actuator_offset;
            let mut dq = (target - self.q[i]) / tc;
            let tau = strength * pd_torque(kp, kd, target, self.q[i], dq);
            self.tau[i] = tau.clamp(-self.torque_limits[i], self.torque_limits[i]);
            let (lo, hi) = self.hard_limits[i];
            let next = self.q[i] + dq * dt;
            if next < lo || next > hi {
                self.q[i] = next.clamp(lo, hi);
                dq = 0.0;
            } else {
                self.q[i] = next;
            }
            self.dq[i] = dq;
        }
    }

    fn state(&self, prev_attitude: (f64, f64), elapsed: f64, action: &JointArray) -> RobotState {
        let orientation = quat_from_euler(self.roll, self.pitch, self.yaw);
        RobotState {
            position: [self.x, self.y, self.z],
            orientation,
            lin_vel: [self.v_body[0], self.v_body[1], self.v_z],
            ang_vel: [
                (self.roll - prev_attitude.0) / elapsed,
                (self.pitch - prev_attitude.1) / elapsed,
                self.yaw_rate,
            ],
            q: self.q,
            dq: self.dq,
            tau: self.tau,
            contacts: std::array::from_fn(|leg| !self.tumbling && in_stance(action, leg)),
            projected_gravity: projected_gravity(&orientation),
        }
    }
}

impl Backend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn reset(&mut self, req: &ResetRequest<'_>) -> Result<RobotState> {
        let spec = req.terrain.spec.as_ref();
        let kind = spec.map(|s| s.kind);
        let difficulty = spec.map_or(0.0, |s| s.difficulty);
        let over_capability = match spec {
            Some(s) => s.level() > self.config.capability.effective_level(s.kind, req.dr),
            None => false,
        };
        let robot = req.robot;
        let total_mass = robot.base_mass * req.dr.link_mass_scale + req.dr.payload_mass;
        let substeps = req.config.substeps();
        let mut live = Live {
            terrain: Arc::clone(req.terrain),
            dr: req.dr.clone(),
            default_pose: robot.default_pose(),
            hard_limits: robot.hard_limits(),
            torque_limits: robot.torque_limits(),
            kp: req.config.kp,
            kd: req.config.kd,
            physics_dt: req.config.physics_dt(),
            control_dt: req.config.control_dt(),
            substeps,
            nominal_height: robot.nominal_base_height,
            mass_ratio: (total_mass / robot.base_mass).max(0.1),
            efficiency: self.config.efficiency(kind, difficulty, req.dr),
            over_capability,
            x: req.spawn.x,
            y: req.spawn.y,
            z: req.spawn.z,
            yaw: req.spawn.yaw,
            roll: 0.0,
            pitch: 0.0,
            v_body: [0.0; 2],
            v_z: 0.0,
            yaw_rate: 0.0,
            path_length: 0.0,
            tumbling: false,
            tumble_pitch: 0.0,
            tumble_sag: 0.0,
            q: robot.default_pose(),
            dq: [0.0; NUM_JOINTS],
            tau: [0.0; NUM_JOINTS],
            history: vec![[0.0; NUM_JOINTS]; substeps],
            cursor: 0,
            drive: [0.0; 3],
        };
        live.z = live.ground(live.x, live.y) + live.nominal_height;
        let (roll_t, pitch_t) = live.terrain_attitude();
        live.roll = roll_t + self.config.com_roll_bias(req.dr, live.nominal_height);
        live.pitch = pitch_t + self.config.com_pitch_bias(req.dr, live.nominal_height);
        let attitude = (live.roll, live.pitch);
        let mut state = live.state(attitude, 1.0, &[0.0; NUM_JOINTS]);
        state.ang_vel = [0.0; 3];
        self.live = Some(live);
        Ok(state)
    }

    fn step(&mut self, substep_actions: &[JointArray]) -> Result<BackendStep> {
        let live = self.live.as_mut().ok_or(Error::NotReset)?;
        if substep_actions.len() != live.substeps {
            return Err(Error::Shape {
                what: "substep actions".into(),
                expected: live.substeps.to_string(),
                found: substep_actions.len().to_string(),
            });
        }
        let attitude = (live.roll, live.pitch);
        let mut collisions = 0;
        for action in substep_actions {
            live.substep(&self.config, action);
            collisions += live.collisions();
        }
        let last = substep_actions.last().copied().unwrap_or([0.0; NUM_JOINTS]);
        Ok(BackendStep {
            state: live.state(attitude, live.control_dt, &last),
            collisions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::RobotDescription;
    use crate::sim::{SimConfig, Simulator};
    use crate::terrain::{generate, TerrainSpec};

    fn simulator(config: ReferenceConfig) -> Simulator {
        Simulator::new(
            Box::new(ReferenceBackend::new(config)),
            SimConfig::default(),
            Arc::new(RobotDescription::go2()),
        )
        .unwrap()
    }

    #[test]
    fn decode_single_pair_forward() {
        let before = [0.0; 12];
        let mut after = [0.0; 12];
        // FL and RR stance, FR and RL lifted
        after[THIGH_JOINTS[0]] = 0.02;
        after[THIGH_JOINTS[3]] = 0.02;
        let mut b = before;
        b[CALF_JOINTS[1]] = -0.3;
        b[CALF_JOINTS[2]] = -0.3;
        after[CALF_JOINTS[1]] = -0.3;
        after[CALF_JOINTS[2]] = -0.3;
        let v = decode_drive(&b, &after, 0.02);
        assert!((v[0] - 0.3).abs() < 1e-12);
        assert_eq!(v[1], 0.0);
        assert!(v[2].abs() < 1e-12);
    }

    #[test]
    fn capability_loses_levels_with_friction() {
        let mut cap = CapabilityProfile::uniform(8);
        cap.friction_sensitivity = 5.0;
        assert_eq!(cap.effective_level(TerrainKind::Wave, &DomainRandomization::nominal()), 8);
        assert_eq!(cap.effective_level(TerrainKind::Wave, &DomainRandomization::with_friction(0.6)), 6);
        assert_eq!(cap.effective_level(TerrainKind::Wave, &DomainRandomization::with_friction(0.1)), 3);
    }

    #[test]
    fn efficiency_is_monotone_in_friction_and_difficulty() {
        let cfg = ReferenceConfig::default();
        let lo = cfg.efficiency(Some(TerrainKind::Wave), 0.5, &DomainRandomization::with_friction(0.1));
        let hi = cfg.efficiency(Some(TerrainKind::Wave), 0.5, &DomainRandomization::with_friction(1.0));
        assert!(lo < hi);
        let easy = cfg.efficiency(Some(TerrainKind::Wave), 0.1, &DomainRandomization::nominal());
        let hard = cfg.efficiency(Some(TerrainKind::Wave), 0.9, &DomainRandomization::nominal());
        assert!(hard < easy);
        assert_eq!(cfg.efficiency(Some(TerrainKind::Flat), 1.0, &DomainRandomization::nominal()), 1.0);
    }

    #[test]
    fn com_offset_gives_closed_form_pitch_bias() {
        let cfg = ReferenceConfig::default();
        let mut s = simulator(cfg.clone());
        let hf = Arc::new(generate(&TerrainSpec::tile(TerrainKind::Flat, 0.1, 0)).unwrap());
        let dr = DomainRandomization {
            com_offset: [0.03, 0.0, 0.0],
            ..DomainRandomization::nominal()
        };
        s.reset(hf, &dr, 0).unwrap();
        let mut pitch = 0.0;
        for _ in 0..50 {
            pitch = s.step(&[0.0; 12]).unwrap().state.euler().1;
        }
        let expected = (0.03f64 / 0.38).atan() * cfg.com_compliance;
        assert!((pitch - expected).abs() < 1e-12);
        assert!(pitch > 0.0, "forward shift pitches the nose down");
    }

    #[test]
    fn base_follows_slope() {
        let mut s = simulator(ReferenceConfig::default());
        let hf = Arc::new(generate(&TerrainSpec::tile(TerrainKind::SlopeUp, 0.5, 0)).unwrap());
        let st = s.reset(hf.clone(), &DomainRandomization::nominal(), 0).unwrap();
        assert!(st.euler().1.abs() < 1e-9, "the spawn apron is level");
        let on_slope = crate::terrain::BasePose { x: 2.5, y: 4.0, z: 0.0, yaw: 0.0 };
        let st = s.reset_at(hf, &DomainRandomization::nominal(), 0, on_slope).unwrap();
        let (_, pitch, _) = st.euler();
        assert!((pitch + 0.32f64.atan()).abs() < 1e-6);
        assert!((st.position[2] - (0.32 * 1.5 + 0.38)).abs() < 1e-6);
    }

    #[test]
    fn joints_lag_toward_targets() {
        let mut s = simulator(ReferenceConfig::default());
        let hf = Arc::new(generate(&TerrainSpec::tile(TerrainKind::Flat, 0.1, 0)).unwrap());
        s.reset(hf, &DomainRandomization::nominal(), 0).unwrap();
        let mut a = [0.0; 12];
        a[1] = 0.2;
        let first = s.step(&a).unwrap().state;
        let moved = first.q[1] - 0.8;
        assert!(moved > 0.0 && moved < 0.2);
        assert!(first.tau[1] > 0.0);
        for _ in 0..100 {
            s.step(&a).unwrap();
        }
        let settled = s.state().unwrap();
        assert!((settled.q[1] - 1.0).abs() < 1e-6);
    }
}
