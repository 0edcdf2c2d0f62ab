//! Parametric trot whose stance strokes the reference backend decodes back
//! into exactly the commanded body velocity.
//!
//! The cycle is [`PERIOD_TICKS`] control steps. Diagonal pairs (FL+RR and
//! FR+RL) are half a cycle apart. A leg is in stance for ticks `0..=10` and
//! advances its thigh by `v_leg * dt / LEG_LENGTH` per tick (hip by
//! `-v_y * dt / LEG_LENGTH`), then swings back with a lifted calf to the
//! landing point that centers the next stroke.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::reference::{ReferenceBackend, ReferenceConfig, LEG_LENGTH, TRACK_WIDTH};
use super::{DomainRandomization, RobotState, SimConfig, Simulator};
use crate::error::Result;
use crate::goals::CommandTriple;
use crate::robot::{JointArray, RobotDescription, CALF_JOINTS, HIP_JOINTS, NUM_FEET, RIGHT_LEGS, THIGH_JOINTS};
use crate::terrain::Heightfield;

pub const PERIOD_TICKS: u32 = 20;
const HALF: u32 = PERIOD_TICKS / 2;
/// Commands below this magnitude stop the gait.
pub const STAND_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct TrotGenerator {
    control_dt: f64,
    lift: f64,
    active: bool,
    tick: u32,
    idle_ticks: u32,
    thigh: [f64; NUM_FEET],
    hip: [f64; NUM_FEET],
    liftoff: [(f64, f64); NUM_FEET],
}

impl TrotGenerator {
    pub fn new(control_dt: f64) -> Self {
        TrotGenerator {
            control_dt,
            lift: 0.5,
            active: false,
            tick: 0,
            idle_ticks: 0,
            thigh: [0.0; NUM_FEET],
            hip: [0.0; NUM_FEET],
            liftoff: [(0.0, 0.0); NUM_FEET],
        }
    }

    pub fn with_lift(mut self, lift: f64) -> Self {
        self.lift = lift;
        self
    }

    pub fn reset(&mut self) {
        *self = TrotGenerator::new(self.control_dt).with_lift(self.lift);
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    fn leg_phase(&self, leg: usize) -> u32 {
        // FL (0) and RR (3) share a phase
        let offset = if leg == 0 || leg == 3 { 0 } else { HALF };
        (self.tick + offset) % PERIOD_TICKS
    }

    /// Joint offsets for the next control step.
    pub fn next_action(&mut self, cmd: &CommandTriple) -> JointArray {
        let moving = cmd.vx.abs() >= STAND_THRESHOLD || cmd.vy.abs() >= STAND_THRESHOLD || cmd.wz.abs() >= STAND_THRESHOLD;
        if !self.active {
            if !moving {
                return [0.0; 12];
            }
            // start mid-stance on FL+RR so the first period has no stroke
            self.active = true;
            self.tick = HALF / 2;
            self.idle_ticks = 0;
            self.thigh = [0.0; NUM_FEET];
            self.hip = [0.0; NUM_FEET];
            self.liftoff = [(0.0, 0.0); NUM_FEET];
            return self.pose();
        }
        self.idle_ticks = if moving { 0 } else { self.idle_ticks + 1 };
        self.tick = (self.tick + 1) % PERIOD_TICKS;
        let (vx, vy, wz) = if moving { (cmd.vx, cmd.vy, cmd.wz) } else { (0.0, 0.0, 0.0) };
        for leg in 0..NUM_FEET {
            let side = if RIGHT_LEGS.contains(&leg) { 1.0 } else { -1.0 };
            let stroke_thigh = (vx + side * wz * TRACK_WIDTH / 2.0) * self.control_dt / LEG_LENGTH;
            let stroke_hip = -vy * self.control_dt / LEG_LENGTH;
            let phase = self.leg_phase(leg);
            if (1..=HALF).contains(&phase) {
                self.thigh[leg] += stroke_thigh;
                self.hip[leg] += stroke_hip;
                if phase == HALF {
                    self.liftoff[leg] = (self.thigh[leg], self.hip[leg]);
                }
            } else {
                let m = if phase == 0 { HALF } else { phase - HALF };
                let blend = (1.0 - (PI * f64::from(m) / f64::from(HALF)).cos()) / 2.0;
                let land_thigh = -(HALF as f64 / 2.0) * stroke_thigh;
                let land_hip = -(HALF as f64 / 2.0) * stroke_hip;
                let (t0, h0) = self.liftoff[leg];
                self.thigh[leg] = t0 + (land_thigh - t0) * blend;
                self.hip[leg] = h0 + (land_hip - h0) * blend;
            }
        }
        if self.idle_ticks >= PERIOD_TICKS {
            self.active = false;
            self.thigh = [0.0; NUM_FEET];
            self.hip = [0.0; NUM_FEET];
            return [0.0; 12];
        }
        self.pose()
    }

    fn pose(&self) -> JointArray {
        let mut a = [0.0; 12];
        for leg in 0..NUM_FEET {
            a[THIGH_JOINTS[leg]] = self.thigh[leg];
            a[HIP_JOINTS[leg]] = self.hip[leg];
            let phase = self.leg_phase(leg);
            if phase > HALF {
                a[CALF_JOINTS[leg]] = -self.lift * (PI * f64::from(phase - HALF) / f64::from(HALF)).sin();
            }
        }
        a
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaitTrajectory {
    pub states: Vec<RobotState>,
    pub fell: bool,
}

/// Drives the reference backend with the trot generator at a constant
/// command for `duration` seconds (or until a fall).
pub fn run_reference_gait(
    terrain: Arc<Heightfield>,
    dr: &DomainRandomization,
    cmd: CommandTriple,
    duration: f64,
    reference: ReferenceConfig,
    seed: u64,
) -> Result<GaitTrajectory> {
    let config = SimConfig::default();
    let mut sim = Simulator::new(
        Box::new(ReferenceBackend::new(reference)),
        config.clone(),
        Arc::new(RobotDescription::go2()),
    )?;
    let mut states = vec![sim.reset(terrain, dr, seed)?];
    let mut gait = TrotGenerator::new(config.control_dt());
    let steps = (duration * f64::from(config.control_hz)).round() as usize;
    for _ in 0..steps {
        let action = gait.next_action(&cmd);
        let out = sim.step(&action)?;
        states.push(out.state);
        if out.fallen {
            return Ok(GaitTrajectory { states, fell: true });
        }
    }
    Ok(GaitTrajectory { states, fell: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::reference::{decode_drive, CapabilityProfile};
    use crate::terrain::{generate, TerrainKind, TerrainSpec};

    fn tile(kind: TerrainKind, d: f64) -> Arc<Heightfield> {
        Arc::new(generate(&TerrainSpec::tile(kind, d, 1)).unwrap())
    }

    #[test]
    fn decoded_drive_equals_command_in_steady_gait() {
        let mut gait = TrotGenerator::new(0.02);
        let cmd = CommandTriple::new(1.2, -0.4, 0.7);
        let mut prev = gait.next_action(&cmd);
        for k in 0..80 {
            let next = gait.next_action(&cmd);
            let v = decode_drive(&prev, &next, 0.02);
            if k > 0 {
                assert!((v[0] - 1.2).abs() < 1e-9, "vx {} at {k}", v[0]);
                assert!((v[1] + 0.4).abs() < 1e-9);
                assert!((v[2] - 0.7).abs() < 1e-9);
            }
            prev = next;
        }
    }

    #[test]
    fn zero_command_stands_still() {
        let mut gait = TrotGenerator::new(0.02);
        assert_eq!(gait.next_action(&CommandTriple::zero()), [0.0; 12]);
        assert!(!gait.is_active());
    }

    #[test]
    fn gait_winds_down_after_stop() {
        let mut gait = TrotGenerator::new(0.02);
        for _ in 0..30 {
            gait.next_action(&CommandTriple::new(1.0, 0.0, 0.0));
        }
        let mut last = [1.0; 12];
        for _ in 0..PERIOD_TICKS + 1 {
            last = gait.next_action(&CommandTriple::zero());
        }
        assert_eq!(last, [0.0; 12]);
        assert!(!gait.is_active());
    }

    #[test]
    fn flat_tracking_reaches_steady_state() {
        let traj = run_reference_gait(
            tile(TerrainKind::Flat, 0.1),
            &DomainRandomization::nominal(),
            CommandTriple::new(1.0, 0.0, 0.0),
            3.0,
            ReferenceConfig::default(),
            0,
        )
        .unwrap();
        assert!(!traj.fell);
        let tail = &traj.states[traj.states.len() - 50..];
        for s in tail {
            assert!((s.lin_vel[0] - 1.0).abs() <= 1e-3, "vx {}", s.lin_vel[0]);
        }
    }

    #[test]
    fn low_friction_tracks_worse() {
        let err = |mu: f64| {
            let traj = run_reference_gait(
                tile(TerrainKind::Wave, 0.3),
                &DomainRandomization::with_friction(mu),
                CommandTriple::new(1.0, 0.0, 0.0),
                3.0,
                ReferenceConfig::default(),
                0,
            )
            .unwrap();
            traj.states.iter().map(|s| (1.0 - s.lin_vel[0]).abs()).sum::<f64>() / traj.states.len() as f64
        };
        assert!(err(0.1) > err(1.0));
    }

    #[test]
    fn stairs_above_capability_fall() {
        let reference = ReferenceConfig {
            capability: CapabilityProfile::uniform(4),
            ..ReferenceConfig::default()
        };
        let traj = run_reference_gait(
            tile(TerrainKind::StairsUp, 0.7),
            &DomainRandomization::nominal(),
            CommandTriple::new(1.0, 0.0, 0.0),
            6.0,
            reference.clone(),
            0,
        )
        .unwrap();
        assert!(traj.fell);
        let ok = run_reference_gait(
            tile(TerrainKind::StairsUp, 0.4),
            &DomainRandomization::nominal(),
            CommandTriple::new(1.0, 0.0, 0.0),
            6.0,
            reference,
            0,
        )
        .unwrap();
        assert!(!ok.fell);
    }

    #[test]
    fn speed_stays_bounded() {
        let traj = run_reference_gait(
            tile(TerrainKind::Flat, 0.1),
            &DomainRandomization::nominal(),
            CommandTriple::new(2.0, 1.0, 2.0),
            4.0,
            ReferenceConfig::default(),
            0,
        )
        .unwrap();
        let vmax = ReferenceConfig::default().max_speed;
        assert!(traj.states.iter().all(|s| s.lin_vel[0].hypot(s.lin_vel[1]) <= vmax + 1e-9));
    }
}
