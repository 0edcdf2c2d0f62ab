use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::{JointArray, NUM_FEET};

/// Full proprioceptive and privileged state of the robot base and joints.
///
/// Linear and angular velocities are expressed in the base frame; the
/// quaternion is `[w, x, y, z]` and maps base to world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: [f64; 3],
    pub orientation: [f64; 4],
    pub lin_vel: [f64; 3],
    pub ang_vel: [f64; 3],
    pub q: JointArray,
    pub dq: JointArray,
    pub tau: JointArray,
    pub contacts: [bool; NUM_FEET],
    pub projected_gravity: [f64; 3],
}

impl RobotState {
    /// Level, motionless robot at `position` holding `pose`.
    pub fn standing(position: [f64; 3], yaw: f64, pose: JointArray) -> Self {
        let orientation = quat_from_euler(0.0, 0.0, yaw);
        RobotState {
            position,
            orientation,
            lin_vel: [0.0; 3],
            ang_vel: [0.0; 3],
            q: pose,
            dq: [0.0; 12],
            tau: [0.0; 12],
            contacts: [true; NUM_FEET],
            projected_gravity: projected_gravity(&orientation),
        }
    }

    /// Checks the invariants every backend must honor.
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .position
            .iter()
            .chain(&self.orientation)
            .chain(&self.lin_vel)
            .chain(&self.ang_vel)
            .chain(&self.q)
            .chain(&self.dq)
            .chain(&self.tau)
            .chain(&self.projected_gravity)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidState("non-finite field".into()));
        }
        let qn = norm(&self.orientation);
        if (qn - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidState(format!("quaternion norm {qn}")));
        }
        let gn = norm(&self.projected_gravity);
        if (gn - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidState(format!("projected gravity norm {gn}")));
        }
        Ok(())
    }

    /// `(roll, pitch, yaw)` of the base.
    pub fn euler(&self) -> (f64, f64, f64) {
        euler_from_quat(&self.orientation)
    }

    pub fn yaw(&self) -> f64 {
        self.euler().2
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ZYX (yaw, pitch, roll) Euler angles to a `[w, x, y, z]` quaternion.
pub fn quat_from_euler(roll: f64, pitch: f64, yaw: f64) -> [f64; 4] {
    let (sr, cr) = (0.5 * roll).sin_cos();
    let (sp, cp) = (0.5 * pitch).sin_cos();
    let (sy, cy) = (0.5 * yaw).sin_cos();
    let q = [
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ];
    let n = norm(&q);
    q.map(|c| c / n)
}

pub fn euler_from_quat(q: &[f64; 4]) -> (f64, f64, f64) {
    let [w, x, y, z] = *q;
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0).asin();
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    (roll, pitch, yaw)
}

/// World gravity direction `(0, 0, -1)` expressed in the base frame.
pub fn projected_gravity(q: &[f64; 4]) -> [f64; 3] {
    let [w, x, y, z] = *q;
    let g = [
        -2.0 * (x * z - w * y),
        -2.0 * (y * z + w * x),
        -(1.0 - 2.0 * (x * x + y * y)),
    ];
    let n = norm(&g);
    g.map(|c| c / n)
}

pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_roundtrip() {
        for &(r, p, y) in &[(0.1, -0.2, 0.3), (0.0, 0.0, 3.0), (-0.5, 0.4, -2.0)] {
            let q = quat_from_euler(r, p, y);
            let (r2, p2, y2) = euler_from_quat(&q);
            assert!((r - r2).abs() < 1e-12 && (p - p2).abs() < 1e-12 && (y - y2).abs() < 1e-12);
        }
    }

    #[test]
    fn level_gravity_points_down() {
        let g = projected_gravity(&quat_from_euler(0.0, 0.0, 1.2));
        assert!((g[0]).abs() < 1e-12 && (g[1]).abs() < 1e-12 && (g[2] + 1.0).abs() < 1e-12);
        // nose down (positive pitch) tilts gravity toward +x in the body frame
        let g = projected_gravity(&quat_from_euler(0.0, 0.2, 0.0));
        assert!((g[0] - 0.2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn validate_catches_bad_quaternion() {
        let mut s = RobotState::standing([0.0, 0.0, 0.38], 0.0, [0.0; 12]);
        s.validate().unwrap();
        s.orientation[0] = 0.9;
        assert!(s.validate().is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
