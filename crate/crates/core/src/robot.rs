//! Robot description: joint layout, default pose and limits.
//!
//! Joints are ordered leg by leg (FL, FR, RL, RR), each leg as
//! (hip abduction, thigh, calf).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_JOINTS: usize = 12;
pub const NUM_FEET: usize = 4;
pub const HIP_JOINTS: [usize; 4] = [0, 3, 6, 9];
pub const THIGH_JOINTS: [usize; 4] = [1, 4, 7, 10];
pub const CALF_JOINTS: [usize; 4] = [2, 5, 8, 11];
/// Legs on the left side (FL, RL) and the right side (FR, RR).
pub const LEFT_LEGS: [usize; 2] = [0, 2];
pub const RIGHT_LEGS: [usize; 2] = [1, 3];

pub type JointArray = [f64; NUM_JOINTS];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDescription {
    pub name: String,
    pub default: f64,
    pub lower: f64,
    pub upper: f64,
    pub torque_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDescription {
    pub name: String,
    pub joints: Vec<JointDescription>,
    /// Fraction of the hardware range treated as the soft range.
    #[serde(default = "default_soft_fraction")]
    pub soft_limit_fraction: f64,
    #[serde(default = "default_base_height")]
    pub nominal_base_height: f64,
    #[serde(default = "default_base_mass")]
    pub base_mass: f64,
}

fn default_soft_fraction() -> f64 {
    0.95
}

fn default_base_height() -> f64 {
    0.38
}

fn default_base_mass() -> f64 {
    15.0
}

impl RobotDescription {
    /// Unitree Go2 layout with the usual standing pose.
    #[allow(clippy::approx_constant)]
    pub fn go2() -> Self {
        let legs = [("FL", 0.1, 0.8, true), ("FR", -0.1, 0.8, true), ("RL", 0.1, 1.0, false), ("RR", -0.1, 1.0, false)];
        let mut joints = Vec::with_capacity(NUM_JOINTS);
        for (leg, hip, thigh, front) in legs {
            joints.push(JointDescription {
                name: format!("{leg}_hip_joint"),
                default: hip,
                lower: -1.0472,
                upper: 1.0472,
                torque_limit: 23.7,
            });
            let (lo, hi) = if front { (-1.5708, 3.4907) } else { (-0.5236, 4.5379) };
            joints.push(JointDescription {
                name: format!("{leg}_thigh_joint"),
                default: thigh,
                lower: lo,
                upper: hi,
                torque_limit: 23.7,
            });
            joints.push(JointDescription {
                name: format!("{leg}_calf_joint"),
                default: -1.5,
                lower: -2.7227,
                upper: -0.83776,
                torque_limit: 45.43,
            });
        }
        RobotDescription {
            name: "go2".into(),
            joints,
            soft_limit_fraction: default_soft_fraction(),
            nominal_base_height: default_base_height(),
            base_mass: default_base_mass(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let robot: RobotDescription =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
                path: e.path().to_string(),
                reason: e.inner().to_string(),
            })?;
        robot.validate()?;
        Ok(robot)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.len() != NUM_JOINTS {
            return Err(Error::Shape {
                what: "robot joints".into(),
                expected: NUM_JOINTS.to_string(),
                found: self.joints.len().to_string(),
            });
        }
        for j in &self.joints {
            if !(j.lower < j.upper) || !(j.lower..=j.upper).contains(&j.default) {
                return Err(Error::param("joints", format!("joint {} has inconsistent limits", j.name)));
            }
            if !(j.torque_limit > 0.0) {
                return Err(Error::param("joints", format!("joint {} torque limit must be positive", j.name)));
            }
        }
        if !(self.soft_limit_fraction > 0.0 && self.soft_limit_fraction <= 1.0) {
            return Err(Error::param("soft_limit_fraction", "must lie in (0, 1]"));
        }
        if !(self.nominal_base_height > 0.0 && self.base_mass > 0.0) {
            return Err(Error::param("nominal_base_height", "height and mass must be positive"));
        }
        Ok(())
    }

    pub fn default_pose(&self) -> JointArray {
        std::array::from_fn(|i| self.joints[i].default)
    }

    pub fn hard_limits(&self) -> [(f64, f64); NUM_JOINTS] {
        std::array::from_fn(|i| (self.joints[i].lower, self.joints[i].upper))
    }

    /// Hardware range shrunk about its midpoint by `soft_limit_fraction`.
    pub fn soft_limits(&self) -> [(f64, f64); NUM_JOINTS] {
        std::array::from_fn(|i| {
            let j = &self.joints[i];
            let mid = 0.5 * (j.lower + j.upper);
            let half = 0.5 * (j.upper - j.lower) * self.soft_limit_fraction;
            (mid - half, mid + half)
        })
    }

    pub fn torque_limits(&self) -> JointArray {
        std::array::from_fn(|i| self.joints[i].torque_limit)
    }
}

impl Default for RobotDescription {
    fn default() -> Self {
        Self::go2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn go2_is_valid_and_roundtrips() {
        let robot = RobotDescription::go2();
        robot.validate().unwrap();
        let text = serde_json::to_string(&robot).unwrap();
        assert_eq!(RobotDescription::from_json(&text).unwrap(), robot);
    }

    #[test]
    fn soft_limits_are_inside_hard_limits() {
        let robot = RobotDescription::go2();
        for (soft, hard) in robot.soft_limits().iter().zip(robot.hard_limits()) {
            assert!(soft.0 > hard.0 && soft.1 < hard.1);
        }
        let (lo, hi) = robot.soft_limits()[0];
        let (hard_lo, hard_hi) = robot.hard_limits()[0];
        assert!((hi - lo - 0.95 * (hard_hi - hard_lo)).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_point_at_the_path() {
        let mut v = serde_json::to_value(RobotDescription::go2()).unwrap();
        v["joints"][3]["stiffness"] = serde_json::json!(1.0);
        let err = RobotDescription::from_json(&v.to_string()).unwrap_err();
        match err {
            Error::Config { path, .. } => assert!(path.starts_with("joints[3]"), "{path}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_joint_count_is_rejected() {
        let mut robot = RobotDescription::go2();
        robot.joints.pop();
        assert!(robot.validate().is_err());
    }
}
