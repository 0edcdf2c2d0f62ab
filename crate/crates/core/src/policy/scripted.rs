//! Hand-written policies with known behavior on the reference backend.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Policy, PolicyInput, PolicyOutput, PolicySession};
use crate::error::{Error, Result};
use crate::robot::{CALF_JOINTS, HIP_JOINTS};
use crate::sim::gait::TrotGenerator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedKind {
    /// Holds the default pose.
    Stand,
    /// Follows the command with the reference trot.
    TrotTracker,
    /// Trot with chattering calves driven into their limits.
    Faulty,
}

impl ScriptedKind {
    pub const ALL: [ScriptedKind; 3] = [ScriptedKind::Stand, ScriptedKind::TrotTracker, ScriptedKind::Faulty];

    pub fn as_str(self) -> &'static str {
        match self {
            ScriptedKind::Stand => "stand",
            ScriptedKind::TrotTracker => "trot_tracker",
            ScriptedKind::Faulty => "faulty",
        }
    }
}

impl fmt::Display for ScriptedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScriptedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScriptedKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "scripted policy",
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScriptedPolicy {
    pub kind: ScriptedKind,
}

pub fn scripted_policy(kind: ScriptedKind) -> ScriptedPolicy {
    ScriptedPolicy { kind }
}

/// Calf offsets alternated by the faulty policy; both exceed the soft
/// upper limit from the default pose.
const CHATTER: [f64; 2] = [0.5, 0.9];
/// Hip wobble added by the faulty policy, rad.
const HIP_WOBBLE: f64 = 0.05;

struct Session {
    kind: ScriptedKind,
    gait: TrotGenerator,
    tick: usize,
}

impl PolicySession for Session {
    fn act(&mut self, input: &PolicyInput<'_>) -> Result<PolicyOutput> {
        let action = match self.kind {
            ScriptedKind::Stand => [0.0; 12],
            ScriptedKind::TrotTracker => self.gait.next_action(&input.cmd),
            ScriptedKind::Faulty => {
                let mut a = self.gait.next_action(&input.cmd);
                let phase = self.tick % 2;
                for leg in 0..4 {
                    a[CALF_JOINTS[leg]] = CHATTER[phase];
                    // same sign on both sides so the decoded lateral drive cancels
                    a[HIP_JOINTS[leg]] += if leg % 2 == 0 { HIP_WOBBLE } else { -HIP_WOBBLE } * if phase == 0 { 1.0 } else { -1.0 };
                }
                a
            }
        };
        self.tick += 1;
        Ok(PolicyOutput { action, latent: None })
    }
}

impl Policy for ScriptedPolicy {
    fn name(&self) -> String {
        self.kind.as_str().to_string()
    }

    fn session(&self, control_dt: f64) -> Result<Box<dyn PolicySession + '_>> {
        Ok(Box::new(Session {
            kind: self.kind,
            gait: TrotGenerator::new(control_dt),
            tick: 0,
        }))
    }
}
