use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::{JointArray, RobotDescription};
use crate::sim::{DomainRandomization, RobotState, SimConfig};
use crate::terrain::BasePose;

pub const PROTOCOL_VERSION: u32 = 1;
/// Frames above this size are refused without reading the payload.
pub const MAX_FRAME: usize = 64 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Message {
    Hello {
        version: u32,
        robot: RobotDescription,
        sim: SimConfig,
        /// Base64 of the binary heightfield export.
        terrain: String,
        dr: DomainRandomization,
        seed: u64,
        spawn: BasePose,
    },
    ResetAck {
        state: RobotState,
    },
    Step {
        /// Joint offsets in force at each physics substep.
        actions: Vec<JointArray>,
    },
    State {
        state: RobotState,
        collisions: u32,
    },
    Done {
        reason: String,
    },
    Error {
        code: String,
        message: String,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "HELLO",
            Message::ResetAck { .. } => "RESET_ACK",
            Message::Step { .. } => "STEP",
            Message::State { .. } => "STATE",
            Message::Done { .. } => "DONE",
            Message::Error { .. } => "ERROR",
        }
    }

    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Message::Error {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn to_payload(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_payload(payload: &[u8]) -> Result<Self> {
        serde_json::from_slice(payload).map_err(|e| Error::protocol("bad_frame", e.to_string()))
    }
}

/// Writes `u32 LE length ‖ payload`.
pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<()> {
    if payload.len() > MAX_FRAME {
        return Err(Error::protocol("frame_too_large", format!("{} bytes", payload.len())));
    }
    w.write_all(&(payload.len() as u32).to_le_bytes())?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before the header.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let n = u32::from_le_bytes(len) as usize;
    if n > MAX_FRAME {
        return Err(Error::protocol("frame_too_large", format!("{n} bytes")));
    }
    let mut payload = vec![0u8; n];
    r.read_exact(&mut payload)?;
    Ok(Some(payload))
}

pub fn send<W: Write>(w: &mut W, msg: &Message) -> Result<()> {
    write_frame(w, &msg.to_payload()?)
}
