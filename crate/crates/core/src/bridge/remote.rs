use std::io::{BufReader, BufWriter};
use std::net::TcpStream;
use std::time::Duration;

use base64::Engine as _;

use super::protocol::{read_frame, send, Message, PROTOCOL_VERSION};
use crate::error::{Error, Result};
use crate::robot::JointArray;
use crate::sim::{Backend, BackendFactory, BackendStep, ResetRequest, RobotState};

/// Connects one [`RemoteBackend`] per worker to a bridge server.
#[derive(Clone, Debug)]
pub struct RemoteFactory {
    pub address: String,
    pub timeout: Duration,
}

impl RemoteFactory {
    pub fn new(address: impl Into<String>) -> Self {
        RemoteFactory {
            address: address.into(),
            timeout: Duration::from_secs(30),
        }
    }
}

impl BackendFactory for RemoteFactory {
    fn create(&self) -> Result<Box<dyn Backend>> {
        Ok(Box::new(RemoteBackend::connect(&self.address, self.timeout)?))
    }

    fn describe(&self) -> String {
        format!("bridge@{}", self.address)
    }
}

pub struct RemoteBackend {
    name: String,
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl RemoteBackend {
    pub fn connect(address: &str, timeout: Duration) -> Result<Self> {
        let stream = TcpStream::connect(address).map_err(|e| Error::Backend(format!("connect {address}: {e}")))?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(timeout))?;
        Ok(RemoteBackend {
            name: format!("bridge@{address}"),
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    fn call(&mut self, msg: &Message) -> Result<Message> {
        send(&mut self.writer, msg)?;
        let payload = read_frame(&mut self.reader)?
            .ok_or_else(|| Error::protocol("closed", "server closed the connection"))?;
        match Message::from_payload(&payload)? {
            Message::Error { code, message } => Err(Error::Protocol { code, message }),
            reply => Ok(reply),
        }
    }
}

fn checked(state: RobotState) -> Result<RobotState> {
    state
        .validate()
        .map_err(|e| Error::protocol("invalid_state", e.to_string()))?;
    Ok(state)
}

impl Backend for RemoteBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self, req: &ResetRequest<'_>) -> Result<RobotState> {
        let hello = Message::Hello {
            version: PROTOCOL_VERSION,
            robot: req.robot.clone(),
            sim: req.config.clone(),
            terrain: base64::engine::general_purpose::STANDARD.encode(req.terrain.to_binary()),
            dr: req.dr.clone(),
            seed: req.seed,
            spawn: req.spawn,
        };
        match self.call(&hello)? {
            Message::ResetAck { state } => checked(state),
            other => Err(Error::protocol("unexpected", format!("expected RESET_ACK, got {}", other.kind()))),
        }
    }

    fn step(&mut self, substep_actions: &[JointArray]) -> Result<BackendStep> {
        let step = Message::Step {
            actions: substep_actions.to_vec(),
        };
        match self.call(&step)? {
            Message::State { state, collisions } => Ok(BackendStep {
                state: checked(state)?,
                collisions,
            }),
            other => Err(Error::protocol("unexpected", format!("expected STATE, got {}", other.kind()))),
        }
    }
}

impl Drop for RemoteBackend {
    fn drop(&mut self) {
        let _ = send(&mut self.writer, &Message::Done { reason: "closed".into() });
    }
}
