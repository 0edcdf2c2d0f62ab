//! Physics-free echo backend speaking the wire protocol.
//!
//! After HELLO the robot stands at the spawn pose. Each STEP moves the
//! joints onto the last substep target (default pose plus offset) and
//! reports the implied joint velocity; the base never moves.

use std::io::{BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread;

use base64::Engine as _;

use super::protocol::{read_frame, send, Message, PROTOCOL_VERSION};
use crate::error::{Error, Result};
use crate::robot::{JointArray, RobotDescription};
use crate::sim::{RobotState, SimConfig};
use crate::terrain::Heightfield;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StubMode {
    #[default]
    Echo,
    /// Replies to STEP with a state whose quaternion is not unit length.
    CorruptState,
}

struct Episode {
    robot: RobotDescription,
    sim: SimConfig,
    state: RobotState,
}

#[derive(Default)]
pub struct StubSession {
    mode: StubMode,
    episode: Option<Episode>,
    closed: bool,
}

impl StubSession {
    pub fn new(mode: StubMode) -> Self {
        StubSession {
            mode,
            episode: None,
            closed: false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Reply to one raw frame payload.
    pub fn respond(&mut self, payload: &[u8]) -> Message {
        let msg = match Message::from_payload(payload) {
            Ok(m) => m,
            Err(e) => return Message::error("bad_frame", e.to_string()),
        };
        match msg {
            Message::Hello {
                version,
                robot,
                sim,
                terrain,
                spawn,
                ..
            } => {
                if version != PROTOCOL_VERSION {
                    return Message::error("version", format!("expected {PROTOCOL_VERSION}, got {version}"));
                }
                let field = match decode_terrain(&terrain) {
                    Ok(f) => f,
                    Err(e) => return Message::error("bad_terrain", e.to_string()),
                };
                if let Err(e) = robot.validate().and_then(|_| sim.validate()) {
                    return Message::error("bad_hello", e.to_string());
                }
                let z = field.height_at_clamped(spawn.x, spawn.y) + robot.nominal_base_height;
                let state = RobotState::standing([spawn.x, spawn.y, z], spawn.yaw, robot.default_pose());
                self.episode = Some(Episode {
                    robot,
                    sim,
                    state: state.clone(),
                });
                Message::ResetAck { state }
            }
            Message::Step { actions } => {
                let mode = self.mode;
                let Some(ep) = self.episode.as_mut() else {
                    return Message::error("not_ready", "STEP before HELLO");
                };
                if actions.len() != ep.sim.substeps() {
                    return Message::error(
                        "bad_action",
                        format!("expected {} substep actions, got {}", ep.sim.substeps(), actions.len()),
                    );
                }
                let last: JointArray = *actions.last().expect("at least one substep");
                let pose = ep.robot.default_pose();
                let dt = ep.sim.control_dt();
                let q: JointArray = std::array::from_fn(|i| pose[i] + last[i]);
                ep.state.dq = std::array::from_fn(|i| (q[i] - ep.state.q[i]) / dt);
                ep.state.q = q;
                let mut state = ep.state.clone();
                if mode == StubMode::CorruptState {
                    state.orientation = [2.0, 0.0, 0.0, 0.0];
                }
                Message::State { state, collisions: 0 }
            }
            Message::Done { .. } => {
                self.closed = true;
                Message::Done { reason: "closed".into() }
            }
            other => Message::error("unexpected", format!("{} is not a request", other.kind())),
        }
    }
}

pub fn decode_terrain(b64: &str) -> Result<Heightfield> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(b64)
        .map_err(|e| Error::format("base64", e.to_string()))?;
    Heightfield::read_binary(&bytes[..])
}

/// Serves one connection until DONE or end of stream.
pub fn serve_connection(stream: TcpStream, mode: StubMode) -> Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut session = StubSession::new(mode);
    loop {
        let payload = match read_frame(&mut reader) {
            Ok(Some(p)) => p,
            Ok(None) => return Ok(()),
            Err(Error::Protocol { code, message }) => {
                // the stream cannot be resynchronised after a bad length
                send(&mut writer, &Message::Error { code, message })?;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let reply = session.respond(&payload);
        send(&mut writer, &reply)?;
        if session.is_closed() {
            return Ok(());
        }
    }
}

/// Accepts connections forever, one thread each.
pub fn serve(listener: TcpListener, mode: StubMode) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let _ = serve_connection(stream, mode);
        });
    }
    Ok(())
}

/// Binds an ephemeral local port and serves from a background thread.
pub fn spawn_stub(mode: StubMode) -> Result<SocketAddr> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    thread::spawn(move || {
        let _ = serve(listener, mode);
    });
    Ok(addr)
}
