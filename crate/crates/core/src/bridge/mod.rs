//! Out-of-process simulator backends.
//!
//! A bridge server owns a physics engine; the engine talks to it over TCP
//! with length-prefixed JSON frames: a little-endian `u32` byte count
//! followed by one JSON object whose `type` field names the message.
//!
//! ```text
//! engine                               server
//!   HELLO {version, robot, sim, terrain, dr, seed, spawn}  ->
//!                                      <-  RESET_ACK {state}
//!   STEP {actions: [[12 f64]; substeps]}                   ->
//!                                      <-  STATE {state, collisions}
//!   ...
//!   DONE {reason}                                          ->
//!                                      <-  DONE {reason: "closed"}
//! ```
//!
//! Any request may instead be answered by `ERROR {code, message}`. A
//! payload that is not a valid message gets `ERROR {code: "bad_frame"}` and
//! the connection stays usable. `terrain` is the base64 of the binary
//! heightfield export, so both sides query identical ground.
//!
//! The frame carrying `{"type":"DONE","reason":"closed"}` is
//!
//! ```text
//! 21 00 00 00 7b 22 74 79 70 65 22 3a 22 44 4f 4e 45 22 2c 22 72 65 61
//! 73 6f 6e 22 3a 22 63 6c 6f 73 65 64 22 7d
//! ```
//!
//! Every received state is checked against the [`RobotState`](crate::sim::RobotState)
//! invariants; a violation is a protocol error, never silently repaired.

pub mod protocol;
pub mod remote;
pub mod stub;

pub use protocol::{read_frame, write_frame, Message, PROTOCOL_VERSION};
pub use remote::{RemoteBackend, RemoteFactory};
pub use stub::{spawn_stub, StubMode, StubSession};
