//! Wire-protocol conformance against the echo stub: scripted request frames
//! must produce exactly the expected reply frames.

use std::io::{BufReader, Write};
use std::net::TcpStream;
use std::sync::Arc;

use base64::Engine as _;

use locobench::bridge::protocol::send;
use locobench::bridge::{read_frame, spawn_stub, write_frame, Message, RemoteFactory, StubMode, StubSession, PROTOCOL_VERSION};
use locobench::goals::{GoalConfig, GoalKind};
use locobench::pipelines::{base_pipeline, EvalContext, EvaluationCell};
use locobench::policy::{scripted_policy, ScriptedKind};
use locobench::robot::RobotDescription;
use locobench::sim::{DomainRandomization, RobotState, SimConfig};
use locobench::terrain::{generate, BasePose, TerrainKind, TerrainSpec};
use locobench::Error;

fn hello(version: u32) -> Message {
    let hf = generate(&TerrainSpec::for_level(TerrainKind::Flat, 1, 0)).unwrap();
    Message::Hello {
        version,
        robot: RobotDescription::go2(),
        sim: SimConfig::default(),
        terrain: base64::engine::general_purpose::STANDARD.encode(hf.to_binary()),
        dr: DomainRandomization::nominal(),
        seed: 17,
        spawn: BasePose { x: 0.5, y: 4.0, z: 0.0, yaw: 0.0 },
    }
}

fn step(offset: f64, substeps: usize) -> Message {
    Message::Step {
        actions: vec![[offset; 12]; substeps],
    }
}

fn payload(m: &Message) -> Vec<u8> {
    m.to_payload().unwrap()
}

/// Requests paired with the replies the stub must produce.
fn transcript() -> Vec<(Vec<u8>, Message)> {
    let robot = RobotDescription::go2();
    let pose = robot.default_pose();
    let spawned = RobotState::standing([0.5, 4.0, 0.38], 0.0, pose);
    let mut stepped = spawned.clone();
    stepped.q = pose.map(|q| q + 0.1);
    // finite difference over one 50 Hz control period
    stepped.dq = std::array::from_fn(|i| (stepped.q[i] - pose[i]) / (1.0 / 50.0));
    let mut held = stepped.clone();
    held.dq = [0.0; 12];

    vec![
        (payload(&step(0.0, 4)), Message::error("not_ready", "STEP before HELLO")),
        (
            payload(&hello(PROTOCOL_VERSION + 1)),
            Message::error("version", format!("expected {PROTOCOL_VERSION}, got {}", PROTOCOL_VERSION + 1)),
        ),
        (payload(&hello(PROTOCOL_VERSION)), Message::ResetAck { state: spawned }),
        (b"{not json".to_vec(), Message::error("bad_frame", "")),
        (
            payload(&step(0.1, 3)),
            Message::error("bad_action", "expected 4 substep actions, got 3"),
        ),
        (payload(&step(0.1, 4)), Message::State { state: stepped, collisions: 0 }),
        (payload(&step(0.1, 4)), Message::State { state: held, collisions: 0 }),
        (
            payload(&Message::ResetAck {
                state: RobotState::standing([0.0; 3], 0.0, pose),
            }),
            Message::error("unexpected", "RESET_ACK is not a request"),
        ),
        (
            payload(&Message::Done { reason: "finished".into() }),
            Message::Done { reason: "closed".into() },
        ),
    ]
}

/// Compares replies, ignoring the free-form text of `bad_frame` errors
/// (it carries the JSON parser's message).
fn assert_reply(got: &Message, want: &Message, index: usize) {
    match (got, want) {
        (Message::Error { code, .. }, Message::Error { code: want_code, .. }) if want_code == "bad_frame" => {
            assert_eq!(code, "bad_frame", "frame {index}");
        }
        _ => assert_eq!(got, want, "frame {index}"),
    }
}

#[test]
fn session_transcript() {
    let mut session = StubSession::new(StubMode::Echo);
    for (i, (request, want)) in transcript().iter().enumerate() {
        assert!(!session.is_closed());
        assert_reply(&session.respond(request), want, i);
    }
    assert!(session.is_closed());
}

#[test]
fn socket_transcript_frame_for_frame() {
    let addr = spawn_stub(StubMode::Echo).unwrap();
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    for (i, (request, want)) in transcript().iter().enumerate() {
        write_frame(&mut writer, request).unwrap();
        writer.flush().unwrap();
        let reply = read_frame(&mut reader).unwrap().expect("reply frame");
        assert_reply(&Message::from_payload(&reply).unwrap(), want, i);
    }
    // the stub hangs up after DONE
    assert!(read_frame(&mut reader).unwrap().is_none());
}

#[test]
fn done_frame_bytes() {
    let mut buf = Vec::new();
    send(&mut buf, &Message::Done { reason: "closed".into() }).unwrap();
    let mut expected = vec![0x21, 0x00, 0x00, 0x00];
    expected.extend_from_slice(br#"{"type":"DONE","reason":"closed"}"#);
    assert_eq!(buf, expected);
}

#[test]
fn oversized_length_gets_error_and_hangup() {
    let addr = spawn_stub(StubMode::Echo).unwrap();
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    writer.write_all(&u32::MAX.to_le_bytes()).unwrap();
    writer.flush().unwrap();
    let reply = Message::from_payload(&read_frame(&mut reader).unwrap().unwrap()).unwrap();
    assert!(matches!(reply, Message::Error { ref code, .. } if code == "frame_too_large"), "{reply:?}");
    assert!(read_frame(&mut reader).unwrap().is_none());
}

fn cell(goal: GoalKind) -> EvaluationCell {
    EvaluationCell {
        terrain: TerrainKind::Flat,
        level: 1,
        dr_index: 0,
        dr: DomainRandomization::nominal(),
        goal,
        seed: 4,
        terrain_seed: 4,
    }
}

fn run_over_stub(mode: StubMode, goal: GoalKind) -> locobench::Result<locobench::pipelines::GoalOutcome> {
    let addr = spawn_stub(mode).unwrap();
    let backend = RemoteFactory::new(addr.to_string());
    let policy = scripted_policy(ScriptedKind::TrotTracker);
    let robot = Arc::new(RobotDescription::go2());
    let (sim, goals) = (SimConfig::default(), GoalConfig::default());
    let ctx = EvalContext {
        backend: &backend,
        policy: &policy,
        robot: &robot,
        sim: &sim,
        goals: &goals,
        normalization: None,
        keep_traces: true,
        record_latents: false,
    };
    base_pipeline(&ctx, &cell(goal))
}

#[test]
fn base_pipeline_completes_over_echo_backend() {
    let out = run_over_stub(StubMode::Echo, GoalKind::MaxVelocity).unwrap();
    assert_eq!(out.trials.len(), 6);
    for t in &out.trials {
        t.metrics.validate().unwrap();
        assert!(t.steps > 0);
    }
    // the echo backend never moves the base, so tracking is imperfect but defined
    assert!(out.leaf.worst50.lin_trk < 1.0);
    assert_eq!(out.traces.len(), 6);
    let first = &out.traces[0].records[0].state;
    assert!((first.position[2] - 0.38).abs() < 1e-12);
}

#[test]
fn corrupt_state_is_rejected_not_repaired() {
    match run_over_stub(StubMode::CorruptState, GoalKind::MaxVelocity) {
        Err(Error::Protocol { code, .. }) => assert_eq!(code, "invalid_state"),
        other => panic!("expected a protocol error, got {other:?}"),
    }
}
