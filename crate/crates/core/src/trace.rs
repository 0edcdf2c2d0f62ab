//! Per-step episode records: the only input metrics and rewards read.
//!
//! Two on-disk encodings carry the same content.
//!
//! **NDJSON.** The first line is the [`TraceMeta`] object. Every following
//! line is one [`TraceRecord`] object.
//!
//! **Binary** (`RGTR`). All values are little-endian.
//!
//! ```text
//! magic "RGTR" | u16 version | u32 meta_len | meta JSON | u32 count | records
//! record:
//!   f64 time, u32 segment, f64 cmd[3] (vx, vy, wz),
//!   f64 position[3], f64 orientation[4] (w, x, y, z),
//!   f64 lin_vel[3], f64 ang_vel[3], f64 q[12], f64 dq[12], f64 tau[12],
//!   u8 contact bits (bit i = foot i), f64 projected_gravity[3],
//!   f64 action[12], u8 fallen, u32 collisions, f64 height_above_ground
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goals::{CommandTriple, GoalKind};
use crate::robot::{JointArray, RobotDescription, NUM_JOINTS};
use crate::sim::RobotState;
use crate::terrain::TerrainKind;

const MAGIC: &[u8; 4] = b"RGTR";
const VERSION: u16 = 1;
/// Bytes per binary record.
pub const RECORD_BYTES: usize = 8 + 4 + 24 + 24 + 32 + 24 + 24 + 96 * 3 + 1 + 24 + 96 + 1 + 4 + 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub control_dt: f64,
    pub soft_limits: Vec<(f64, f64)>,
    pub default_pose: Vec<f64>,
    pub terrain: Option<TerrainKind>,
    pub goal: Option<GoalKind>,
    pub trial: Option<u32>,
}

impl TraceMeta {
    pub fn for_robot(robot: &RobotDescription, control_dt: f64) -> Self {
        TraceMeta {
            control_dt,
            soft_limits: robot.soft_limits().to_vec(),
            default_pose: robot.default_pose().to_vec(),
            terrain: None,
            goal: None,
            trial: None,
        }
    }
}

impl Default for TraceMeta {
    fn default() -> Self {
        Self::for_robot(&RobotDescription::go2(), 0.02)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub segment: u32,
    pub cmd: CommandTriple,
    pub state: RobotState,
    pub action: JointArray,
    pub fallen: bool,
    pub collisions: u32,
    pub height_above_ground: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

impl EpisodeTrace {
    pub fn new(meta: TraceMeta) -> Self {
        EpisodeTrace { meta, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn fell(&self) -> bool {
        self.records.iter().any(|r| r.fallen)
    }

    /// Checks time spacing, widths and finiteness.
    pub fn validate(&self) -> Result<()> {
        let dt = self.meta.control_dt;
        if !(dt > 0.0) {
            return Err(Error::param("control_dt", "must be positive"));
        }
        if self.meta.soft_limits.len() != NUM_JOINTS {
            return Err(Error::Shape {
                what: "soft_limits".into(),
                expected: NUM_JOINTS.to_string(),
                found: self.meta.soft_limits.len().to_string(),
            });
        }
        if self.meta.default_pose.len() != NUM_JOINTS {
            return Err(Error::Shape {
                what: "default_pose".into(),
                expected: NUM_JOINTS.to_string(),
                found: self.meta.default_pose.len().to_string(),
            });
        }
        for pair in self.records.windows(2) {
            let gap = pair[1].time - pair[0].time;
            if (gap - dt).abs() > 1e-6 {
                return Err(Error::InvalidState(format!(
                    "trace step at t = {} is {gap} s, expected {dt}",
                    pair[1].time
                )));
            }
        }
        for r in &self.records {
            r.state.validate()?;
            crate::error::ensure_finite("action", &r.action)?;
            crate::error::ensure_finite("trace record", &[r.time, r.cmd.vx, r.cmd.vy, r.cmd.wz, r.height_above_ground])?;
        }
        Ok(())
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &self.meta)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let meta_line = lines.next().ok_or(Error::Empty("trace file"))??;
        let meta: TraceMeta = serde_json::from_str(&meta_line)?;
        let mut records = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(EpisodeTrace { meta, records })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let meta = serde_json::to_vec(&self.meta)?;
        let mut buf = Vec::with_capacity(14 + meta.len() + self.records.len() * RECORD_BYTES);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        buf.extend_from_slice(&meta);
        buf.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        for r in &self.records {
            encode_record(r, &mut buf);
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::format("RGTR", "bad magic"));
        }
        let version = u16::from_le_bytes(cur.array()?);
        if version != VERSION {
            return Err(Error::format("RGTR", format!("unsupported version {version}")));
        }
        let meta_len = cur.u32()? as usize;
        let meta: TraceMeta = serde_json::from_slice(cur.take(meta_len)?)?;
        let count = cur.u32()? as usize;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            records.push(decode_record(&mut cur)?);
        }
        if cur.pos != bytes.len() {
            return Err(Error::format("RGTR", "trailing bytes"));
        }
        Ok(EpisodeTrace { meta, records })
    }
}

fn put(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn encode_record(r: &TraceRecord, buf: &mut Vec<u8>) {
    let s = &r.state;
    put(buf, &[r.time]);
    buf.extend_from_slice(&r.segment.to_le_bytes());
    put(buf, &[r.cmd.vx, r.cmd.vy, r.cmd.wz]);
    put(buf, &s.position);
    put(buf, &s.orientation);
    put(buf, &s.lin_vel);
    put(buf, &s.ang_vel);
    put(buf, &s.q);
    put(buf, &s.dq);
    put(buf, &s.tau);
    let bits = s.contacts.iter().enumerate().fold(0u8, |acc, (i, &c)| acc | (u8::from(c) << i));
    buf.push(bits);
    put(buf, &s.projected_gravity);
    put(buf, &r.action);
    buf.push(u8::from(r.fallen));
    buf.extend_from_slice(&r.collisions.to_le_bytes());
    put(buf, &[r.height_above_ground]);
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format("RGTR", "truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64s<const N: usize>(&mut self) -> Result<[f64; N]> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = f64::from_le_bytes(self.array()?);
        }
        Ok(out)
    }
}

fn decode_record(cur: &mut Cursor<'_>) -> Result<TraceRecord> {
    let [time] = cur.f64s()?;
    let segment = cur.u32()?;
    let [vx, vy, wz] = cur.f64s()?;
    let position = cur.f64s()?;
    let orientation = cur.f64s()?;
    let lin_vel = cur.f64s()?;
    let ang_vel = cur.f64s()?;
    let q = cur.f64s()?;
    let dq = cur.f64s()?;
    let tau = cur.f64s()?;
    let bits = cur.u8()?;
    let projected_gravity = cur.f64s()?;
    let action = cur.f64s()?;
    let fallen = cur.u8()? != 0;
    let collisions = cur.u32()?;
    let [height_above_ground] = cur.f64s()?;
    Ok(TraceRecord {
        time,
        segment,
        cmd: CommandTriple::new(vx, vy, wz),
        state: RobotState {
            position,
            orientation,
            lin_vel,
            ang_vel,
            q,
            dq,
            tau,
            contacts: std::array::from_fn(|i| bits & (1 << i) != 0),
            projected_gravity,
        },
        action,
        fallen,
        collisions,
        height_above_ground,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> EpisodeTrace {
        let mut t = EpisodeTrace::default();
        t.meta.goal = Some(GoalKind::MaxVelocity);
        for k in 0..n {
            let mut state = RobotState::standing([0.1 * k as f64, 0.0, 0.38], 0.2, [0.3; 12]);
            state.tau = [k as f64 * 0.5; 12];
            state.contacts = [true, false, k % 2 == 0, true];
            t.records.push(TraceRecord {
                time: k as f64 * 0.02,
                segment: (k / 3) as u32,
                cmd: CommandTriple::new(1.0, -0.5, 0.25),
                state,
                action: [0.01 * k as f64; 12],
                fallen: k == n - 1,
                collisions: k as u32,
                height_above_ground: 0.37,
            });
        }
        t
    }

    #[test]
    fn ndjson_round_trip() {
        let t = sample(7);
        let mut buf = Vec::new();
        t.write_ndjson(&mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 8);
        assert_eq!(EpisodeTrace::read_ndjson(&buf[..]).unwrap(), t);
    }

    #[test]
    fn binary_round_trip() {
        let t = sample(5);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        let meta_len = serde_json::to_vec(&t.meta).unwrap().len();
        assert_eq!(buf.len(), 14 + meta_len + 5 * RECORD_BYTES);
        assert_eq!(EpisodeTrace::read_binary(&buf[..]).unwrap(), t);
        assert!(EpisodeTrace::read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn validate_checks_spacing() {
        let mut t = sample(4);
        t.validate().unwrap();
        t.records[2].time += 0.01;
        assert!(t.validate().is_err());
    }
}
