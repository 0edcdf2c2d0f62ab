//! The six proprioceptive metrics and their per-goal aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::goals::CommandLimits;
use crate::terrain::TerrainKind;
use crate::trace::EpisodeTrace;

pub const METRIC_NAMES: [&str; 6] = ["lin_vel_err", "ang_vel_err", "dof_power", "dof_limits", "orientation", "torque_smoothness"];

/// Normalized metrics, each in `[0, 1]`, higher is better.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub lin_trk: f64,
    pub ang_trk: f64,
    pub dof_power: f64,
    pub dof_limits: f64,
    pub orient: f64,
    pub smooth: f64,
}

impl MetricVector {
    pub const fn splat(v: f64) -> Self {
        Self::from_array([v; 6])
    }

    pub const fn from_array(a: [f64; 6]) -> Self {
        MetricVector {
            lin_trk: a[0],
            ang_trk: a[1],
            dof_power: a[2],
            dof_limits: a[3],
            orient: a[4],
            smooth: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.lin_trk, self.ang_trk, self.dof_power, self.dof_limits, self.orient, self.smooth]
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        ensure_finite("metric vector", &a)?;
        if a.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("metric vector", format!("{a:?} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Un-normalized metric errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RawMetrics {
    /// Mean planar velocity tracking error, m/s.
    pub lin: f64,
    /// Mean yaw-rate tracking error, rad/s.
    pub ang: f64,
    /// Mean mechanical power `Σ|τ q̇|`, W.
    pub power: f64,
    /// Fraction of joint samples outside the soft limits.
    pub limits: f64,
    /// Mean `|g_y|` of the projected gravity.
    pub orient: f64,
    /// Mean step-to-step torque change `‖τ_t − τ_{t−1}‖`, N·m.
    pub smooth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationConfig {
    pub c_lin: f64,
    pub c_ang: f64,
    pub c_power: f64,
    pub c_smooth: f64,
}

impl NormalizationConfig {
    pub fn for_terrain(kind: TerrainKind) -> Self {
        Self::from_limits(&CommandLimits::for_terrain(kind))
    }

    pub fn from_limits(limits: &CommandLimits) -> Self {
        NormalizationConfig {
            c_lin: limits.vx.max(limits.vy),
            c_ang: limits.wz,
            c_power: 400.0,
            c_smooth: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_lin", self.c_lin), ("c_ang", self.c_ang), ("c_power", self.c_power), ("c_smooth", self.c_smooth)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn normalize(&self, raw: &RawMetrics) -> MetricVector {
        let f = |x: f64, c: f64| 1.0 - (x / c).clamp(0.0, 1.0);
        MetricVector {
            lin_trk: f(raw.lin, self.c_lin),
            ang_trk: f(raw.ang, self.c_ang),
            dof_power: f(raw.power, self.c_power),
            dof_limits: f(raw.limits, 1.0),
            orient: f(raw.orient, 1.0),
            smooth: f(raw.smooth, self.c_smooth),
        }
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self::for_terrain(TerrainKind::Flat)
    }
}

pub fn raw_metrics(trace: &EpisodeTrace) -> Result<RawMetrics> {
    if trace.records.is_empty() {
        return Err(Error::Empty("episode trace"));
    }
    let limits = &trace.meta.soft_limits;
    let n = trace.records.len() as f64;
    let mut raw = RawMetrics::default();
    let mut outside = 0usize;
    for (k, r) in trace.records.iter().enumerate() {
        let s = &r.state;
        ensure_finite("trace state", &s.lin_vel)?;
        ensure_finite("trace state", &s.ang_vel)?;
        ensure_finite("trace state", &s.tau)?;
        ensure_finite("trace state", &s.dq)?;
        ensure_finite("trace state", &s.q)?;
        raw.lin += (r.cmd.vx - s.lin_vel[0]).hypot(r.cmd.vy - s.lin_vel[1]);
        raw.ang += (r.cmd.wz - s.ang_vel[2]).abs();
        raw.power += s.tau.iter().zip(&s.dq).map(|(t, v)| (t * v).abs()).sum::<f64>();
        outside += s.q.iter().zip(limits).filter(|(q, (lo, hi))| **q < *lo || **q > *hi).count();
        raw.orient += s.projected_gravity[1].abs();
        if k > 0 {
            let prev = &trace.records[k - 1].state.tau;
            raw.smooth += s.tau.iter().zip(prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
    }
    raw.lin /= n;
    raw.ang /= n;
    raw.power /= n;
    raw.orient /= n;
    raw.limits = outside as f64 / (n * limits.len().max(1) as f64);
    if trace.records.len() > 1 {
        raw.smooth /= n - 1.0;
    }
    Ok(raw)
}

pub fn compute_metrics(trace: &EpisodeTrace, norm: &NormalizationConfig) -> Result<MetricVector> {
    norm.validate()?;
    Ok(norm.normalize(&raw_metrics(trace)?))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of the lowest `⌈n/2⌉` values.
    #[default]
    Worst50,
    Mean,
    /// Mean of the highest `⌈n/4⌉` values.
    Top25,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Aggregation::Worst50, Aggregation::Mean, Aggregation::Top25];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Worst50 => "worst50",
            Aggregation::Mean => "mean",
            Aggregation::Top25 => "top25",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Aggregation::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "aggregation",
                value: s.to_string(),
            })
    }
}

pub fn aggregate_values(values: &[f64], mode: Aggregation) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("score set"));
    }
    ensure_finite("score set", values)?;
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let slice = match mode {
        Aggregation::Mean => &sorted[..],
        Aggregation::Worst50 => &sorted[..n.div_ceil(2)],
        Aggregation::Top25 => &sorted[n - n.div_ceil(4)..],
    };
    Ok(slice.iter().sum::<f64>() / slice.len() as f64)
}

/// Componentwise aggregation of per-trial vectors.
pub fn aggregate_goal_scores(trials: &[MetricVector], mode: Aggregation) -> Result<MetricVector> {
    if trials.is_empty() {
        return Err(Error::Empty("trial metrics"));
    }
    let mut out = [0.0; 6];
    for (k, slot) in out.iter_mut().enumerate() {
        let column: Vec<f64> = trials.iter().map(|m| m.to_array()[k]).collect();
        *slot = aggregate_values(&column, mode)?;
    }
    Ok(MetricVector::from_array(out))
}

pub fn mean_vector(vectors: &[MetricVector]) -> Result<MetricVector> {
    aggregate_goal_scores(vectors, Aggregation::Mean)
}

pub fn average_over_seeds(per_seed: &[MetricVector], n: usize) -> Result<MetricVector> {
    if per_seed.len() != n {
        return Err(Error::Shape {
            what: "per-seed metrics".into(),
            expected: n.to_string(),
            found: per_seed.len().to_string(),
        });
    }
    mean_vector(per_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goals::CommandTriple;
    use crate::robot::RobotDescription;
    use crate::sim::RobotState;
    use crate::trace::TraceRecord;

    fn still_trace(n: usize, cmd: CommandTriple, vx: f64) -> EpisodeTrace {
        let robot = RobotDescription::go2();
        let mut t = EpisodeTrace::default();
        for k in 0..n {
            let mut state = RobotState::standing([0.0, 0.0, 0.38], 0.0, robot.default_pose());
            state.lin_vel[0] = vx;
            t.records.push(TraceRecord {
                time: k as f64 * 0.02,
                segment: 0,
                cmd,
                state,
                action: [0.0; 12],
                fallen: false,
                collisions: 0,
                height_above_ground: 0.38,
            });
        }
        t
    }

    #[test]
    fn perfect_episode_scores_one() {
        let t = still_trace(20, CommandTriple::new(0.7, 0.0, 0.0), 0.7);
        let m = compute_metrics(&t, &NormalizationConfig::default()).unwrap();
        assert_eq!(m, MetricVector::splat(1.0));
    }

    #[test]
    fn longitudinal_shortfall() {
        let t = still_trace(20, CommandTriple::new(1.5, 0.0, 0.0), 1.0);
        let m = compute_metrics(&t, &NormalizationConfig::default()).unwrap();
        assert!((m.lin_trk - 0.75).abs() < 1e-12);
    }

    #[test]
    fn half_samples_past_soft_limit() {
        let mut t = still_trace(10, CommandTriple::zero(), 0.0);
        for (k, r) in t.records.iter_mut().enumerate() {
            if k % 2 == 0 {
                r.state.q = [10.0; 12];
            }
        }
        let m = compute_metrics(&t, &NormalizationConfig::default()).unwrap();
        assert!((m.dof_limits - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(compute_metrics(&EpisodeTrace::default(), &NormalizationConfig::default()).is_err());
    }

    #[test]
    fn aggregation_examples() {
        let v = [1.0, 0.8, 0.6, 0.4];
        assert!((aggregate_values(&v, Aggregation::Worst50).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(aggregate_values(&v, Aggregation::Top25).unwrap(), 1.0);
        for mode in Aggregation::ALL {
            assert_eq!(aggregate_values(&[0.3], mode).unwrap(), 0.3);
        }
    }

    #[test]
    fn seed_average() {
        let vs = [MetricVector::splat(0.2), MetricVector::splat(0.4), MetricVector::splat(0.6)];
        let m = average_over_seeds(&vs, 3).unwrap();
        for v in m.to_array() {
            assert!((v - 0.4).abs() < 1e-15);
        }
        assert!(average_over_seeds(&vs[..2], 3).is_err());
    }
}
