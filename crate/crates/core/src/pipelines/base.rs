//! One goal on one cell.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::seeds::derive_seed;
use super::{EvalContext, EvaluationCell};
use crate::error::Result;
use crate::goals::{build_goal, success_check, target_position_controller, CommandTriple, Directive, GoalKind, Pose2, Trial};
use crate::metrics::{aggregate_goal_scores, compute_metrics, Aggregation, MetricVector};
use crate::policy::{LatentRow, PolicyInput};
use crate::scoring::GoalLeaf;
use crate::sim::Simulator;
use crate::terrain::{generate, Heightfield, TerrainSpec};
use crate::trace::{EpisodeTrace, TraceMeta, TraceRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub metrics: MetricVector,
    pub fell: bool,
    pub steps: usize,
    /// Planar distance between the first and last recorded positions.
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalOutcome {
    pub cell: EvaluationCell,
    pub trials: Vec<TrialOutcome>,
    pub leaf: GoalLeaf,
    /// Target reached for position goals; no fall for velocity goals.
    pub success: bool,
    pub traces: Vec<EpisodeTrace>,
    pub latents: Vec<LatentRow>,
}

pub fn cell_terrain(cell: &EvaluationCell) -> Result<Arc<Heightfield>> {
    Ok(Arc::new(generate(&TerrainSpec::for_level(cell.terrain, cell.level, cell.terrain_seed))?))
}

/// Runs every trial of the cell's goal and scores them.
pub fn base_pipeline(ctx: &EvalContext<'_>, cell: &EvaluationCell) -> Result<GoalOutcome> {
    let terrain = cell_terrain(cell)?;
    let limits = ctx.goals.limits_for(cell.terrain);
    let schedule = build_goal(cell.goal, limits, ctx.goals);
    let norm = ctx.normalization_for(cell.terrain);
    let mut trials = Vec::with_capacity(schedule.trials.len());
    let mut traces = Vec::new();
    let mut latents = Vec::new();
    let mut success = true;
    for (t, trial) in schedule.trials.iter().enumerate() {
        let seed = derive_seed(cell.seed, &format!("trial/{t}"));
        let (trace, rows) = run_trial(ctx, cell, &terrain, trial, t as u32, seed)?;
        let metrics = compute_metrics(&trace, &norm)?;
        let fell = trace.fell();
        let ok = match cell.goal {
            GoalKind::TargetPosition => success_check(&trace, ctx.goals.success_distance),
            _ => !fell,
        };
        success &= ok;
        trials.push(TrialOutcome {
            metrics,
            fell,
            steps: trace.len(),
            displacement: displacement(&trace),
        });
        latents.extend(rows);
        if ctx.keep_traces {
            traces.push(trace);
        }
    }
    let vectors: Vec<MetricVector> = trials.iter().map(|t| t.metrics).collect();
    let leaf = GoalLeaf {
        worst50: aggregate_goal_scores(&vectors, Aggregation::Worst50)?,
        mean: aggregate_goal_scores(&vectors, Aggregation::Mean)?,
        top25: aggregate_goal_scores(&vectors, Aggregation::Top25)?,
        trials: trials.len(),
        fell: trials.iter().any(|t| t.fell),
    };
    Ok(GoalOutcome {
        cell: cell.clone(),
        trials,
        leaf,
        success,
        traces,
        latents,
    })
}

fn displacement(trace: &EpisodeTrace) -> f64 {
    match (trace.records.first(), trace.records.last()) {
        (Some(a), Some(b)) => (b.state.position[0] - a.state.position[0]).hypot(b.state.position[1] - a.state.position[1]),
        _ => 0.0,
    }
}

fn pose(state: &crate::sim::RobotState) -> Pose2 {
    Pose2 {
        x: state.position[0],
        y: state.position[1],
        yaw: state.yaw(),
    }
}

/// Runs one trial from a fresh reset and records every control step.
pub fn run_trial(
    ctx: &EvalContext<'_>,
    cell: &EvaluationCell,
    terrain: &Arc<Heightfield>,
    trial: &Trial,
    trial_index: u32,
    seed: u64,
) -> Result<(EpisodeTrace, Vec<LatentRow>)> {
    let mut sim = Simulator::new(ctx.backend.create()?, ctx.sim.clone(), ctx.robot.clone())?;
    let dt = ctx.sim.control_dt();
    let hz = f64::from(ctx.sim.control_hz);
    let limits = ctx.goals.limits_for(cell.terrain);
    let mut state = sim.reset(terrain.clone(), &cell.dr, seed)?;
    let mut session = ctx.policy.session(dt)?;
    let mut meta = TraceMeta::for_robot(ctx.robot, dt);
    meta.terrain = Some(cell.terrain);
    meta.goal = Some(cell.goal);
    meta.trial = Some(trial_index);
    let mut trace = EpisodeTrace::new(meta);
    let mut latents = Vec::new();
    let mut prev_action = [0.0; 12];

    let mut step = |segment: u32, cmd: CommandTriple, state: &mut crate::sim::RobotState| -> Result<bool> {
        let obs = sim.observe(&cmd, &prev_action)?;
        let out = session.act(&PolicyInput { obs: &obs, cmd })?;
        let res = sim.step(&out.action)?;
        if ctx.record_latents {
            if let Some(l) = out.latent {
                latents.push(LatentRow {
                    time: sim.time(),
                    terrain: Some(cell.terrain),
                    command_id: segment,
                    gate: l.gate,
                    z: l.z,
                });
            }
        }
        trace.records.push(TraceRecord {
            time: sim.time(),
            segment,
            cmd,
            state: res.state.clone(),
            action: out.action,
            fallen: res.fallen,
            collisions: res.collisions,
            height_above_ground: res.height_above_ground,
        });
        prev_action = out.action;
        *state = res.state;
        Ok(res.fallen)
    };

    'segments: for (s, directive) in trial.segments.iter().enumerate() {
        let segment = s as u32;
        match directive {
            Directive::Command { command, duration } => {
                let n = (duration * hz).round() as usize;
                for _ in 0..n {
                    if step(segment, *command, &mut state)? {
                        break 'segments;
                    }
                }
            }
            Directive::ReachTarget {
                distance,
                gain,
                tolerance,
                timeout,
            } => {
                let start = pose(&state);
                let target = Pose2 {
                    x: start.x + distance * start.yaw.cos(),
                    y: start.y + distance * start.yaw.sin(),
                    yaw: start.yaw,
                };
                let n = (timeout * hz).round() as usize;
                for _ in 0..n {
                    let here = pose(&state);
                    if (target.x - here.x).hypot(target.y - here.y) < *tolerance {
                        break;
                    }
                    let cmd = target_position_controller(here, target, *gain, &limits);
                    if step(segment, cmd, &mut state)? {
                        break 'segments;
                    }
                }
            }
        }
    }
    Ok((trace, latents))
}
