//! Command-line front end.
//!
//! Evaluation commands (`stress`, `level`, `base`) resolve a [`RunConfig`]
//! from an optional file, `LOCOBENCH_*` environment overrides and flags, in
//! that order of increasing precedence. Each run writes `manifest.json` and
//! its outputs to `<output_dir>/<UTC timestamp>-<command>/`. Progress goes
//! to standard error as one JSON object per line.
//!
//! Exit status: 0 on success, 1 when any cell errored (or a rerun differs),
//! 2 for invalid input.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{BackendConfig, PolicySource, RunConfig};
use crate::error::{Error, Result};
use crate::goals::GoalKind;
use crate::metrics::{compute_metrics, raw_metrics, Aggregation, NormalizationConfig};
use crate::pipelines::manifest::{RunCommand, RunManifest};
use crate::pipelines::{base_pipeline, dr_presets, level_pipeline, stress_pipeline, DrSet, EvalContext, EvaluationCell, ProgressEvent, TrialOutcome};
use crate::pipelines::seeds::terrain_seed;
use crate::policy::{pca_project, weights, LatentRecorder};
use crate::report;
use crate::rewards::{episode_reward_report, RewardConfig, TrackingKernel};
use crate::scoring::{GoalLeaf, PassRule};
use crate::terrain::{generate, level_for_difficulty, terrain_parameters, TerrainKind, TerrainSpec};
use crate::trace::EpisodeTrace;

#[derive(Debug, Parser)]
#[command(name = "locobench", version, about = "Sim-to-sim assessment of legged locomotion policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every terrain and DR preset: level search, quality and the overall score.
    Stress(RunArgs),
    /// Level search and quality for one terrain and DR preset.
    Level(LevelArgs),
    /// One goal on one terrain/level/DR cell.
    Base(BaseArgs),
    /// Terrain utilities.
    #[command(subcommand)]
    Terrain(TerrainCommand),
    /// Metric utilities.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Reward utilities.
    #[command(subcommand)]
    Rewards(RewardsCommand),
    /// Latent-space utilities.
    #[command(subcommand)]
    Latents(LatentsCommand),
    /// Policy utilities.
    #[command(subcommand)]
    Policy(PolicyCommand),
    /// Run-manifest utilities.
    #[command(subcommand)]
    Manifest(ManifestCommand),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML or JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `scripted:<stand|trot_tracker|faulty>`, `random:<seed>` or a weights file.
    #[arg(long)]
    pub policy: Option<String>,
    /// `reference` or the `host:port` of a bridge server.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Root of every derived seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parent directory of the timestamped run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `default9`, `friction_sweep10` or `nominal`.
    #[arg(long)]
    pub dr_set: Option<String>,
    /// Comma-separated terrain kinds.
    #[arg(long, value_delimiter = ',')]
    pub terrains: Option<Vec<TerrainKind>>,
    /// Pass rule as `required/seeds`, e.g. `4/5` or `3/3`.
    #[arg(long)]
    pub pass_rule: Option<String>,
    #[arg(long)]
    pub metric_seeds: Option<usize>,
    /// `worst50`, `mean` or `top25`.
    #[arg(long)]
    pub aggregation: Option<Aggregation>,
}

#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub terrain: TerrainKind,
    /// Index into the DR set.
    #[arg(long, default_value_t = 0)]
    pub dr_index: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BaseArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub terrain: TerrainKind,
    #[arg(long, default_value_t = 1)]
    pub level: u8,
    #[arg(long, default_value_t = 0)]
    pub dr_index: usize,
    /// `max_velocity`, `diagonal_velocity` or `target_position`.
    #[arg(long)]
    pub goal: GoalKind,
    /// Episode seed; derived from the root seed when absent.
    #[arg(long)]
    pub episode_seed: Option<u64>,
    /// Also write every trial trace as NDJSON.
    #[arg(long)]
    pub traces: bool,
    /// Also write gate weights and latents per step (MoE policies).
    #[arg(long)]
    pub latents: bool,
}

#[derive(Debug, Subcommand)]
pub enum TerrainCommand {
    /// Generate one tile and write it as RGHF binary or CSV.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub kind: TerrainKind,
    /// Difficulty parameter in [0.1, 1.0].
    #[arg(long = "d", conflicts_with = "level")]
    pub difficulty: Option<f64>,
    #[arg(long)]
    pub level: Option<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `rghf` or `csv`.
    #[arg(long, default_value = "rghf")]
    pub format: String,
    /// Output file; `terrain.<format>` when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Recompute the six metrics from a recorded trace.
    Replay {
        trace: PathBuf,
        /// Terrain whose normalization constants apply; taken from the trace when absent.
        #[arg(long)]
        terrain: Option<TerrainKind>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RewardsCommand {
    /// Recompute every reward term over a recorded trace.
    Replay {
        trace: PathBuf,
        /// `multi_terrain` or `high_speed`.
        #[arg(long, default_value = "multi_terrain")]
        variant: String,
        /// `verbatim` or `inverse` tracking kernel.
        #[arg(long)]
        kernel: Option<String>,
        /// CSV output; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatentsCommand {
    /// Project recorded latents onto two principal components.
    Pca {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PolicyCommand {
    /// Print architecture, parameter count and hash of a policy.
    Inspect { source: String },
}

#[derive(Debug, Subcommand)]
pub enum ManifestCommand {
    /// Repeat a recorded run and compare its leaf results with the original.
    Rerun {
        /// `manifest.json` or the run directory holding it.
        manifest: PathBuf,
        /// Parent directory of the new run; the recorded one when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_pass_rule(s: &str) -> Result<PassRule> {
    let (r, n) = s
        .split_once('/')
        .ok_or_else(|| Error::param("pass_rule", format!("`{s}` is not `required/seeds`")))?;
    let rule = PassRule {
        required: r.trim().parse().map_err(|_| Error::param("pass_rule", format!("bad count `{r}`")))?,
        seeds: n.trim().parse().map_err(|_| Error::param("pass_rule", format!("bad count `{n}`")))?,
    };
    rule.validate()?;
    Ok(rule)
}

/// Config file (or defaults) plus environment, then flags.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::from_str_with_env("", false, std::env::vars())?,
    };
    if let Some(p) = &args.policy {
        cfg.policy = p.clone();
    }
    if let Some(b) = &args.backend {
        cfg.backend = if b == "reference" {
            BackendConfig::default()
        } else {
            BackendConfig::Bridge {
                address: b.trim_start_matches("tcp://").to_string(),
                timeout_secs: 30.0,
            }
        };
    }
    if let Some(w) = args.workers {
        cfg.plan.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.plan.level.seed_root = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    if let Some(d) = &args.dr_set {
        cfg.plan.dr_set = d.parse::<DrSet>()?;
    }
    if let Some(t) = &args.terrains {
        cfg.plan.terrains = t.clone();
    }
    if let Some(r) = &args.pass_rule {
        cfg.plan.level.pass_rule = parse_pass_rule(r)?;
    }
    if let Some(m) = args.metric_seeds {
        cfg.plan.level.metric_seeds = m;
    }
    if let Some(a) = args.aggregation {
        cfg.plan.level.aggregation = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_progress(ev: &ProgressEvent) {
    if let Ok(line) = serde_json::to_string(ev) {
        eprintln!("{line}");
    }
}

/// Creates `<parent>/<UTC timestamp>-<label>`, adding a suffix on collision.
pub fn run_directory(parent: &Path, label: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(parent)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    for n in 0.. {
        let name = if n == 0 {
            format!("{stamp}-{label}")
        } else {
            format!("{stamp}-{label}-{n}")
        };
        let dir = parent.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("the suffix loop only ends by returning")
}

#[derive(Serialize)]
struct BaseReport<'a> {
    cell: &'a EvaluationCell,
    success: bool,
    leaf: &'a GoalLeaf,
    trials: &'a [TrialOutcome],
}

/// File holding the leaf results of a run, compared by `manifest rerun`.
pub fn leaf_file(command: &RunCommand) -> &'static str {
    match command {
        RunCommand::Stress => "score_tree.json",
        RunCommand::Level { .. } => "cell.json",
        RunCommand::Base { .. } => "outcome.json",
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExecOptions {
    pub traces: bool,
    pub latents: bool,
    pub quiet: bool,
}

/// Runs a manifest into `dir`; returns the number of errored cells.
pub fn execute(manifest: &RunManifest, dir: &Path, opts: ExecOptions) -> Result<usize> {
    let cfg = &manifest.config;
    let backend = cfg.backend.build()?;
    let policy = cfg.policy_source()?.load()?;
    let robot = cfg.robot_description()?;
    let ctx = EvalContext {
        backend: backend.as_ref(),
        policy: policy.as_ref(),
        robot: &robot,
        sim: &cfg.sim,
        goals: &cfg.goals,
        normalization: cfg.normalization.as_ref(),
        keep_traces: opts.traces,
        record_latents: opts.latents,
    };
    let presets = dr_presets(cfg.plan.dr_set);
    let preset = |j: usize| {
        presets
            .get(j)
            .map(|p| p.1.clone())
            .ok_or_else(|| Error::param("dr_index", format!("{j} outside the {} presets", presets.len())))
    };
    let progress: Option<crate::pipelines::ProgressSink<'_>> = if opts.quiet { None } else { Some(&emit_progress) };
    manifest.save(&dir.join("manifest.json"))?;
    match &manifest.command {
        RunCommand::Stress => {
            let tree = stress_pipeline(&ctx, &cfg.plan, &manifest.config_hash, progress)?;
            let summary = report::write_reports(&tree, dir)?;
            if !opts.quiet {
                print!("{}", report::render_table(&summary));
                for w in &summary.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Ok(tree.errors.len())
        }
        RunCommand::Level { terrain, dr_index } => {
            let dr = preset(*dr_index)?;
            let cell = level_pipeline(&ctx, &cfg.plan.level, *terrain, *dr_index, &dr)?;
            std::fs::write(dir.join("cell.json"), serde_json::to_string_pretty(&cell)?)?;
            if !opts.quiet {
                println!(
                    "{terrain} {}: level {} quality {:.4} score {:.4}",
                    presets[*dr_index].0, cell.level, cell.quality, cell.score
                );
            }
            Ok(0)
        }
        RunCommand::Base {
            terrain,
            level,
            dr_index,
            goal,
            seed,
        } => {
            let cell = EvaluationCell {
                terrain: *terrain,
                level: *level,
                dr_index: *dr_index,
                dr: preset(*dr_index)?,
                goal: *goal,
                seed: *seed,
                terrain_seed: terrain_seed(cfg.plan.level.seed_root, *terrain, *level),
            };
            let out = base_pipeline(&ctx, &cell)?;
            let rep = BaseReport {
                cell: &out.cell,
                success: out.success,
                leaf: &out.leaf,
                trials: &out.trials,
            };
            std::fs::write(dir.join("outcome.json"), serde_json::to_string_pretty(&rep)?)?;
            for (t, trace) in out.traces.iter().enumerate() {
                trace.write_ndjson(BufWriter::new(File::create(dir.join(format!("trace_{t}.ndjson")))?))?;
            }
            if opts.latents && !out.latents.is_empty() {
                let first = &out.latents[0];
                let mut rec = LatentRecorder::new(true, first.gate.len(), first.z.len());
                for row in out.latents.iter().cloned() {
                    rec.record(row)?;
                }
                rec.write_csv(BufWriter::new(File::create(dir.join("latents.csv"))?))?;
            }
            if !opts.quiet {
                println!("{} success={} worst50={:?}", cell.key(), out.success, out.leaf.worst50.to_array());
            }
            Ok(0)
        }
    }
}

fn start_run(command: RunCommand, cfg: RunConfig, label: &str, opts: ExecOptions) -> Result<i32> {
    let created = chrono::Utc::now().to_rfc3339();
    let manifest = RunManifest::new(command, cfg, created)?;
    let dir = run_directory(&manifest.config.output_dir, label)?;
    let errored = execute(&manifest, &dir, opts)?;
    eprintln!("{}", serde_json::json!({"event": "run_done", "dir": dir, "errored_cells": errored}));
    Ok(if errored == 0 { 0 } else { 1 })
}

fn read_trace(path: &Path) -> Result<EpisodeTrace> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"RGTR") {
        EpisodeTrace::read_binary(&bytes[..])
    } else {
        EpisodeTrace::read_ndjson(&bytes[..])
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Dispatches one parsed command line.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Stress(args) => {
            let cfg = resolve_config(&args)?;
            start_run(RunCommand::Stress, cfg, "stress", ExecOptions::default())
        }
        Command::Level(args) => {
            let cfg = resolve_config(&args.run)?;
            let cmd = RunCommand::Level {
                terrain: args.terrain,
                dr_index: args.dr_index,
            };
            start_run(cmd, cfg, "level", ExecOptions::default())
        }
        Command::Base(args) => {
            let cfg = resolve_config(&args.run)?;
            if !(1..=10).contains(&args.level) {
                return Err(Error::param("level", format!("{} outside 1..=10", args.level)));
            }
            let seed = args.episode_seed.unwrap_or_else(|| {
                crate::pipelines::derive_seed(
                    cfg.plan.level.seed_root,
                    &format!("base/{}/dr{:02}/L{}/{}", args.terrain, args.dr_index, args.level, args.goal),
                )
            });
            let cmd = RunCommand::Base {
                terrain: args.terrain,
                level: args.level,
                dr_index: args.dr_index,
                goal: args.goal,
                seed,
            };
            let opts = ExecOptions {
                traces: args.traces,
                latents: args.latents,
                quiet: false,
            };
            start_run(cmd, cfg, "base", opts)
        }
        Command::Terrain(TerrainCommand::Export(a)) => {
            let d = match (a.difficulty, a.level) {
                (Some(d), _) => d,
                (None, Some(l)) => crate::terrain::difficulty_for_level(l),
                (None, None) => return Err(Error::param("d", "give --d or --level")),
            };
            let spec = TerrainSpec::tile(a.kind, d, a.seed);
            let field = generate(&spec)?;
            let path = a.out.unwrap_or_else(|| PathBuf::from(format!("terrain.{}", a.format)));
            let w = BufWriter::new(File::create(&path)?);
            match a.format.as_str() {
                "rghf" => field.write_binary(w)?,
                "csv" => field.write_csv(w)?,
                other => {
                    return Err(Error::Unknown {
                        what: "terrain format",
                        value: other.into(),
                    })
                }
            }
            let params: serde_json::Map<String, serde_json::Value> = terrain_parameters(a.kind, d)
                .into_iter()
                .map(|(k, v)| (k.to_string(), serde_json::json!((v * 1e9).round() / 1e9)))
                .collect();
            let (rows, cols) = field.dims();
            println!(
                "{}",
                serde_json::json!({
                    "kind": a.kind, "difficulty": d, "level": level_for_difficulty(d), "seed": a.seed,
                    "rows": rows, "cols": cols, "resolution_m": field.resolution_m,
                    "parameters": params, "path": path,
                })
            );
            Ok(0)
        }
        Command::Metrics(MetricsCommand::Replay { trace, terrain }) => {
            let trace = read_trace(&trace)?;
            let kind = terrain.or(trace.meta.terrain).unwrap_or(TerrainKind::Flat);
            let norm = NormalizationConfig::for_terrain(kind);
            let raw = raw_metrics(&trace)?;
            let m = compute_metrics(&trace, &norm)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "terrain": kind, "steps": trace.len(), "fell": trace.fell(),
                    "normalization": norm, "raw": raw, "metrics": m,
                }))?
            );
            Ok(0)
        }
        Command::Rewards(RewardsCommand::Replay {
            trace,
            variant,
            kernel,
            out,
        }) => {
            let trace = read_trace(&trace)?;
            let mut cfg = match variant.as_str() {
                "multi_terrain" => RewardConfig::multi_terrain(),
                "high_speed" => RewardConfig::high_speed(),
                other => {
                    return Err(Error::Unknown {
                        what: "reward variant",
                        value: other.into(),
                    })
                }
            };
            if let Some(k) = kernel {
                cfg.kernel = match k.as_str() {
                    "verbatim" => TrackingKernel::Verbatim,
                    "inverse" => TrackingKernel::Inverse,
                    other => {
                        return Err(Error::Unknown {
                            what: "tracking kernel",
                            value: other.into(),
                        })
                    }
                };
            }
            let rep = episode_reward_report(&trace, &cfg, None)?;
            let mut buf = Vec::new();
            rep.write_csv(&mut buf)?;
            write_output(out.as_deref(), &String::from_utf8_lossy(&buf))?;
            Ok(0)
        }
        Command::Latents(LatentsCommand::Pca { input, out }) => {
            let rec = LatentRecorder::read_csv(BufReader::new(File::open(&input)?))?;
            let proj = pca_project(&rec.latent_matrix())?;
            let mut text = String::from("timestamp,terrain,command_id,pc1,pc2\n");
            for (r, p) in rec.rows().iter().zip(&proj) {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.time,
                    r.terrain.map_or("", |t| t.as_str()),
                    r.command_id,
                    p[0],
                    p[1]
                ));
            }
            write_output(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Policy(PolicyCommand::Inspect { source }) => {
            let src = PolicySource::parse(&source)?;
            let hash = src.hash()?;
            let info = match &src {
                PolicySource::File(path) => {
                    let bytes = std::fs::read(path)?;
                    let (header, _) = weights::read_header(&bytes)?;
                    let policy = weights::from_bytes(&bytes)?;
                    serde_json::json!({
                        "source": source, "file_sha256": hash, "arch": header.arch,
                        "tensors": header.tensors, "payload_sha256": header.sha256,
                        "parameters": policy.parameter_count(),
                    })
                }
                _ => {
                    let policy = src.load()?;
                    serde_json::json!({"source": source, "sha256": hash, "name": policy.name()})
                }
            };
            println!("{}", serde_json::to_string_pretty(&info)?);
            Ok(0)
        }
        Command::Manifest(ManifestCommand::Rerun { manifest, out, workers }) => {
            let path = if manifest.is_dir() {
                manifest.join("manifest.json")
            } else {
                manifest
            };
            let mut m = RunManifest::load(&path)?;
            m.verify()?;
            if let Some(w) = workers {
                m.config.plan.workers = w;
            }
            let parent = out.unwrap_or_else(|| m.config.output_dir.clone());
            let dir = run_directory(&parent, "rerun")?;
            let errored = execute(&m, &dir, ExecOptions::default())?;
            let original = path.parent().map(|p| p.join(leaf_file(&m.command)));
            let verdict = match original.filter(|p| p.exists()) {
                Some(orig) => {
                    let same = std::fs::read(&orig)? == std::fs::read(dir.join(leaf_file(&m.command)))?;
                    if same {
                        "identical"
                    } else {
                        "differs"
                    }
                }
                None => "no_original",
            };
            eprintln!("{}", serde_json::json!({"event": "rerun_done", "dir": dir, "leaves": verdict}));
            Ok(if errored == 0 && verdict != "differs" { 0 } else { 1 })
        }
    }
}

/// Parses `args`, runs, and maps errors to exit status 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
