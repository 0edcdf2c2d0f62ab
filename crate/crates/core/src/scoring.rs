//! Hierarchical scores: execution quality `Q`, overlapping terrain score `S`,
//! per-terrain robust score `S̄_i` and the framework score `S̄`.
//!
//! `Q = (Π m_k^{w_k})^{1/Σw}` is a weighted geometric mean, so one failed
//! metric drags the whole cell to zero. `S = α(L* − 1) + βQ` lets a strong
//! execution at level `L` outrank a barely passing run at `L + 1` as long as
//! `α < β`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goals::GoalKind;
use crate::metrics::{mean_vector, Aggregation, MetricVector, NormalizationConfig};
use crate::pipelines::level::binary_search_level;
use crate::sim::DomainRandomization;
use crate::terrain::TerrainKind;

pub const MAX_LEVEL: u8 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreWeights {
    /// Exponents for lin, ang, power, limits, orientation, smoothness.
    pub metric_weights: [f64; 6],
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            metric_weights: [2.0, 2.0, 1.0, 1.0, 1.0, 1.0],
            alpha: 0.09,
            beta: 0.19,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<()> {
        if self.metric_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::param("metric_weights", "all exponents must be positive"));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::param("alpha/beta", "must be positive"));
        }
        if !(self.beta > self.alpha) {
            return Err(Error::param("beta", format!("{} must exceed alpha {}", self.beta, self.alpha)));
        }
        let top = self.alpha * f64::from(MAX_LEVEL - 1) + self.beta;
        if top > 1.0 + 1e-12 {
            return Err(Error::param("alpha/beta", format!("maximum score {top} exceeds 1")));
        }
        Ok(())
    }
}

pub fn quality_score(m: &MetricVector, weights: &[f64; 6]) -> Result<f64> {
    m.validate()?;
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::param("metric_weights", "all exponents must be positive"));
    }
    let values = m.to_array();
    if values.contains(&0.0) {
        return Ok(0.0);
    }
    let total: f64 = weights.iter().sum();
    let log: f64 = values.iter().zip(weights).map(|(v, w)| w * v.ln()).sum();
    Ok((log / total).exp())
}

pub fn terrain_score(level: u8, quality: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(Error::param("level", format!("{level} outside 1..=10")));
    }
    if !(0.0..=1.0).contains(&quality) {
        return Err(Error::param("quality", format!("{quality} outside [0, 1]")));
    }
    Ok(alpha * f64::from(level - 1) + beta * quality)
}

/// Score of one terrain/DR cell; `level == 0` means no level passed and the
/// quality was measured at level 1.
pub fn cell_score(level: u8, quality: f64, weights: &ScoreWeights) -> Result<f64> {
    terrain_score(level.max(1), quality, weights.alpha, weights.beta)
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("score set"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Success threshold over a fixed set of seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassRule {
    pub seeds: usize,
    pub required: usize,
}

impl Default for PassRule {
    fn default() -> Self {
        Self::eighty_percent(5)
    }
}

impl PassRule {
    /// At least 80% of `seeds` must succeed.
    pub fn eighty_percent(seeds: usize) -> Self {
        PassRule {
            seeds,
            required: (seeds * 4).div_ceil(5),
        }
    }

    pub fn all_of(seeds: usize) -> Self {
        PassRule { seeds, required: seeds }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 || self.required == 0 || self.required > self.seeds {
            return Err(Error::param("pass_rule", format!("{} of {} is not satisfiable", self.required, self.seeds)));
        }
        Ok(())
    }

    pub fn passes(&self, outcomes: &[bool]) -> bool {
        outcomes.len() == self.seeds && outcomes.iter().filter(|&&s| s).count() >= self.required
    }
}

/// Per-goal results of one metric seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalLeaf {
    pub worst50: MetricVector,
    pub mean: MetricVector,
    pub top25: MetricVector,
    pub trials: usize,
    pub fell: bool,
}

impl GoalLeaf {
    pub fn select(&self, mode: Aggregation) -> MetricVector {
        match mode {
            Aggregation::Worst50 => self.worst50,
            Aggregation::Mean => self.mean,
            Aggregation::Top25 => self.top25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellNode {
    pub dr: DomainRandomization,
    /// Pass-seed outcomes for every level the search visited.
    pub pass_results: BTreeMap<u8, Vec<bool>>,
    pub level: u8,
    /// Level at which the metric seeds ran: `max(level, 1)`.
    pub quality_level: u8,
    /// Per goal, one leaf per metric seed.
    pub goals: BTreeMap<GoalKind, Vec<GoalLeaf>>,
    pub cell_vector: MetricVector,
    pub quality: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainNode {
    pub cells: BTreeMap<String, CellNode>,
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellError {
    pub terrain: TerrainKind,
    pub dr: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub engine_version: String,
    pub config_hash: String,
    pub policy: String,
    pub backend: String,
    pub seed_root: u64,
    pub weights: ScoreWeights,
    pub aggregation: Aggregation,
    pub pass_rule: PassRule,
    pub metric_seeds: usize,
    pub dr_labels: Vec<String>,
    pub normalization: BTreeMap<TerrainKind, NormalizationConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTree {
    pub meta: TreeMeta,
    pub terrains: BTreeMap<TerrainKind, TerrainNode>,
    pub score: Option<f64>,
    pub errors: Vec<CellError>,
}

pub fn dr_key(index: usize) -> String {
    format!("dr{index:02}")
}

impl CellNode {
    /// Rebuilds level, vector, quality and score from the stored leaves.
    pub fn recompute(&mut self, meta: &TreeMeta) -> Result<()> {
        let mut lookup = |level: u8| -> Result<bool> {
            let outcomes = self
                .pass_results
                .get(&level)
                .ok_or_else(|| Error::InvalidState(format!("no pass leaves for level {level}")))?;
            Ok(meta.pass_rule.passes(outcomes))
        };
        self.level = binary_search_level(MAX_LEVEL, &mut lookup)?;
        self.quality_level = self.level.max(1);
        self.cell_vector = cell_vector(&self.goals, meta.aggregation, meta.metric_seeds)?;
        self.quality = quality_score(&self.cell_vector, &meta.weights.metric_weights)?;
        self.score = cell_score(self.level, self.quality, &meta.weights)?;
        Ok(())
    }
}

/// Mean over goals of each goal's aggregated vector, then mean over seeds.
pub fn cell_vector(goals: &BTreeMap<GoalKind, Vec<GoalLeaf>>, mode: Aggregation, seeds: usize) -> Result<MetricVector> {
    if goals.is_empty() {
        return Err(Error::Empty("goal leaves"));
    }
    let mut per_seed = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let mut vs = Vec::with_capacity(goals.len());
        for (goal, leaves) in goals {
            let leaf = leaves
                .get(s)
                .ok_or_else(|| Error::InvalidState(format!("goal {goal} lacks metric seed {s}")))?;
            vs.push(leaf.select(mode));
        }
        per_seed.push(mean_vector(&vs)?);
    }
    crate::metrics::average_over_seeds(&per_seed, seeds)
}

impl ScoreTree {
    /// `S̄_i` per terrain and `S̄`; errors if any configured cell is missing.
    pub fn aggregate(&self) -> Result<(BTreeMap<TerrainKind, f64>, f64)> {
        if let Some(e) = self.errors.first() {
            return Err(Error::InvalidState(format!(
                "{} cell(s) missing, first {}/{}: {}",
                self.errors.len(),
                e.terrain,
                e.dr,
                e.message
            )));
        }
        let mut per_terrain = BTreeMap::new();
        for (kind, node) in &self.terrains {
            let scores: Vec<f64> = node.cells.values().map(|c| c.score).collect();
            per_terrain.insert(*kind, mean(&scores)?);
        }
        let values: Vec<f64> = per_terrain.values().copied().collect();
        let total = mean(&values)?;
        Ok((per_terrain, total))
    }

    /// Recomputes every internal node from leaves.
    pub fn recompute(&self) -> Result<ScoreTree> {
        let mut out = self.clone();
        for node in out.terrains.values_mut() {
            for cell in node.cells.values_mut() {
                cell.recompute(&self.meta)?;
            }
        }
        out.refresh_aggregates();
        Ok(out)
    }

    /// Fills `S̄_i` and `S̄`, leaving them empty where cells are missing.
    pub fn refresh_aggregates(&mut self) {
        let expected = self.meta.dr_labels.len();
        let mut complete = self.errors.is_empty();
        for (kind, node) in self.terrains.iter_mut() {
            let ok = node.cells.len() == expected && !self.errors.iter().any(|e| e.terrain == *kind);
            complete &= ok;
            node.score = if ok && !node.cells.is_empty() {
                mean(&node.cells.values().map(|c| c.score).collect::<Vec<_>>()).ok()
            } else {
                None
            };
        }
        self.score = if complete {
            let vals: Vec<f64> = self.terrains.values().filter_map(|n| n.score).collect();
            mean(&vals).ok()
        } else {
            None
        };
    }

    pub fn cells(&self) -> impl Iterator<Item = (TerrainKind, &str, &CellNode)> {
        self.terrains
            .iter()
            .flat_map(|(k, n)| n.cells.iter().map(move |(d, c)| (*k, d.as_str(), c)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population mean and standard deviation.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

/// Table row: score, category means and mean level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedReport {
    pub score: Option<f64>,
    pub tracking: MeanStd,
    pub safety: MeanStd,
    pub quality: MeanStd,
    pub level: f64,
    pub cells: usize,
    pub per_terrain: BTreeMap<TerrainKind, Option<f64>>,
}

/// Category summaries over all scored cells: Tracking = linear and angular
/// tracking, Safety = power and joint limits, Quality = orientation and
/// torque smoothness.
pub fn grouped_reports(tree: &ScoreTree) -> GroupedReport {
    let mut tracking = Vec::new();
    let mut safety = Vec::new();
    let mut quality = Vec::new();
    let mut levels = Vec::new();
    for (_, _, cell) in tree.cells() {
        let m = &cell.cell_vector;
        tracking.push(0.5 * (m.lin_trk + m.ang_trk));
        safety.push(0.5 * (m.dof_power + m.dof_limits));
        quality.push(0.5 * (m.orient + m.smooth));
        levels.push(f64::from(cell.level));
    }
    GroupedReport {
        score: tree.score,
        tracking: MeanStd::of(&tracking),
        safety: MeanStd::of(&safety),
        quality: MeanStd::of(&quality),
        level: MeanStd::of(&levels).mean,
        cells: levels.len(),
        per_terrain: tree.terrains.iter().map(|(k, n)| (*k, n.score)).collect(),
    }
}
