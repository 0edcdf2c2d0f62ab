//! Tables and CSV files derived from score trees.
//!
//! Every number printed here is read from a [`ScoreTree`] node; the `key`
//! column of the cell CSV is `terrain/drNN`, the same key the tree uses.

use std::fmt::Write as _;

use crate::error::Result;
use crate::scoring::{grouped_reports, ScoreTree};

pub const SUMMARY_COLUMNS: [&str; 6] = ["Policy", "Score", "Tracking", "Safety", "Quality", "Level"];

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub score: Option<f64>,
    pub tracking: (f64, f64),
    pub safety: (f64, f64),
    pub quality: (f64, f64),
    pub level: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

/// One row per tree holding at least one scored cell.
pub fn summarize(trees: &[&ScoreTree]) -> Summary {
    let mut out = Summary::default();
    for tree in trees {
        let g = grouped_reports(tree);
        if g.cells == 0 {
            out.warnings.push(format!("{}: no scored cells", tree.meta.policy));
            continue;
        }
        if !tree.errors.is_empty() {
            out.warnings.push(format!(
                "{}: {} errored cell(s), score withheld",
                tree.meta.policy,
                tree.errors.len()
            ));
        }
        out.rows.push(SummaryRow {
            policy: tree.meta.policy.clone(),
            score: g.score,
            tracking: (g.tracking.mean, g.tracking.std),
            safety: (g.safety.mean, g.safety.std),
            quality: (g.quality.mean, g.quality.std),
            level: g.level,
        });
    }
    if out.rows.is_empty() && trees.is_empty() {
        out.warnings.push("no score trees given".into());
    }
    out
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), num)
}

fn pm((m, s): (f64, f64)) -> String {
    format!("{} ± {}", num(m), num(s))
}

/// Fixed-width table with a header line and one line per row.
pub fn render_table(summary: &Summary) -> String {
    let cells: Vec<[String; 6]> = summary
        .rows
        .iter()
        .map(|r| {
            [
                r.policy.clone(),
                opt(r.score),
                pm(r.tracking),
                pm(r.safety),
                pm(r.quality),
                format!("{:.2}", r.level),
            ]
        })
        .collect();
    let mut widths = SUMMARY_COLUMNS.map(|c| c.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |fields: &[String]| {
        let mut s = String::new();
        for (i, (f, w)) in fields.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let pad = w - f.chars().count();
            if i == 0 {
                s.push_str(f);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str(&" ".repeat(pad));
                s.push_str(f);
            }
        }
        s.trim_end().to_string()
    };
    let header: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut out = line(&header);
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Same numbers as [`render_table`], one column per value.
pub fn summary_csv(summary: &Summary) -> String {
    let mut out = String::from("policy,score,tracking,tracking_std,safety,safety_std,quality,quality_std,level\n");
    for r in &summary.rows {
        let score = r.score.map_or_else(String::new, num);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.2}",
            r.policy,
            score,
            num(r.tracking.0),
            num(r.tracking.1),
            num(r.safety.0),
            num(r.safety.1),
            num(r.quality.0),
            num(r.quality.1),
            r.level
        );
    }
    out
}

/// `terrain,score` rows for plotting the per-terrain radar.
pub fn radar_csv(tree: &ScoreTree) -> String {
    let mut out = String::from("terrain,score\n");
    for (kind, node) in &tree.terrains {
        let _ = writeln!(out, "{kind},{}", node.score.map_or_else(String::new, |s| format!("{s:.6}")));
    }
    out
}

/// One row per scored cell with its level, quality, score and metric vector.
pub fn cells_csv(tree: &ScoreTree) -> String {
    let mut out = String::from(
        "key,terrain,dr,friction,level,quality_level,quality,score,lin_trk,ang_trk,dof_power,dof_limits,orient,smooth\n",
    );
    for (kind, dr, cell) in tree.cells() {
        let m = cell.cell_vector.to_array();
        let _ = writeln!(
            out,
            "{kind}/{dr},{kind},{dr},{:.2},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            cell.dr.friction, cell.level, cell.quality_level, cell.quality, cell.score, m[0], m[1], m[2], m[3], m[4], m[5]
        );
    }
    for e in &tree.errors {
        let _ = writeln!(out, "{}/{},{},{},,,,,,,,,,,", e.terrain, e.dr, e.terrain, e.dr);
    }
    out
}

/// Writes tree JSON, summary table and CSVs into `dir`.
pub fn write_reports(tree: &ScoreTree, dir: &std::path::Path) -> Result<Summary> {
    std::fs::create_dir_all(dir)?;
    let summary = summarize(&[tree]);
    std::fs::write(dir.join("score_tree.json"), tree.to_json()?)?;
    std::fs::write(dir.join("summary.txt"), render_table(&summary))?;
    std::fs::write(dir.join("summary.csv"), summary_csv(&summary))?;
    std::fs::write(dir.join("radar.csv"), radar_csv(tree))?;
    std::fs::write(dir.join("cells.csv"), cells_csv(tree))?;
    Ok(summary)
}
