//! Latent recording and a two-component PCA projection.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terrain::TerrainKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentRow {
    pub time: f64,
    pub terrain: Option<TerrainKind>,
    pub command_id: u32,
    pub gate: Vec<f64>,
    pub z: Vec<f64>,
}

/// Collects `(z_s, ω)` per control step while enabled.
#[derive(Clone, Debug)]
pub struct LatentRecorder {
    pub enabled: bool,
    num_experts: usize,
    latent_dim: usize,
    rows: Vec<LatentRow>,
}

impl LatentRecorder {
    pub fn new(enabled: bool, num_experts: usize, latent_dim: usize) -> Self {
        LatentRecorder {
            enabled,
            num_experts,
            latent_dim,
            rows: Vec::new(),
        }
    }

    pub fn record(&mut self, row: LatentRow) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if row.gate.len() != self.num_experts || row.z.len() != self.latent_dim {
            return Err(Error::Shape {
                what: "latent row".into(),
                expected: format!("{} gate + {} latent", self.num_experts, self.latent_dim),
                found: format!("{} gate + {} latent", row.gate.len(), row.z.len()),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[LatentRow] {
        &self.rows
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["timestamp".to_string(), "terrain".into(), "command_id".into()];
        cols.extend((1..=self.num_experts).map(|k| format!("w_{k}")));
        cols.extend((1..=self.latent_dim).map(|k| format!("z_{k}")));
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header())?;
        for r in &self.rows {
            let terrain = r.terrain.map_or("", |t| t.as_str());
            write!(w, "{},{},{}", r.time, terrain, r.command_id)?;
            for v in r.gate.iter().chain(&r.z) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Latent vectors as rows.
    pub fn latent_matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.z.clone()).collect()
    }

    /// Parses a file written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Empty("latent csv"))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[..3] != ["timestamp", "terrain", "command_id"] {
            return Err(Error::format("latent csv", "unexpected header"));
        }
        let k = cols.iter().filter(|c| c.starts_with("w_")).count();
        let d = cols.iter().filter(|c| c.starts_with("z_")).count();
        if 3 + k + d != cols.len() {
            return Err(Error::format("latent csv", "unexpected columns"));
        }
        let mut rec = LatentRecorder::new(true, k, d);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != cols.len() {
                return Err(Error::format("latent csv", format!("row {} has {} fields", i + 1, f.len())));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::format("latent csv", format!("row {}: bad number `{s}`", i + 1)))
            };
            let values: Vec<f64> = f[3..].iter().map(|s| num(s)).collect::<Result<_>>()?;
            rec.record(LatentRow {
                time: num(f[0])?,
                terrain: if f[1].is_empty() { None } else { Some(f[1].parse()?) },
                command_id: f[2]
                    .parse()
                    .map_err(|_| Error::format("latent csv", format!("row {}: bad command id", i + 1)))?,
                gate: values[..k].to_vec(),
                z: values[k..].to_vec(),
            })?;
        }
        Ok(rec)
    }
}

/// Projects rows onto the two leading principal axes.
///
/// Axes are oriented so their first nonzero loading is positive. Input with
/// no variance projects to zeros.
pub fn pca_project(rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::param("latents", format!("need at least 2 rows, got {n}")));
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::Empty("latent dimension"));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::Shape {
            what: format!("latent row {bad}"),
            expected: d.to_string(),
            found: rows[bad].len().to_string(),
        });
    }
    for r in rows {
        crate::error::ensure_finite("latents", r)?;
    }
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let total: f64 = cov.diagonal().iter().sum();
    if !(total > f64::MIN_POSITIVE) {
        return Ok(vec![[0.0; 2]; n]);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut axes = Vec::with_capacity(2);
    for &k in order.iter().take(2) {
        if eig.eigenvalues[k] <= scale * 1e-12 {
            axes.push(None);
            continue;
        }
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        axes.push(Some(v));
    }
    axes.resize(2, None);
    Ok((0..n)
        .map(|i| {
            let row = centered.row(i);
            let mut out = [0.0; 2];
            for (slot, axis) in out.iter_mut().zip(&axes) {
                if let Some(v) = axis {
                    *slot = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                }
            }
            out
        })
        .collect())
}
