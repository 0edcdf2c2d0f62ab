//! Procedural terrain generation and height queries.
//!
//! Every terrain is a regular heightfield whose node `(ix, iy)` sits at
//! world position `(origin.x + ix * res, origin.y + iy * res)`. Heights are
//! stored as `f32` in row-major order with `x` as the row index, which is
//! also the layout of the binary export.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wave period in meters.
pub const WAVE_PERIOD: f64 = 1.6;
/// Stair tread depth in meters.
pub const STAIR_TREAD: f64 = 0.31;
/// Flat run before the first riser (and obstacle-free zone) in meters.
pub const SPAWN_APRON: f64 = 1.0;
/// Peak-to-peak amplitude of the rough-slope noise in meters.
pub const ROUGH_NOISE: f64 = 0.05;
/// Obstacle boxes placed per 8 m x 8 m of area.
pub const OBSTACLES_PER_TILE: f64 = 6.0;
const TILE_AREA: f64 = 64.0;

/// Height-scan window used for privileged observations: 11 x 17 samples
/// over 1.0 m (forward) by 1.6 m (lateral) at 0.1 m spacing.
pub const SCAN_ROWS: usize = 11;
pub const SCAN_COLS: usize = 17;
pub const SCAN_SPACING: f64 = 0.1;

const RGHF_MAGIC: &[u8; 4] = b"RGHF";
const RGHF_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    Flat,
    Wave,
    SlopeUp,
    SlopeDown,
    RoughSlope,
    StairsUp,
    StairsDown,
    Obstacle,
}

impl TerrainKind {
    pub const ALL: [TerrainKind; 8] = [
        TerrainKind::Flat,
        TerrainKind::Wave,
        TerrainKind::SlopeUp,
        TerrainKind::SlopeDown,
        TerrainKind::RoughSlope,
        TerrainKind::StairsUp,
        TerrainKind::StairsDown,
        TerrainKind::Obstacle,
    ];

    /// The seven evaluation configurations: ascent and descent count as
    /// separate environments, rough slope is a training-only terrain.
    pub const EVALUATION: [TerrainKind; 7] = [
        TerrainKind::Flat,
        TerrainKind::Wave,
        TerrainKind::SlopeUp,
        TerrainKind::SlopeDown,
        TerrainKind::StairsUp,
        TerrainKind::StairsDown,
        TerrainKind::Obstacle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TerrainKind::Flat => "flat",
            TerrainKind::Wave => "wave",
            TerrainKind::SlopeUp => "slope_up",
            TerrainKind::SlopeDown => "slope_down",
            TerrainKind::RoughSlope => "rough_slope",
            TerrainKind::StairsUp => "stairs_up",
            TerrainKind::StairsDown => "stairs_down",
            TerrainKind::Obstacle => "obstacle",
        }
    }
}

impl fmt::Display for TerrainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TerrainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TerrainKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "terrain kind",
                value: s.to_string(),
            })
    }
}

/// Wave amplitude `A = 0.4 d`.
pub fn wave_amplitude(d: f64) -> f64 {
    0.4 * d
}

/// Slope gradient `k = 0.07 + 0.5 d` (rise over run).
pub fn slope_gradient(d: f64) -> f64 {
    0.07 + 0.5 * d
}

/// Stair riser height; the ladder has a 1 cm jump between d = 0.4 and 0.5.
pub fn stair_step_height(d: f64) -> f64 {
    if d <= 0.4 + 1e-9 {
        0.05 + 0.3 * d
    } else {
        0.17 + 0.1 * (d - 0.4)
    }
}

/// Obstacle box height `h = 0.05 + 0.23 d`.
pub fn obstacle_height(d: f64) -> f64 {
    0.05 + 0.23 * d
}

/// Difficulty parameter of curriculum level `1..=10`.
pub fn difficulty_for_level(level: u8) -> f64 {
    f64::from(level) / 10.0
}

/// Nearest curriculum level for a difficulty parameter.
pub fn level_for_difficulty(d: f64) -> u8 {
    (d * 10.0).round().clamp(0.0, 10.0) as u8
}

/// Named geometric parameters of `kind` at difficulty `d`.
pub fn terrain_parameters(kind: TerrainKind, d: f64) -> Vec<(&'static str, f64)> {
    match kind {
        TerrainKind::Flat => vec![],
        TerrainKind::Wave => vec![("amplitude", wave_amplitude(d)), ("period", WAVE_PERIOD)],
        TerrainKind::SlopeUp | TerrainKind::SlopeDown => vec![("gradient", slope_gradient(d))],
        TerrainKind::RoughSlope => vec![("gradient", slope_gradient(d)), ("noise", ROUGH_NOISE)],
        TerrainKind::StairsUp | TerrainKind::StairsDown => {
            vec![("step_height", stair_step_height(d)), ("tread", STAIR_TREAD)]
        }
        TerrainKind::Obstacle => vec![("height", obstacle_height(d)), ("per_tile", OBSTACLES_PER_TILE)],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainSpec {
    pub kind: TerrainKind,
    pub difficulty: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub resolution_m: f64,
    pub seed: u64,
}

impl TerrainSpec {
    /// An 8 m x 8 m tile at 5 cm resolution.
    pub fn tile(kind: TerrainKind, difficulty: f64, seed: u64) -> Self {
        TerrainSpec {
            kind,
            difficulty,
            length_m: 8.0,
            width_m: 8.0,
            resolution_m: 0.05,
            seed,
        }
    }

    pub fn for_level(kind: TerrainKind, level: u8, seed: u64) -> Self {
        Self::tile(kind, difficulty_for_level(level), seed)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.difficulty;
        if !d.is_finite() || !(0.1 - 1e-9..=1.0 + 1e-9).contains(&d) {
            return Err(Error::param("difficulty", format!("{d} is outside [0.1, 1.0]")));
        }
        for (name, v) in [
            ("length_m", self.length_m),
            ("width_m", self.width_m),
            ("resolution_m", self.resolution_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    /// Grid dimensions `(rows along x, columns along y)`.
    pub fn grid_dims(&self) -> (usize, usize) {
        (
            (self.length_m / self.resolution_m).ceil() as usize,
            (self.width_m / self.resolution_m).ceil() as usize,
        )
    }

    pub fn level(&self) -> u8 {
        level_for_difficulty(self.difficulty)
    }
}

/// Planar pose of the robot base used for height scans.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heightfield {
    rows: usize,
    cols: usize,
    heights: Vec<f32>,
    pub origin: (f64, f64),
    pub resolution_m: f64,
    /// Generation recipe; absent for fields loaded from an export.
    pub spec: Option<TerrainSpec>,
}

/// Builds the heightfield described by `spec`. Pure in `(spec)`: the seed
/// only drives rough-slope noise and obstacle placement.
pub fn generate(spec: &TerrainSpec) -> Result<Heightfield> {
    spec.validate()?;
    let (rows, cols) = spec.grid_dims();
    let res = spec.resolution_m;
    let d = spec.difficulty;
    let mut heights = vec![0.0f32; rows * cols];
    let node = |i: usize| i as f64 * res;

    match spec.kind {
        TerrainKind::Flat => {}
        TerrainKind::Wave => {
            let a = wave_amplitude(d);
            for ix in 0..rows {
                for iy in 0..cols {
                    let z = a * (node(ix) / WAVE_PERIOD).sin() + a * (node(iy) / WAVE_PERIOD).cos();
                    heights[ix * cols + iy] = z as f32;
                }
            }
        }
        TerrainKind::SlopeUp | TerrainKind::SlopeDown | TerrainKind::RoughSlope => {
            let k = slope_gradient(d);
            let sign = if spec.kind == TerrainKind::SlopeDown { -1.0 } else { 1.0 };
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for ix in 0..rows {
                for iy in 0..cols {
                    let mut z = sign * k * (node(ix) - SPAWN_APRON).max(0.0);
                    if spec.kind == TerrainKind::RoughSlope {
                        z += rng.random_range(-0.5..=0.5) * ROUGH_NOISE;
                    }
                    heights[ix * cols + iy] = z as f32;
                }
            }
        }
        TerrainKind::StairsUp | TerrainKind::StairsDown => {
            let h = stair_step_height(d);
            let sign = if spec.kind == TerrainKind::StairsDown { -1.0 } else { 1.0 };
            for ix in 0..rows {
                let x = node(ix);
                let step = if x < SPAWN_APRON {
                    0.0
                } else {
                    ((x - SPAWN_APRON) / STAIR_TREAD).floor() + 1.0
                };
                let z = (sign * step * h) as f32;
                heights[ix * cols..(ix + 1) * cols].fill(z);
            }
        }
        TerrainKind::Obstacle => {
            let h = obstacle_height(d) as f32;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let count = (OBSTACLES_PER_TILE * spec.length_m * spec.width_m / TILE_AREA)
                .round()
                .max(1.0) as usize;
            for _ in 0..count {
                let wx: f64 = rng.random_range(1.0..=2.0);
                let wy: f64 = rng.random_range(1.0..=2.0);
                // keep boxes off the spawn apron
                let x_lo = SPAWN_APRON;
                let x_hi = (spec.length_m - wx).max(x_lo);
                let x0 = rng.random_range(x_lo..=x_hi);
                let y0 = rng.random_range(0.0..=(spec.width_m - wy).max(0.0));
                for ix in 0..rows {
                    let x = node(ix);
                    if x < x0 || x > x0 + wx {
                        continue;
                    }
                    for iy in 0..cols {
                        let y = node(iy);
                        if y >= y0 && y <= y0 + wy {
                            heights[ix * cols + iy] = h;
                        }
                    }
                }
            }
        }
    }

    Ok(Heightfield {
        rows,
        cols,
        heights,
        origin: (0.0, 0.0),
        resolution_m: res,
        spec: Some(spec.clone()),
    })
}

impl Heightfield {
    pub fn from_grid(
        rows: usize,
        cols: usize,
        heights: Vec<f32>,
        resolution_m: f64,
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::param("dims", "heightfield needs at least 2 x 2 nodes"));
        }
        if heights.len() != rows * cols {
            return Err(Error::Shape {
                what: "heightfield grid".into(),
                expected: format!("{}", rows * cols),
                found: format!("{}", heights.len()),
            });
        }
        if !(resolution_m.is_finite() && resolution_m > 0.0) {
            return Err(Error::param("resolution_m", "must be positive"));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::NonFinite("heightfield grid".into()));
        }
        Ok(Heightfield {
            rows,
            cols,
            heights,
            origin: (0.0, 0.0),
            resolution_m,
            spec: None,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn heights(&self) -> &[f32] {
        &self.heights
    }

    pub fn node(&self, ix: usize, iy: usize) -> f64 {
        f64::from(self.heights[ix * self.cols + iy])
    }

    pub fn kind(&self) -> Option<TerrainKind> {
        self.spec.as_ref().map(|s| s.kind)
    }

    /// World-space extent `(x_min, x_max, y_min, y_max)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let (ox, oy) = self.origin;
        (
            ox,
            ox + (self.rows - 1) as f64 * self.resolution_m,
            oy,
            oy + (self.cols - 1) as f64 * self.resolution_m,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, x1, y0, y1) = self.bounds();
        let eps = 1e-9;
        x >= x0 - eps && x <= x1 + eps && y >= y0 - eps && y <= y1 + eps
    }

    pub fn max_abs_height(&self) -> f64 {
        self.heights
            .iter()
            .fold(0.0f64, |m, &h| m.max(f64::from(h).abs()))
    }

    /// Bilinear height query; exact at grid nodes.
    pub fn height_at(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) || !self.contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        Ok(self.interpolate(x, y))
    }

    /// Height query that extends the border outward instead of failing.
    pub fn height_at_clamped(&self, x: f64, y: f64) -> f64 {
        let (x0, x1, y0, y1) = self.bounds();
        self.interpolate(x.clamp(x0, x1), y.clamp(y0, y1))
    }

    fn interpolate(&self, x: f64, y: f64) -> f64 {
        let fx = ((x - self.origin.0) / self.resolution_m).clamp(0.0, (self.rows - 1) as f64);
        let fy = ((y - self.origin.1) / self.resolution_m).clamp(0.0, (self.cols - 1) as f64);
        let ix = (fx.floor() as usize).min(self.rows - 2);
        let iy = (fy.floor() as usize).min(self.cols - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let h00 = self.node(ix, iy);
        let h10 = self.node(ix + 1, iy);
        let h01 = self.node(ix, iy + 1);
        let h11 = self.node(ix + 1, iy + 1);
        // exact node values survive the blend when tx, ty are 0
        if tx == 0.0 && ty == 0.0 {
            return h00;
        }
        let a = h00 + (h10 - h00) * tx;
        let b = h01 + (h11 - h01) * tx;
        a + (b - a) * ty
    }

    /// 11 x 17 heights around the base, row-major (forward rows, lateral
    /// columns), relative to the base height.
    pub fn sample_height_grid(&self, pose: &BasePose) -> Result<Vec<f64>> {
        let (s, c) = pose.yaw.sin_cos();
        let mut out = Vec::with_capacity(SCAN_ROWS * SCAN_COLS);
        for r in 0..SCAN_ROWS {
            let bx = (r as f64 - (SCAN_ROWS / 2) as f64) * SCAN_SPACING;
            for col in 0..SCAN_COLS {
                let by = (col as f64 - (SCAN_COLS / 2) as f64) * SCAN_SPACING;
                let wx = pose.x + c * bx - s * by;
                let wy = pose.y + s * bx + c * by;
                out.push(self.height_at(wx, wy)? - pose.z);
            }
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for ix in 0..self.rows {
            let row = &self.heights[ix * self.cols..(ix + 1) * self.cols];
            let line: Vec<String> = row.iter().map(|h| h.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Compact little-endian export: `RGHF`, u16 version, u32 rows,
    /// u32 cols, f64 resolution, then `rows * cols` f32 heights.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(RGHF_MAGIC)?;
        w.write_all(&RGHF_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows as u32).to_le_bytes())?;
        w.write_all(&(self.cols as u32).to_le_bytes())?;
        w.write_all(&self.resolution_m.to_le_bytes())?;
        for h in &self.heights {
            w.write_all(&h.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(22 + 4 * self.heights.len());
        self.write_binary(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != RGHF_MAGIC {
            return Err(Error::format("RGHF", "bad magic"));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != RGHF_VERSION {
            return Err(Error::format("RGHF", format!("unsupported version {version}")));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let rows = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let cols = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let resolution = f64::from_le_bytes(b8);
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::format("RGHF", "dimension overflow"))?;
        let mut raw = vec![0u8; n * 4];
        r.read_exact(&mut raw)?;
        let heights = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Heightfield::from_grid(rows, cols, heights, resolution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: TerrainKind, d: f64) -> TerrainSpec {
        TerrainSpec {
            kind,
            difficulty: d,
            length_m: 8.0,
            width_m: 4.0,
            resolution_m: 0.1,
            seed: 7,
        }
    }

    #[test]
    fn wave_peak_at_origin() {
        let hf = generate(&small(TerrainKind::Wave, 1.0)).unwrap();
        assert!((hf.height_at(0.0, 0.0).unwrap() - 0.4).abs() < 1e-6);
    }

    #[test]
    fn flat_is_zero() {
        for d in [0.1, 0.5, 1.0] {
            let hf = generate(&small(TerrainKind::Flat, d)).unwrap();
            assert!(hf.heights().iter().all(|&h| h == 0.0));
        }
    }

    #[test]
    fn stair_heights_match_ladder_ends() {
        assert!((stair_step_height(0.1) - 0.08).abs() < 1e-12);
        assert!((stair_step_height(1.0) - 0.23).abs() < 1e-12);
        assert!((stair_step_height(0.4) - 0.17).abs() < 1e-12);
        assert!((stair_step_height(0.5) - 0.18).abs() < 1e-12);
    }

    #[test]
    fn stairs_have_apron_and_treads() {
        let hf = generate(&small(TerrainKind::StairsUp, 0.4)).unwrap();
        assert_eq!(hf.height_at(0.5, 1.0).unwrap(), 0.0);
        let first = hf.height_at(1.1, 1.0).unwrap();
        assert!((first - 0.17).abs() < 1e-6);
        let down = generate(&small(TerrainKind::StairsDown, 0.4)).unwrap();
        assert!((down.height_at(1.1, 1.0).unwrap() + 0.17).abs() < 1e-6);
    }

    #[test]
    fn obstacle_height_at_max_difficulty() {
        let hf = generate(&small(TerrainKind::Obstacle, 1.0)).unwrap();
        assert!((hf.max_abs_height() - 0.28).abs() < 1e-6);
        // spawn apron stays clear
        for iy in 0..hf.dims().1 {
            for ix in 0..10 {
                assert_eq!(hf.node(ix, iy), 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small(TerrainKind::Flat, 0.5);
        s.resolution_m = 0.0;
        assert!(generate(&s).is_err());
        let mut s = small(TerrainKind::Flat, 0.5);
        s.length_m = -1.0;
        assert!(generate(&s).is_err());
        assert!(generate(&small(TerrainKind::Wave, 1.5)).is_err());
        assert!("lava".parse::<TerrainKind>().is_err());
    }

    #[test]
    fn grid_dims_use_ceiling() {
        let s = TerrainSpec {
            length_m: 1.05,
            width_m: 0.95,
            resolution_m: 0.1,
            ..small(TerrainKind::Flat, 0.5)
        };
        assert_eq!(s.grid_dims(), (11, 10));
    }

    #[test]
    fn bilinear_node_and_midpoint() {
        let hf = Heightfield::from_grid(2, 2, vec![0.0, 0.0, 0.1, 0.1], 1.0).unwrap();
        assert_eq!(hf.height_at(1.0, 0.0).unwrap(), f64::from(0.1f32));
        let mid = hf.height_at(0.5, 0.3).unwrap();
        assert!((mid - 0.05).abs() < 1e-7);
        assert!(matches!(hf.height_at(1.5, 0.0), Err(Error::OutOfBounds { .. })));
        assert_eq!(hf.height_at_clamped(5.0, 0.0), f64::from(0.1f32));
    }

    #[test]
    fn wave_interpolation_tracks_closed_form() {
        let hf = generate(&small(TerrainKind::Wave, 0.5)).unwrap();
        let a = wave_amplitude(0.5);
        for &(x, y) in &[(0.37, 1.23), (3.17, 2.77), (6.66, 0.05), (5.55, 3.33)] {
            let analytic = a * (x / WAVE_PERIOD).sin() + a * (y / WAVE_PERIOD).cos();
            assert!((hf.height_at(x, y).unwrap() - analytic).abs() < 1e-3);
        }
    }

    #[test]
    fn scan_on_flat_and_slope() {
        let hf = generate(&small(TerrainKind::Flat, 0.3)).unwrap();
        let pose = BasePose { x: 2.0, y: 2.0, z: 0.38, yaw: 0.0 };
        let scan = hf.sample_height_grid(&pose).unwrap();
        assert_eq!(scan.len(), 187);
        assert!(scan.iter().all(|&h| (h + 0.38).abs() < 1e-12));

        let slope = generate(&small(TerrainKind::SlopeUp, 0.5)).unwrap();
        let scan = slope.sample_height_grid(&BasePose { z: 0.0, ..pose }).unwrap();
        for r in 1..SCAN_ROWS {
            let step = scan[r * SCAN_COLS] - scan[(r - 1) * SCAN_COLS];
            assert!((step - 0.032).abs() < 1e-5, "step {step}");
        }
        let far = BasePose { x: 7.9, ..pose };
        assert!(slope.sample_height_grid(&far).is_err());
    }

    #[test]
    fn binary_roundtrip_and_bad_magic() {
        let hf = generate(&small(TerrainKind::RoughSlope, 0.7)).unwrap();
        let bytes = hf.to_binary();
        assert_eq!(&bytes[..4], b"RGHF");
        let back = Heightfield::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.heights(), hf.heights());
        assert_eq!(back.dims(), hf.dims());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Heightfield::read_binary(bad.as_slice()).is_err());
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let hf = generate(&small(TerrainKind::Flat, 0.3)).unwrap();
        let mut out = Vec::new();
        hf.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), hf.dims().0);
        assert_eq!(text.lines().next().unwrap().split(',').count(), hf.dims().1);
    }
}
