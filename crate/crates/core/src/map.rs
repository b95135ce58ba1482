use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Point, Result, StateSpace};

/// Generator maps with exact (floating point) evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MapKind {
    /// `x ↦ a·x + b mod 1` on the circle.
    AffineMod1 { slope: i64, offset: f64 },
    /// Piece `i` covers `[breakpoints[i], breakpoints[i+1])` and maps
    /// `x ↦ left_values[i] + slopes[i]·(x − breakpoints[i])`.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        left_values: Vec<f64>,
    },
    /// `x ↦ A·x + b` on the unit cube.
    AffineContraction { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Left shift on symbol strings; the vacated last slot receives `fill`.
    Shift { fill: u8 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MapSpec {
    pub kind: MapKind,
    /// Declared Lipschitz constant, used by search heuristics only.
    pub lipschitz: f64,
}

impl MapSpec {
    pub fn affine_mod1(slope: i64, offset: f64) -> Self {
        MapSpec {
            kind: MapKind::AffineMod1 { slope, offset },
            lipschitz: slope.unsigned_abs() as f64,
        }
    }

    /// Piecewise-linear map; the declared Lipschitz constant defaults to the largest |slope|.
    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>, left_values: Vec<f64>) -> Self {
        let lipschitz = slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        MapSpec {
            kind: MapKind::PiecewiseLinear { breakpoints, slopes, left_values },
            lipschitz,
        }
    }

    /// Continuous piecewise-linear map starting at `f(0) = start`.
    pub fn continuous_piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>, start: f64) -> Self {
        let mut left_values = Vec::with_capacity(slopes.len());
        let mut v = start;
        for (i, s) in slopes.iter().enumerate() {
            left_values.push(v);
            if let (Some(a), Some(b)) = (breakpoints.get(i), breakpoints.get(i + 1)) {
                v += s * (b - a);
            }
        }
        Self::piecewise_linear(breakpoints, slopes, left_values)
    }

    pub fn affine_contraction(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Self {
        let lipschitz = inf_norm(&matrix);
        MapSpec {
            kind: MapKind::AffineContraction { matrix, offset },
            lipschitz,
        }
    }

    pub fn shift(fill: u8) -> Self {
        MapSpec { kind: MapKind::Shift { fill }, lipschitz: 2.0 }
    }

    /// A Lipschitz constant that follows from the map's definition, if one
    /// exists. Exact searches prune with this bound, never with the declared one.
    pub fn certified_lipschitz(&self) -> Option<f64> {
        match &self.kind {
            MapKind::AffineMod1 { slope, .. } => Some(slope.unsigned_abs() as f64),
            MapKind::Shift { .. } => Some(2.0),
            MapKind::AffineContraction { matrix, .. } => Some(inf_norm(matrix)),
            MapKind::PiecewiseLinear { breakpoints, slopes, left_values } => {
                let continuous = (1..slopes.len()).all(|i| {
                    left_values[i - 1] + slopes[i - 1] * (breakpoints[i] - breakpoints[i - 1]) == left_values[i]
                });
                continuous.then(|| slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs())))
            }
        }
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    /// Checks that the map sends `space` into itself and that the declared
    /// Lipschitz constant dominates the observed one on a deterministic set of pairs.
    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        if !(self.lipschitz.is_finite() && self.lipschitz > 0.0) {
            return Err(Error::InvalidMap(format!(
                "declared Lipschitz constant must be positive and finite, got {}",
                self.lipschitz
            )));
        }
        match (&self.kind, space) {
            (MapKind::AffineMod1 { slope, offset }, StateSpace::Circle) => {
                if *slope == 0 {
                    return Err(Error::InvalidMap("affine-mod-1 slope must satisfy |a| ≥ 1".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::InvalidMap("affine-mod-1 offset must be finite".into()));
                }
            }
            (MapKind::PiecewiseLinear { breakpoints, slopes, left_values }, StateSpace::Interval) => {
                validate_piecewise(breakpoints, slopes, left_values)?
            }
            (MapKind::AffineContraction { matrix, offset }, StateSpace::Torus { dim }) => {
                validate_contraction(matrix, offset, *dim)?
            }
            (MapKind::Shift { fill }, StateSpace::Symbolic { alphabet, .. }) => {
                if *fill as usize >= *alphabet {
                    return Err(Error::InvalidMap(format!(
                        "fill symbol {fill} outside alphabet of size {alphabet}"
                    )));
                }
            }
            (kind, space) => {
                return Err(Error::InvalidMap(format!("{kind:?} is not defined on {space:?}")));
            }
        }
        self.check_lipschitz(space)
    }

    fn check_lipschitz(&self, space: &StateSpace) -> Result<()> {
        let pairs = sample_pairs(space);
        let mut worst = 0.0_f64;
        for (x, y) in &pairs {
            let d = space.distance(x, y);
            if d <= 1e-9 {
                continue;
            }
            let fd = space.distance(&self.apply(space, x), &self.apply(space, y));
            worst = worst.max(fd / d);
        }
        if worst > self.lipschitz * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidMap(format!(
                "declared Lipschitz constant {} is below the observed ratio {worst}",
                self.lipschitz
            )));
        }
        Ok(())
    }

    /// Evaluates the map. The point must be valid for `space`.
    pub fn apply(&self, space: &StateSpace, p: &Point) -> Point {
        match (&self.kind, p) {
            (MapKind::AffineMod1 { slope, offset }, Point::Real(x)) => {
                Point::Real(reduce_mod1(*slope as f64 * x + offset))
            }
            (MapKind::PiecewiseLinear { breakpoints, slopes, left_values }, Point::Real(x)) => {
                let k = slopes.len();
                // right-limit branch at breakpoints: largest i with b_i ≤ x
                let i = breakpoints[..k].partition_point(|b| *b <= *x).saturating_sub(1);
                let v = left_values[i] + slopes[i] * (x - breakpoints[i]);
                Point::Real(v.clamp(0.0, 1.0))
            }
            (MapKind::AffineContraction { matrix, offset }, Point::Vector(v)) => Point::Vector(
                matrix
                    .iter()
                    .zip(offset)
                    .map(|(row, b)| {
                        let s: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>() + b;
                        s.clamp(0.0, 1.0)
                    })
                    .collect(),
            ),
            (MapKind::Shift { fill }, Point::Symbols(s)) => {
                let mut out = Vec::with_capacity(s.len());
                out.extend_from_slice(&s[1.min(s.len())..]);
                if !s.is_empty() {
                    out.push(*fill);
                }
                Point::Symbols(out)
            }
            _ => {
                debug_assert!(false, "map {:?} applied to {:?} on {:?}", self.kind, p, space);
                p.clone()
            }
        }
    }
}

pub(crate) fn reduce_mod1(v: f64) -> f64 {
    let r = v - libm::floor(v);
    if !(0.0..1.0).contains(&r) {
        0.0
    } else {
        r
    }
}

fn inf_norm(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .map(|row| row.iter().map(|a| a.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn validate_piecewise(b: &[f64], slopes: &[f64], left: &[f64]) -> Result<()> {
    let k = slopes.len();
    if k == 0 || b.len() != k + 1 || left.len() != k {
        return Err(Error::InvalidMap(format!(
            "piecewise-linear map needs k+1 breakpoints and k slopes/values, got {} / {} / {}",
            b.len(),
            slopes.len(),
            left.len()
        )));
    }
    if b[0] != 0.0 || b[k] != 1.0 || b.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidMap(
            "breakpoints must increase strictly from 0 to 1".into(),
        ));
    }
    for i in 0..k {
        let lo = left[i];
        let hi = left[i] + slopes[i] * (b[i + 1] - b[i]);
        for v in [lo, hi] {
            if !v.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::InvalidMap(format!(
                    "piece {i} leaves [0, 1] (endpoint value {v})"
                )));
            }
        }
    }
    Ok(())
}

fn validate_contraction(matrix: &[Vec<f64>], offset: &[f64], dim: usize) -> Result<()> {
    if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) || offset.len() != dim {
        return Err(Error::InvalidMap(format!(
            "affine contraction must be {dim}×{dim} with a length-{dim} offset"
        )));
    }
    let norm = inf_norm(matrix);
    if !(norm < 1.0) {
        return Err(Error::InvalidMap(format!("operator norm {norm} is not below 1")));
    }
    // the cube is convex, so checking its vertices is enough
    for mask in 0u64..(1u64 << dim.min(20)) {
        for (row, b) in matrix.iter().zip(offset) {
            let v: f64 = row
                .iter()
                .enumerate()
                .map(|(j, a)| if mask >> j & 1 == 1 { *a } else { 0.0 })
                .sum::<f64>()
                + b;
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::InvalidMap(format!(
                    "affine contraction sends a cube vertex to coordinate {v}"
                )));
            }
        }
    }
    Ok(())
}

fn sample_pairs(space: &StateSpace) -> Vec<(Point, Point)> {
    let mut pairs = Vec::new();
    match space {
        StateSpace::Circle | StateSpace::Interval => {
            let top = if matches!(space, StateSpace::Circle) { 0.999_999 } else { 1.0 };
            for i in 0..=256 {
                let x = (i as f64 / 256.0 * 0.987_654_321 + 0.001_234_5).min(top);
                for h in [1e-6, 1e-3, 0.037, 0.21] {
                    let y = x + h;
                    if y <= top {
                        pairs.push((Point::Real(x), Point::Real(y)));
                    }
                }
            }
        }
        StateSpace::Torus { dim } => {
            for i in 0..128 {
                let t = i as f64 / 128.0;
                let x: Vec<f64> = (0..*dim).map(|j| frac(t * (j as f64 + 1.618) + 0.1)).collect();
                for h in [1e-4, 0.05] {
                    let y: Vec<f64> = x
                        .iter()
                        .enumerate()
                        .map(|(j, c)| (c + h * if j % 2 == 0 { 1.0 } else { -1.0 }).clamp(0.0, 1.0))
                        .collect();
                    pairs.push((Point::Vector(x.clone()), Point::Vector(y)));
                }
            }
        }
        StateSpace::Symbolic { alphabet, length } => {
            let k = *alphabet as u64;
            for seed in 0..64u64 {
                let x: Vec<u8> = (0..*length)
                    .map(|i| ((seed.wrapping_mul(2_654_435_761) >> (i % 29)) % k) as u8)
                    .collect();
                for cut in [0usize, 1, 2, length / 2, length.saturating_sub(1)] {
                    if cut >= *length {
                        continue;
                    }
                    let mut y = x.clone();
                    y[cut] = ((y[cut] as u64 + 1) % k) as u8;
                    pairs.push((Point::Symbols(x.clone()), Point::Symbols(y)));
                }
            }
        }
    }
    pairs
}

fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}
