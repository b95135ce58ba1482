use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{ceil, floor, log2};
use crate::{Error, Result};

/// Absolute tolerance used when deciding whether two points coincide.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// Compact state spaces the estimators know how to work with.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum StateSpace {
    /// `ℝ/ℤ` with the quotient metric, points in `[0, 1)`.
    Circle,
    /// `[0, 1]` with the usual metric.
    Interval,
    /// `[0, 1]^dim` with the sup metric. Coordinates do not wrap.
    Torus { dim: usize },
    /// One-sided sequences over `alphabet` symbols, stored truncated to `length`.
    Symbolic { alphabet: usize, length: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Point {
    Real(f64),
    Vector(Vec<f64>),
    Symbols(Vec<u8>),
}

impl Point {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_symbols(&self) -> Option<&[u8]> {
        match self {
            Point::Symbols(s) => Some(s),
            _ => None,
        }
    }
}

impl StateSpace {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpace::Torus { dim: 0 } => {
                Err(Error::InvalidSpace("torus dimension must be at least 1".into()))
            }
            StateSpace::Symbolic { alphabet, length } => {
                if !(2..=256).contains(&alphabet) {
                    return Err(Error::InvalidSpace(format!(
                        "alphabet size must be in 2..=256, got {alphabet}"
                    )));
                }
                if length == 0 {
                    return Err(Error::InvalidSpace("truncation length must be at least 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Number of real coordinates (0 for symbolic spaces).
    pub fn dim(&self) -> usize {
        match *self {
            StateSpace::Circle | StateSpace::Interval => 1,
            StateSpace::Torus { dim } => dim,
            StateSpace::Symbolic { .. } => 0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            StateSpace::Circle => 0.5,
            _ => 1.0,
        }
    }

    /// True when the base metric (and hence every word-maximal metric built
    /// from shifts) satisfies the strong triangle inequality.
    pub fn is_ultrametric(&self) -> bool {
        matches!(self, StateSpace::Symbolic { .. })
    }

    pub fn contains(&self, p: &Point) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidPoint(msg));
        match (self, p) {
            (StateSpace::Circle, Point::Real(x)) => {
                if x.is_finite() && (0.0..1.0).contains(x) {
                    Ok(())
                } else {
                    bad(format!("{x} is not in [0, 1)"))
                }
            }
            (StateSpace::Interval, Point::Real(x)) => {
                if x.is_finite() && (0.0..=1.0).contains(x) {
                    Ok(())
                } else {
                    bad(format!("{x} is not in [0, 1]"))
                }
            }
            (StateSpace::Torus { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return bad(format!("expected {dim} coordinates, got {}", v.len()));
                }
                if v.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c)) {
                    Ok(())
                } else {
                    bad(format!("{v:?} is not in the unit cube"))
                }
            }
            (StateSpace::Symbolic { alphabet, length }, Point::Symbols(s)) => {
                if s.len() != *length {
                    return bad(format!("expected {length} symbols, got {}", s.len()));
                }
                if let Some(c) = s.iter().find(|&&c| c as usize >= *alphabet) {
                    return bad(format!("symbol {c} outside alphabet of size {alphabet}"));
                }
                Ok(())
            }
            _ => bad(format!("{p:?} has the wrong shape for {self:?}")),
        }
    }

    /// The base metric `d`.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match (a, b) {
            (Point::Real(x), Point::Real(y)) => match self {
                StateSpace::Circle => {
                    let d = (x - y).abs() % 1.0;
                    d.min(1.0 - d)
                }
                _ => (x - y).abs(),
            },
            (Point::Vector(x), Point::Vector(y)) => x
                .iter()
                .zip(y)
                .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs())),
            (Point::Symbols(x), Point::Symbols(y)) => symbolic_distance(x, y),
            _ => f64::INFINITY,
        }
    }

    pub fn same_point(&self, a: &Point, b: &Point) -> bool {
        self.distance(a, b) <= POINT_TOLERANCE
    }

    /// Cell key used by the orbit index. Two points at distance `≤ radius`
    /// land either in the same cell or in cells listed by [`Self::neighbor_keys`].
    pub(crate) fn cell_key(&self, p: &Point, radius: f64) -> u64 {
        match (self, p) {
            (StateSpace::Symbolic { length, .. }, Point::Symbols(s)) => {
                symbol_prefix_hash(&s[..prefix_len(radius, *length)])
            }
            (_, Point::Real(x)) => {
                let cells = cell_count(radius);
                real_cell(*x, cells)
            }
            (_, Point::Vector(v)) => {
                let cells = cell_count(radius);
                let coords: Vec<u64> = v.iter().map(|c| real_cell(*c, cells)).collect();
                combine_coords(&coords, cells)
            }
            _ => 0,
        }
    }

    /// Keys of every cell that may hold a point within `radius` of `p`,
    /// including the cell of `p` itself.
    pub(crate) fn neighbor_keys(&self, p: &Point, radius: f64) -> Vec<u64> {
        match (self, p) {
            (StateSpace::Symbolic { .. }, _) => vec![self.cell_key(p, radius)],
            (_, Point::Real(x)) => {
                let cells = cell_count(radius);
                real_neighbors(real_cell(*x, cells), cells, matches!(self, StateSpace::Circle))
            }
            (_, Point::Vector(v)) => {
                let cells = cell_count(radius);
                let per_axis: Vec<Vec<u64>> = v
                    .iter()
                    .map(|c| real_neighbors(real_cell(*c, cells), cells, false))
                    .collect();
                let mut out = Vec::new();
                let mut pick = vec![0usize; per_axis.len()];
                loop {
                    let coords: Vec<u64> =
                        pick.iter().zip(&per_axis).map(|(i, axis)| axis[*i]).collect();
                    out.push(combine_coords(&coords, cells));
                    let mut k = 0;
                    loop {
                        if k == pick.len() {
                            return out;
                        }
                        pick[k] += 1;
                        if pick[k] < per_axis[k].len() {
                            break;
                        }
                        pick[k] = 0;
                        k += 1;
                    }
                }
            }
            _ => vec![0],
        }
    }
}

fn symbolic_distance(x: &[u8], y: &[u8]) -> f64 {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(i) => libm::exp2(-(i as f64)),
        None => 0.0,
    }
}

/// Number of leading symbols shared by any two points within `radius`.
fn prefix_len(radius: f64, length: usize) -> usize {
    if radius >= 1.0 {
        return 0;
    }
    let k = ceil(log2(1.0 / radius) - 1e-9).max(0.0) as usize;
    k.min(length)
}

fn cell_count(radius: f64) -> u64 {
    // slightly wider cells than the radius so that rounding never splits a pair by two cells
    let c = floor(1.0 / (radius * (1.0 + 1e-9)));
    if c < 1.0 {
        1
    } else if c > 1e15 {
        1_000_000_000_000_000
    } else {
        c as u64
    }
}

fn real_cell(x: f64, cells: u64) -> u64 {
    let c = floor(x * cells as f64);
    if c < 0.0 {
        0
    } else {
        (c as u64).min(cells - 1)
    }
}

fn real_neighbors(c: u64, cells: u64, wrap: bool) -> Vec<u64> {
    if wrap {
        if cells < 3 {
            return (0..cells).collect();
        }
        return vec![(c + cells - 1) % cells, c, (c + 1) % cells];
    }
    let lo = c.saturating_sub(1);
    let hi = (c + 1).min(cells - 1);
    (lo..=hi).collect()
}

fn combine_coords(coords: &[u64], cells: u64) -> u64 {
    coords
        .iter()
        .fold(0u64, |acc, &c| acc.wrapping_mul(cells.wrapping_add(1)).wrapping_add(c))
}

fn symbol_prefix_hash(s: &[u8]) -> u64 {
    // FNV-1a; collisions only add false candidates to index queries
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &c in s {
        h ^= c as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ (s.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_distance_examples() {
        let c = StateSpace::Circle;
        assert!((c.distance(&Point::Real(0.1), &Point::Real(0.9)) - 0.2).abs() < 1e-12);
        let t = StateSpace::Torus { dim: 2 };
        let d = t.distance(&Point::Vector(vec![0.1, 0.4]), &Point::Vector(vec![0.3, 0.45]));
        assert!((d - 0.2).abs() < 1e-12);
        let s = StateSpace::Symbolic { alphabet: 2, length: 4 };
        let d = s.distance(&Point::Symbols(vec![0, 1, 0, 0]), &Point::Symbols(vec![0, 1, 1, 0]));
        assert_eq!(d, 0.25);
        assert_eq!(s.distance(&Point::Symbols(vec![1; 4]), &Point::Symbols(vec![1; 4])), 0.0);
    }

    #[test]
    fn diameters() {
        assert_eq!(StateSpace::Circle.diameter(), 0.5);
        assert_eq!(StateSpace::Interval.diameter(), 1.0);
        assert_eq!(StateSpace::Symbolic { alphabet: 3, length: 5 }.diameter(), 1.0);
    }

    #[test]
    fn membership_checks() {
        assert!(StateSpace::Circle.contains(&Point::Real(1.0)).is_err());
        assert!(StateSpace::Interval.contains(&Point::Real(1.0)).is_ok());
        let s = StateSpace::Symbolic { alphabet: 2, length: 3 };
        assert!(s.contains(&Point::Symbols(vec![0, 2, 1])).is_err());
        assert!(s.contains(&Point::Symbols(vec![0, 1])).is_err());
        assert!(StateSpace::Symbolic { alphabet: 1, length: 3 }.validate().is_err());
        assert!(StateSpace::Torus { dim: 0 }.validate().is_err());
    }

    #[test]
    fn close_points_share_or_neighbor_cells() {
        let c = StateSpace::Circle;
        let r = 0.01;
        for &(a, b) in &[(0.005, 0.996), (0.3, 0.309_999), (0.5, 0.509)] {
            let (pa, pb) = (Point::Real(a), Point::Real(b));
            assert!(c.distance(&pa, &pb) <= r);
            assert!(c.neighbor_keys(&pa, r).contains(&c.cell_key(&pb, r)));
        }
        let s = StateSpace::Symbolic { alphabet: 2, length: 6 };
        let (x, y) = (Point::Symbols(vec![0, 1, 1, 0, 0, 0]), Point::Symbols(vec![0, 1, 1, 1, 0, 0]));
        assert!(s.distance(&x, &y) <= 0.125);
        assert_eq!(s.cell_key(&x, 0.125), s.cell_key(&y, 0.125));
        let t = StateSpace::Torus { dim: 2 };
        let (p, q) = (Point::Vector(vec![0.2, 0.3]), Point::Vector(vec![0.21, 0.29]));
        assert!(t.neighbor_keys(&p, 0.02).contains(&t.cell_key(&q, 0.02)));
        assert_eq!(t.neighbor_keys(&p, 0.02).len(), 9);
    }
}
