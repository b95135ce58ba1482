use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Point, Result, StateSpace, POINT_TOLERANCE};

/// A finite stand-in for a subset of the state space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleSet {
    points: Vec<Point>,
    /// Declared density: every point of the intended set is within this distance of a sample point.
    density: f64,
}

impl SampleSet {
    pub fn empty() -> Self {
        SampleSet { points: Vec::new(), density: 0.0 }
    }

    /// Validates membership and rejects near-duplicates.
    pub fn from_points(space: &StateSpace, points: Vec<Point>, density: f64) -> Result<Self> {
        for p in &points {
            space.contains(p)?;
        }
        if let Some((i, j)) = find_duplicate(space, &points) {
            return Err(Error::InvalidArgument(format!(
                "sample points {i} and {j} coincide within {POINT_TOLERANCE}"
            )));
        }
        Ok(SampleSet { points, density })
    }

    /// Uniform grid with `per_axis` points per coordinate.
    pub fn grid(space: &StateSpace, per_axis: usize) -> Result<Self> {
        if per_axis == 0 {
            return Err(Error::InvalidArgument("grid needs at least one point per axis".into()));
        }
        match space {
            StateSpace::Circle => {
                let pts = (0..per_axis).map(|i| Point::Real(i as f64 / per_axis as f64)).collect();
                Ok(SampleSet { points: pts, density: 0.5 / per_axis as f64 })
            }
            StateSpace::Interval => {
                let pts = axis(per_axis).into_iter().map(Point::Real).collect();
                Ok(SampleSet { points: pts, density: axis_density(per_axis) })
            }
            StateSpace::Torus { dim } => {
                let ax = axis(per_axis);
                let total = per_axis.checked_pow(*dim as u32).ok_or_else(|| {
                    Error::InvalidArgument("grid size overflows".into())
                })?;
                let mut pts = Vec::with_capacity(total);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut v = Vec::with_capacity(*dim);
                    for _ in 0..*dim {
                        v.push(ax[rem % per_axis]);
                        rem /= per_axis;
                    }
                    pts.push(Point::Vector(v));
                }
                Ok(SampleSet { points: pts, density: axis_density(per_axis) })
            }
            StateSpace::Symbolic { .. } => Err(Error::InvalidArgument(
                "use cylinder representatives for symbolic spaces".into(),
            )),
        }
    }

    /// `count` evenly spaced points of the arc/segment `[a, a + len)` (circle coordinates wrap).
    pub fn segment(space: &StateSpace, a: f64, len: f64, count: usize) -> Result<Self> {
        if count == 0 || !(len > 0.0) {
            return Err(Error::InvalidArgument("segment needs a positive length and count".into()));
        }
        let step = len / count as f64;
        let pts = (0..count)
            .map(|i| {
                let x = a + i as f64 * step;
                Point::Real(match space {
                    StateSpace::Circle => crate::map::reduce_mod1(x),
                    _ => x,
                })
            })
            .collect();
        Self::from_points(space, pts, step / 2.0)
    }

    /// One representative for every cylinder of length `len` (extending one of
    /// `prefixes` when given), padded to the stored length with `fill`.
    pub fn cylinder_reps(
        space: &StateSpace,
        len: usize,
        prefixes: Option<&[Vec<u8>]>,
        fill: u8,
    ) -> Result<Self> {
        let (k, total) = match *space {
            StateSpace::Symbolic { alphabet, length } => (alphabet, length),
            _ => {
                return Err(Error::InvalidArgument(
                    "cylinder representatives need a symbolic space".into(),
                ))
            }
        };
        if len > total {
            return Err(Error::InvalidArgument(format!(
                "cylinder length {len} exceeds stored length {total}"
            )));
        }
        if fill as usize >= k {
            return Err(Error::InvalidArgument(format!("fill symbol {fill} outside alphabet")));
        }
        let roots: Vec<Vec<u8>> = match prefixes {
            None => vec![Vec::new()],
            Some(list) => {
                for p in list {
                    if p.len() > len || p.iter().any(|&c| c as usize >= k) {
                        return Err(Error::InvalidArgument(format!(
                            "prefix {p:?} is longer than {len} or uses unknown symbols"
                        )));
                    }
                }
                dedup_prefixes(list)
            }
        };
        let mut pts = Vec::new();
        for root in roots {
            let free = len - root.len();
            let count = (k as u128).checked_pow(free as u32).filter(|c| *c <= 1 << 26).ok_or_else(|| {
                Error::InvalidArgument(format!("{k}^{free} cylinders is too many to enumerate"))
            })? as usize;
            for code in 0..count {
                let mut s = Vec::with_capacity(total);
                s.extend_from_slice(&root);
                let mut digits = vec![0u8; free];
                let mut c = code;
                for d in digits.iter_mut().rev() {
                    *d = (c % k) as u8;
                    c /= k;
                }
                s.extend_from_slice(&digits);
                s.resize(total, fill);
                pts.push(Point::Symbols(s));
            }
        }
        Ok(SampleSet { points: pts, density: libm::exp2(-(len as f64)) })
    }

    /// Points of `self` followed by points of `other` not already present.
    pub fn union(&self, space: &StateSpace, other: &SampleSet) -> SampleSet {
        let mut points = self.points.clone();
        let mut sorted: Vec<usize> = (0..points.len()).collect();
        sort_ids(space, &points, &mut sorted);
        for q in &other.points {
            if !contains_sorted(space, &self.points, &sorted, q) {
                points.push(q.clone());
            }
        }
        SampleSet { points, density: self.density.max(other.density) }
    }

    /// Images of every point under `f`, which must be injective on the sample.
    pub fn map_points<F: Fn(&Point) -> Point>(&self, space: &StateSpace, f: F) -> Result<SampleSet> {
        Self::from_points(space, self.points.iter().map(f).collect(), self.density)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position of a point within the sample, if present.
    pub fn position(&self, space: &StateSpace, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| space.same_point(p, q))
    }
}

fn axis(per_axis: usize) -> Vec<f64> {
    if per_axis == 1 {
        return vec![0.5];
    }
    (0..per_axis).map(|i| i as f64 / (per_axis - 1) as f64).collect()
}

fn axis_density(per_axis: usize) -> f64 {
    if per_axis == 1 {
        0.5
    } else {
        0.5 / (per_axis - 1) as f64
    }
}

/// Drops prefixes that extend another listed prefix so cylinders do not repeat.
pub(crate) fn dedup_prefixes(list: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut sorted: Vec<Vec<u8>> = list.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out: Vec<Vec<u8>> = Vec::new();
    for p in sorted {
        if !out.iter().any(|q| p.starts_with(q)) {
            out.push(p);
        }
    }
    out
}

fn first_coord(p: &Point) -> f64 {
    match p {
        Point::Real(x) => *x,
        Point::Vector(v) => v.first().copied().unwrap_or(0.0),
        Point::Symbols(_) => 0.0,
    }
}

fn sort_ids(space: &StateSpace, points: &[Point], ids: &mut [usize]) {
    match space {
        StateSpace::Symbolic { .. } => ids.sort_by(|&a, &b| match (&points[a], &points[b]) {
            (Point::Symbols(x), Point::Symbols(y)) => x.cmp(y),
            _ => core::cmp::Ordering::Equal,
        }),
        _ => ids.sort_by(|&a, &b| first_coord(&points[a]).total_cmp(&first_coord(&points[b]))),
    }
}

fn contains_sorted(space: &StateSpace, points: &[Point], sorted: &[usize], q: &Point) -> bool {
    match (space, q) {
        (StateSpace::Symbolic { .. }, Point::Symbols(s)) => sorted
            .binary_search_by(|&i| match &points[i] {
                Point::Symbols(x) => x.as_slice().cmp(s.as_slice()),
                _ => core::cmp::Ordering::Less,
            })
            .is_ok(),
        _ => {
            let x = first_coord(q);
            let start = sorted.partition_point(|&i| first_coord(&points[i]) < x - POINT_TOLERANCE);
            let hit = sorted[start..]
                .iter()
                .take_while(|&&i| first_coord(&points[i]) <= x + POINT_TOLERANCE)
                .any(|&i| space.same_point(&points[i], q));
            // circle neighbours across 0
            hit || (matches!(space, StateSpace::Circle)
                && !(POINT_TOLERANCE..=1.0 - POINT_TOLERANCE).contains(&x)
                && points.iter().any(|p| space.same_point(p, q)))
        }
    }
}

fn find_duplicate(space: &StateSpace, points: &[Point]) -> Option<(usize, usize)> {
    let mut ids: Vec<usize> = (0..points.len()).collect();
    sort_ids(space, points, &mut ids);
    match space {
        StateSpace::Symbolic { .. } => {
            for w in ids.windows(2) {
                if points[w[0]] == points[w[1]] {
                    return Some((w[0].min(w[1]), w[0].max(w[1])));
                }
            }
        }
        _ => {
            for (k, &i) in ids.iter().enumerate() {
                let xi = first_coord(&points[i]);
                for &j in &ids[k + 1..] {
                    if first_coord(&points[j]) > xi + POINT_TOLERANCE {
                        break;
                    }
                    if space.same_point(&points[i], &points[j]) {
                        return Some((i.min(j), i.max(j)));
                    }
                }
            }
            if matches!(space, StateSpace::Circle) && ids.len() > 1 {
                let (a, b) = (ids[0], ids[ids.len() - 1]);
                if space.same_point(&points[a], &points[b]) {
                    return Some((a.min(b), a.max(b)));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_rejected() {
        let c = StateSpace::Circle;
        assert!(SampleSet::from_points(&c, vec![Point::Real(0.1), Point::Real(0.1 + 1e-13)], 0.1).is_err());
        assert!(SampleSet::from_points(&c, vec![Point::Real(0.0), Point::Real(1.0 - 1e-13)], 0.1).is_err());
        assert!(SampleSet::from_points(&c, vec![Point::Real(0.1), Point::Real(0.2)], 0.1).is_ok());
    }

    #[test]
    fn cylinder_representatives() {
        let s = StateSpace::Symbolic { alphabet: 2, length: 6 };
        let all = SampleSet::cylinder_reps(&s, 3, None, 0).unwrap();
        assert_eq!(all.len(), 8);
        assert_eq!(all.points()[5], Point::Symbols(vec![1, 0, 1, 0, 0, 0]));
        let some = SampleSet::cylinder_reps(&s, 3, Some(&[vec![1], vec![1, 0], vec![0, 0]]), 0).unwrap();
        assert_eq!(some.len(), 6);
        assert!(SampleSet::cylinder_reps(&s, 7, None, 0).is_err());
    }

    #[test]
    fn union_skips_shared_points() {
        let c = StateSpace::Circle;
        let a = SampleSet::grid(&c, 4).unwrap();
        let b = SampleSet::grid(&c, 8).unwrap();
        let u = a.union(&c, &b);
        assert_eq!(u.len(), 8);
        assert_eq!(&u.points()[..4], a.points());
    }

    #[test]
    fn grids() {
        assert_eq!(SampleSet::grid(&StateSpace::Torus { dim: 2 }, 3).unwrap().len(), 9);
        let i = SampleSet::grid(&StateSpace::Interval, 5).unwrap();
        assert_eq!(i.points().last(), Some(&Point::Real(1.0)));
        let seg = SampleSet::segment(&StateSpace::Circle, 0.99, 0.02, 4).unwrap();
        assert!(seg.points()[3].as_real().unwrap() < 0.01);
    }
}
