//! Static candidate filters for word-maximal distance queries.
//!
//! If `d_n(x, y) ≤ r` then, along any fixed word, the orbits of `x` and `y`
//! stay within `r` at every time up to `n`. The general filter records the
//! cell of each point's orbit along one such word (the steepest one) and
//! answers queries with every point whose cell sequence is compatible.
//!
//! On the circle every generator is `x ↦ ax + b mod 1` with integer `a`, so
//! the difference of two orbits evolves by `Δ ↦ aΔ mod 1` whatever the base
//! points and offsets are. The set of differences `Δ` with `‖AΔ‖ ≤ r` for
//! every reachable slope product `A` is a finite union of intervals, computed
//! once per length; queries are then range lookups in the sorted sample.
//!
//! Both filters return a superset of the true neighbours; callers confirm
//! with an exact test.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Executor, MapKind, NaifsSystem, Point, StateSpace, Word};

/// Relative and absolute widening applied to the radius, so that rounding
/// never drops a true neighbour.
const WIDEN_REL: f64 = 1e-9;
const WIDEN_ABS: f64 = 1e-12;
/// Slope products beyond this size stop contributing constraints.
const MAX_PRODUCT: i128 = 1 << 40;

#[derive(Debug, Clone)]
enum Filter {
    Cells {
        word: Word,
        /// `keys[p * (depth + 1) + t]` is the cell of point `p` at time `t`.
        keys: Vec<u64>,
        /// Point ids sorted lexicographically by their key rows.
        order: Vec<u32>,
    },
    Offsets {
        /// `(position, id)` sorted by position.
        sorted: Vec<(f64, u32)>,
        /// `balls[n]`: intervals of offsets in `[−1/2, 1/2]` compatible with `d_n ≤ r`.
        balls: Vec<Vec<(f64, f64)>>,
    },
}

#[derive(Debug, Clone)]
pub struct OrbitIndex {
    depth: usize,
    radius: f64,
    len: usize,
    filter: Filter,
}

impl OrbitIndex {
    /// Indexes `points` for queries with radius at most `radius` and length at most `depth`.
    pub fn build<E: Executor>(
        sys: &NaifsSystem,
        points: &[Point],
        radius: f64,
        depth: usize,
        exec: &E,
    ) -> Self {
        let filter = match offset_balls(sys, radius, depth) {
            Some(balls) => {
                let mut sorted: Vec<(f64, u32)> = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.as_real().unwrap_or(0.0), i as u32))
                    .collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                Filter::Offsets { sorted, balls }
            }
            None => cell_filter(sys, points, radius, depth, exec),
        };
        OrbitIndex { depth, radius, len: points.len(), filter }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends to `out` every indexed point that may lie within `radius` of
    /// `q` for the length-`n` metric (`n ≤ depth`). Output order is deterministic.
    pub fn candidates(&self, sys: &NaifsSystem, q: &Point, n: usize, out: &mut Vec<usize>) {
        let n = n.min(self.depth);
        match &self.filter {
            Filter::Cells { word, keys, order } => {
                cell_candidates(sys, word, keys, order, self.depth, self.radius, q, n, out)
            }
            Filter::Offsets { sorted, balls } => {
                let ball = &balls[n];
                if ball.len() == 1 && ball[0].0 <= -0.5 && ball[0].1 >= 0.5 {
                    out.extend(0..self.len);
                    return;
                }
                let x = q.as_real().unwrap_or(0.0);
                let start = out.len();
                for &(lo, hi) in ball {
                    push_arc(sorted, x + lo, x + hi, out);
                }
                // intervals are disjoint, so only the two ends of the circle can meet
                let touches = ball.first().is_some_and(|b| b.0 <= -0.5) && ball.last().is_some_and(|b| b.1 >= 0.5);
                if touches {
                    out[start..].sort_unstable();
                    let mut k = start;
                    for i in start..out.len() {
                        if k == start || out[i] != out[k - 1] {
                            out[k] = out[i];
                            k += 1;
                        }
                    }
                    out.truncate(k);
                }
            }
        }
    }
}

/// Ids with positions in the arc `[a, b]` taken mod 1 (`b − a ≤ 1`).
fn push_arc(sorted: &[(f64, u32)], a: f64, b: f64, out: &mut Vec<usize>) {
    let shift = libm::floor(a);
    let (a, b) = (a - shift, b - shift);
    let mut take = |lo: f64, hi: f64| {
        let i = sorted.partition_point(|p| p.0 < lo);
        let j = sorted.partition_point(|p| p.0 <= hi);
        out.extend(sorted[i..j.max(i)].iter().map(|p| p.1 as usize));
    };
    if b < 1.0 {
        take(a, b);
    } else {
        take(a, 1.0);
        take(0.0, b - 1.0);
    }
}

/// Offset intervals for circle systems, `None` for other spaces.
fn offset_balls(sys: &NaifsSystem, radius: f64, depth: usize) -> Option<Vec<Vec<(f64, f64)>>> {
    if !matches!(sys.space(), StateSpace::Circle) {
        return None;
    }
    let r = radius * (1.0 + WIDEN_REL) + WIDEN_ABS;
    if r >= 0.5 {
        return Some(vec![vec![(-0.5, 0.5)]; depth + 1]);
    }
    let mut set = vec![(-r, r)];
    let mut balls = Vec::with_capacity(depth + 1);
    balls.push(set.clone());
    let mut products: Vec<i128> = vec![1];
    for t in 0..depth {
        let mut next = Vec::new();
        for m in sys.family_at(1 + t) {
            let MapKind::AffineMod1 { slope, .. } = m.kind else {
                return None;
            };
            for &p in &products {
                let q = (p * slope as i128).abs();
                if q <= MAX_PRODUCT {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for &a in &next {
            set = restrict(&set, a as f64, r);
        }
        set = merge(set);
        balls.push(set.clone());
        products = next;
    }
    Some(balls)
}

/// Sorts and merges overlapping intervals.
fn merge(mut set: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    set.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(set.len());
    for (lo, hi) in set {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Intersects `set` with `{Δ : ‖aΔ‖ ≤ r}`.
fn restrict(set: &[(f64, f64)], a: f64, r: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(lo, hi) in set {
        let k0 = libm::ceil(a * lo - r) as i64;
        let k1 = libm::floor(a * hi + r) as i64;
        for k in k0..=k1 {
            let c_lo = (k as f64 - r) / a - WIDEN_ABS;
            let c_hi = (k as f64 + r) / a + WIDEN_ABS;
            let (l, h) = (lo.max(c_lo), hi.min(c_hi));
            if l <= h {
                out.push((l, h));
            }
        }
    }
    out
}

fn cell_filter<E: Executor>(sys: &NaifsSystem, points: &[Point], radius: f64, depth: usize, exec: &E) -> Filter {
    let word = sys.steepest_word(1, depth);
    let width = depth + 1;
    let rows: Vec<Vec<u64>> = exec.map(points, |p| {
        let orbit = orbit_along(sys, &word, p);
        orbit.iter().map(|q| sys.space().cell_key(q, radius)).collect()
    });
    let mut keys = Vec::with_capacity(points.len() * width);
    for r in &rows {
        keys.extend_from_slice(r);
    }
    let mut order: Vec<u32> = (0..points.len() as u32).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        keys[a * width..(a + 1) * width].cmp(&keys[b * width..(b + 1) * width])
    });
    Filter::Cells { word, keys, order }
}

#[allow(clippy::too_many_arguments)]
fn cell_candidates(
    sys: &NaifsSystem,
    word: &Word,
    keys: &[u64],
    order: &[u32],
    depth: usize,
    radius: f64,
    q: &Point,
    n: usize,
    out: &mut Vec<usize>,
) {
    let key = |id: u32, t: usize| keys[id as usize * (depth + 1) + t];
    let mut word = word.clone();
    word.indices.truncate(n);
    let orbit = orbit_along(sys, &word, q);
    let neighbors: Vec<Vec<u64>> = orbit
        .iter()
        .map(|p| {
            let mut v = sys.space().neighbor_keys(p, radius);
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut stack: Vec<(usize, usize, usize)> = vec![(0, 0, order.len())];
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    while let Some((t, lo, hi)) = stack.pop() {
        // reversed so that ranges come out in ascending key order
        for &k in neighbors[t].iter().rev() {
            let slice = &order[lo..hi];
            let a = lo + slice.partition_point(|&id| key(id, t) < k);
            let b = lo + slice.partition_point(|&id| key(id, t) <= k);
            if a == b {
                continue;
            }
            if t == n {
                ranges.push((a, b));
            } else {
                stack.push((t + 1, a, b));
            }
        }
    }
    ranges.sort_unstable();
    for (a, b) in ranges {
        out.extend(order[a..b].iter().map(|&id| id as usize));
    }
}

fn orbit_along(sys: &NaifsSystem, word: &Word, p: &Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(word.len() + 1);
    out.push(p.clone());
    for (t, &i) in word.indices.iter().enumerate() {
        let next = sys.step(word.start + t, i, &out[t]);
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{within, Metric};
    use crate::{MapSpec, Sequential, StateSpace, TreeBudget};

    #[test]
    fn candidates_contain_all_true_neighbours() {
        let sys = NaifsSystem::constant(
            StateSpace::Circle,
            alloc::vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.1)],
        )
        .unwrap();
        let points: Vec<Point> = (0..2000).map(|i| Point::Real(i as f64 / 2000.0)).collect();
        let r = 0.03;
        let idx = OrbitIndex::build(&sys, &points, r, 4, &Sequential);
        let b = TreeBudget::default();
        for n in [0, 2, 4] {
            for qi in (0..2000).step_by(97) {
                let mut cand = Vec::new();
                idx.candidates(&sys, &points[qi], n, &mut cand);
                for (j, p) in points.iter().enumerate() {
                    if within(&sys, Metric::Dn, &points[qi], p, n, r, true, &b).is_inside() {
                        assert!(cand.contains(&j), "missing {j} for query {qi} at n={n}");
                    }
                }
                assert!(cand.len() < 2000 || n == 0);
            }
        }
    }

    #[test]
    fn symbolic_candidates_share_prefixes() {
        let sys = NaifsSystem::constant(
            StateSpace::Symbolic { alphabet: 2, length: 8 },
            alloc::vec![MapSpec::shift(0)],
        )
        .unwrap();
        let points: Vec<Point> = (0u32..256)
            .map(|w| Point::Symbols((0..8).map(|i| ((w >> (7 - i)) & 1) as u8).collect()))
            .collect();
        let idx = OrbitIndex::build(&sys, &points, 0.25, 3, &Sequential);
        let mut cand = Vec::new();
        idx.candidates(&sys, &points[0], 3, &mut cand);
        // d_3 ≤ 1/4 forces agreement on the first 5 symbols
        assert_eq!(cand.len(), 8);
    }
}
