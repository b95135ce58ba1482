//! Separated and spanning sets, Vitali selection and the sup-entropy estimator.

use alloc::vec;
use alloc::vec::Vec;

use crate::cover::greedy_weighted_cover;
use crate::index::OrbitIndex;
use crate::math::{ceil, ln, least_squares};
use crate::metrics::{within, Membership};
use crate::{Error, Executor, Metric, Mode, NaifsSystem, Point, Result, SampleSet, TreeBudget};

/// Indices into a [`SampleSet`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSelection {
    pub indices: Vec<usize>,
    pub mode: Mode,
}

impl PointSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn points<'a>(&'a self, sample: &'a SampleSet) -> impl Iterator<Item = &'a Point> + 'a {
        self.indices.iter().map(move |&i| &sample.points()[i])
    }
}

/// Scans the sample in order and keeps a point iff its distance to every
/// kept point exceeds `eps`. The result is `(n, eps)`-separated and, in
/// exact mode, maximal within the sample.
pub fn greedy_separated<E: Executor>(
    sys: &NaifsSystem,
    sample: &SampleSet,
    n: usize,
    eps: f64,
    metric: Metric,
    budget: &TreeBudget,
    exec: &E,
) -> PointSelection {
    let index = OrbitIndex::build(sys, sample.points(), eps, n, exec);
    greedy_separated_seeded(sys, sample, n, eps, metric, budget, &index, &[])
}

/// [`greedy_separated`] starting from `seed`, which must already be
/// `(n, eps)`-separated. `index` must cover `sample` with radius `≥ eps` and depth `≥ n`.
#[allow(clippy::too_many_arguments)]
pub fn greedy_separated_seeded(
    sys: &NaifsSystem,
    sample: &SampleSet,
    n: usize,
    eps: f64,
    metric: Metric,
    budget: &TreeBudget,
    index: &OrbitIndex,
    seed: &[usize],
) -> PointSelection {
    let pts = sample.points();
    let mut kept_flag = vec![false; pts.len()];
    let mut kept = Vec::with_capacity(seed.len());
    for &s in seed {
        if !kept_flag[s] {
            kept_flag[s] = true;
            kept.push(s);
        }
    }
    let mut mode = Mode::Exact;
    let mut cand = Vec::new();
    for i in 0..pts.len() {
        if kept_flag[i] {
            continue;
        }
        cand.clear();
        // a short kept list is cheaper to scan than a large candidate set
        if kept.len() <= 64 {
            cand.extend_from_slice(&kept);
        } else {
            index.candidates(sys, &pts[i], n, &mut cand);
        }
        let mut keep = true;
        for &j in &cand {
            if !kept_flag[j] || j == i {
                continue;
            }
            match within(sys, metric, &pts[i], &pts[j], n, eps, true, budget) {
                Membership::Outside => {}
                Membership::Inside => {
                    keep = false;
                    break;
                }
                Membership::Uncertain => {
                    mode = Mode::LowerBound;
                    keep = false;
                    break;
                }
            }
        }
        if keep {
            kept_flag[i] = true;
            kept.push(i);
        }
    }
    PointSelection { indices: kept, mode }
}

/// Closed `(n, eps)`-balls around every sample point, restricted to the sample.
/// Uncertain memberships are left out so that a cover built from them is genuine.
pub fn closed_balls<E: Executor>(
    sys: &NaifsSystem,
    sample: &SampleSet,
    n: usize,
    eps: f64,
    metric: Metric,
    budget: &TreeBudget,
    exec: &E,
) -> (Vec<Vec<u32>>, Mode) {
    let pts = sample.points();
    let index = OrbitIndex::build(sys, pts, eps, n, exec);
    let ids: Vec<usize> = (0..pts.len()).collect();
    let rows = exec.map(&ids, |&i| {
        let mut cand = Vec::new();
        index.candidates(sys, &pts[i], n, &mut cand);
        let mut members = Vec::new();
        let mut mode = Mode::Exact;
        for &j in &cand {
            if j == i {
                members.push(j as u32);
                continue;
            }
            match within(sys, metric, &pts[i], &pts[j], n, eps, true, budget) {
                Membership::Inside => members.push(j as u32),
                Membership::Uncertain => mode = Mode::LowerBound,
                Membership::Outside => {}
            }
        }
        members.sort_unstable();
        (members, mode)
    });
    let mode = Mode::all(rows.iter().map(|r| r.1));
    (rows.into_iter().map(|r| r.0).collect(), mode)
}

/// A small `(n, eps)`-spanning subset of the sample: the smaller of a greedy
/// set cover by closed balls and a maximal separated set.
pub fn greedy_spanning<E: Executor>(
    sys: &NaifsSystem,
    sample: &SampleSet,
    n: usize,
    eps: f64,
    metric: Metric,
    budget: &TreeBudget,
    exec: &E,
) -> Result<PointSelection> {
    if sample.is_empty() {
        return Ok(PointSelection { indices: Vec::new(), mode: Mode::Exact });
    }
    let (balls, ball_mode) = closed_balls(sys, sample, n, eps, metric, budget, exec);
    let ids: Vec<usize> = (0..balls.len()).collect();
    let zeros = vec![0.0; balls.len()];
    let mut cover = greedy_weighted_cover(sample.len(), &balls, &ids, &zeros)?.chosen;
    cover.sort_unstable();
    let sep = greedy_separated(sys, sample, n, eps, metric, budget, exec);
    // a maximal separated set spans; without maximality it may not
    if sep.mode == Mode::Exact && sep.len() < cover.len() {
        return Ok(sep);
    }
    Ok(PointSelection { indices: cover, mode: ball_mode })
}

/// A ball `B_n(center, radius)` for the Vitali selection.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: Point,
    pub n: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VitaliSelection {
    pub selected: Vec<usize>,
    pub enlargement: f64,
    pub mode: Mode,
}

/// Greedily selects balls whose centers are more than `2r` apart in `d_n`.
/// Every input ball then lies inside the `enlargement`-fold dilation
/// (`enlargement ≥ 3`) of a selected one.
pub fn vitali_subfamily(
    sys: &NaifsSystem,
    balls: &[Ball],
    enlargement: f64,
    budget: &TreeBudget,
) -> Result<VitaliSelection> {
    if !(enlargement >= 3.0) {
        return Err(Error::InvalidArgument("enlargement factor must be at least 3".into()));
    }
    let Some(first) = balls.first() else {
        return Ok(VitaliSelection { selected: Vec::new(), enlargement, mode: Mode::Exact });
    };
    if balls.iter().any(|b| b.n != first.n || b.radius != first.radius) {
        return Err(Error::InvalidArgument("Vitali selection needs a common radius and length".into()));
    }
    let (n, r) = (first.n, first.radius);
    let mut selected: Vec<usize> = Vec::new();
    let mut mode = Mode::Exact;
    for (i, b) in balls.iter().enumerate() {
        let mut disjoint = true;
        for &j in &selected {
            match within(sys, Metric::Dn, &b.center, &balls[j].center, n, 2.0 * r, true, budget) {
                Membership::Outside => {}
                Membership::Inside => {
                    disjoint = false;
                    break;
                }
                Membership::Uncertain => {
                    mode = Mode::LowerBound;
                    disjoint = false;
                    break;
                }
            }
        }
        if disjoint {
            selected.push(i);
        }
    }
    Ok(VitaliSelection { selected, enlargement, mode })
}

/// Checks on `sample` that every point of every input ball lies in the
/// enlarged ball of some selected center.
pub fn vitali_covers(
    sys: &NaifsSystem,
    balls: &[Ball],
    selection: &VitaliSelection,
    sample: &[Point],
    budget: &TreeBudget,
) -> bool {
    for p in sample {
        let in_some = balls
            .iter()
            .any(|b| within(sys, Metric::Dn, &b.center, p, b.n, b.radius, false, budget).is_inside());
        if !in_some {
            continue;
        }
        let covered = selection.selected.iter().any(|&j| {
            let b = &balls[j];
            within(sys, Metric::Dn, &b.center, p, b.n, selection.enlargement * b.radius, false, budget)
                .is_inside()
        });
        if !covered {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntropyCell {
    pub n: usize,
    pub eps: f64,
    pub count: usize,
    pub log_count: f64,
    /// `log_count / n`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntropyEstimate {
    pub table: Vec<EntropyCell>,
    /// `(eps, slope)` for every eps, in the order given.
    pub slopes: Vec<(f64, f64)>,
    pub value: f64,
    pub mode: Mode,
}

/// Number of trailing `n` values used by growth-rate fits.
pub fn tail_len(len: usize) -> usize {
    (ceil(len as f64 / 2.0) as usize).max(3).min(len)
}

/// Sup-entropy estimate: growth rate in `n` of maximal separated set sizes.
///
/// Cells are filled for decreasing `eps` and increasing `n`; each greedy run
/// starts from the larger of the sets found at `(n − 1, eps)` and at
/// `(n, previous eps)`, both of which are already separated, so counts are
/// monotone in both directions.
pub fn sup_entropy<E: Executor>(
    sys: &NaifsSystem,
    sample: &SampleSet,
    n_range: &[usize],
    eps_range: &[f64],
    metric: Metric,
    budget: &TreeBudget,
    exec: &E,
) -> Result<EntropyEstimate> {
    if n_range.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_range must be strictly increasing".into()));
    }
    if eps_range.is_empty() || eps_range.windows(2).any(|w| !(w[0] > w[1])) || eps_range.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("eps_range must be positive and strictly decreasing".into()));
    }
    let tail = tail_len(n_range.len());
    if tail < 3 {
        return Err(Error::DegenerateFit { points: tail, needed: 3 });
    }
    if sample.is_empty() {
        return Err(Error::InvalidArgument("sample is empty".into()));
    }
    let n_max = *n_range.last().unwrap_or(&0);
    let mut table = Vec::new();
    let mut slopes = Vec::new();
    let mut mode = Mode::Exact;
    let mut prev_row: Vec<Vec<usize>> = vec![Vec::new(); n_range.len()];
    for &eps in eps_range {
        let index = OrbitIndex::build(sys, sample.points(), eps, n_max, exec);
        let mut row: Vec<Vec<usize>> = Vec::with_capacity(n_range.len());
        for (k, &n) in n_range.iter().enumerate() {
            let from_n = if k > 0 { &row[k - 1] } else { &prev_row[k] };
            let from_eps = &prev_row[k];
            let seed = if from_n.len() >= from_eps.len() { from_n.clone() } else { from_eps.clone() };
            let sel = greedy_separated_seeded(sys, sample, n, eps, metric, budget, &index, &seed);
            mode = mode.and(sel.mode);
            let count = sel.len();
            let log_count = ln(count as f64);
            table.push(EntropyCell { n, eps, count, log_count, rate: if n > 0 { log_count / n as f64 } else { f64::NAN } });
            row.push(sel.indices);
        }
        let cells = &table[table.len() - n_range.len()..];
        let xs: Vec<f64> = cells[cells.len() - tail..].iter().map(|c| c.n as f64).collect();
        let ys: Vec<f64> = cells[cells.len() - tail..].iter().map(|c| c.log_count).collect();
        let (slope, _) = least_squares(&xs, &ys)?;
        slopes.push((eps, slope));
        prev_row = row;
    }
    let value = slopes.last().map(|s| s.1).unwrap_or(f64::NAN);
    Ok(EntropyEstimate { table, slopes, value, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MapSpec, Sequential, StateSpace};

    fn two_shift(len: usize) -> NaifsSystem {
        NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: len }, vec![MapSpec::shift(0)]).unwrap()
    }

    #[test]
    fn two_shift_counts() {
        let sys = two_shift(8);
        let sample = SampleSet::cylinder_reps(sys.space(), 5, None, 0).unwrap();
        let b = TreeBudget::default();
        let sep = greedy_separated(&sys, &sample, 3, 0.5, Metric::Dn, &b, &Sequential);
        assert_eq!(sep.len(), 16);
        let span = greedy_spanning(&sys, &sample, 3, 0.5, Metric::Dn, &b, &Sequential).unwrap();
        assert_eq!(span.len(), 16);
    }

    #[test]
    fn trivial_cases() {
        let sys = NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0)]).unwrap();
        let b = TreeBudget::default();
        let one = SampleSet::from_points(sys.space(), vec![Point::Real(0.3)], 0.0).unwrap();
        assert_eq!(greedy_separated(&sys, &one, 4, 0.1, Metric::Dn, &b, &Sequential).indices, vec![0]);
        let grid = SampleSet::grid(sys.space(), 50).unwrap();
        assert_eq!(greedy_separated(&sys, &grid, 0, 0.5, Metric::Dn, &b, &Sequential).len(), 1);
        assert_eq!(greedy_spanning(&sys, &grid, 0, 0.5, Metric::Dn, &b, &Sequential).unwrap().len(), 1);
    }

    #[test]
    fn vitali_example() {
        let sys = NaifsSystem::new(
            StateSpace::Interval,
            vec![],
            vec![vec![MapSpec::continuous_piecewise_linear(vec![0.0, 1.0], vec![1.0], 0.0)]],
        )
        .unwrap();
        let b = TreeBudget::default();
        let balls: Vec<Ball> = [0.10, 0.11, 0.30]
            .iter()
            .map(|&c| Ball { center: Point::Real(c), n: 0, radius: 0.02 })
            .collect();
        let sel = vitali_subfamily(&sys, &balls, 3.0, &b).unwrap();
        assert_eq!(sel.selected, vec![0, 2]);
        let grid: Vec<Point> = (0..=1000).map(|i| Point::Real(i as f64 / 1000.0)).collect();
        assert!(vitali_covers(&sys, &balls, &sel, &grid, &b));
        assert!(vitali_subfamily(&sys, &balls, 2.0, &b).is_err());
    }

    #[test]
    fn entropy_of_two_shift() {
        let sys = two_shift(12);
        let sample = SampleSet::cylinder_reps(sys.space(), 10, None, 0).unwrap();
        let est = sup_entropy(
            &sys,
            &sample,
            &[2, 3, 4, 5, 6],
            &[0.5, 0.25, 0.125],
            Metric::DnStar,
            &TreeBudget::default(),
            &Sequential,
        )
        .unwrap();
        assert!((est.value - core::f64::consts::LN_2).abs() < 1e-9);
        for c in &est.table {
            let m = (-libm::log2(c.eps)).round() as u32;
            assert_eq!(c.count, 1usize << (c.n as u32 + m));
        }
        assert!(sup_entropy(&sys, &sample, &[2, 3], &[0.5], Metric::Dn, &TreeBudget::default(), &Sequential).is_err());
    }
}
