//! Word-maximal dynamical metrics, Bowen balls and maximal Birkhoff sums.
//!
//! Every quantity here is a maximum over the word tree. The tree is searched
//! exhaustively when it has at most [`TreeBudget::node_budget`] leaves;
//! otherwise a beam search keeps the most promising branches and the result
//! is flagged [`Mode::LowerBound`].

use alloc::vec;
use alloc::vec::Vec;

use crate::{NaifsSystem, Point, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    Exact,
    LowerBound,
}

impl Mode {
    /// Exact only if both inputs are.
    pub fn and(self, other: Mode) -> Mode {
        if self == Mode::Exact && other == Mode::Exact {
            Mode::Exact
        } else {
            Mode::LowerBound
        }
    }

    pub fn all<I: IntoIterator<Item = Mode>>(modes: I) -> Mode {
        modes.into_iter().fold(Mode::Exact, Mode::and)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreeBudget {
    /// Largest number of leaves searched exhaustively.
    pub node_budget: u64,
    /// Frontier size of the fallback beam search.
    pub beam_width: usize,
}

impl Default for TreeBudget {
    fn default() -> Self {
        TreeBudget { node_budget: 1 << 22, beam_width: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Metric {
    /// Words start at time 1.
    Dn,
    /// Supremum over all start times.
    DnStar,
}

/// Outcome of a threshold test on a word-maximal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    /// The beam search found no violation but did not see the whole tree.
    Uncertain,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }
}

/// `d_n(x, y)`: largest orbit distance along any word of length `n` from time 1.
pub fn d_n(sys: &NaifsSystem, x: &Point, y: &Point, n: usize, budget: &TreeBudget) -> (f64, Mode) {
    d_n_from(sys, x, y, 1, n, budget)
}

/// Same as [`d_n`] with words taken from time `start`.
pub fn d_n_from(
    sys: &NaifsSystem,
    x: &Point,
    y: &Point,
    start: usize,
    n: usize,
    budget: &TreeBudget,
) -> (f64, Mode) {
    let space = sys.space();
    let mut best = space.distance(x, y);
    let diam = space.diameter();
    if n == 0 || best >= diam {
        return (best, Mode::Exact);
    }
    if sys.leaf_count(start, n) <= budget.node_budget {
        let g = sys.growth_bounds(start, n);
        dn_dfs(sys, start, n, 0, x, y, &mut best, diam, &g);
        (best, Mode::Exact)
    } else {
        let (b, exact, _) = dn_beam(sys, start, n, x, y, budget.beam_width, None);
        (b, if exact { Mode::Exact } else { Mode::LowerBound })
    }
}

/// `d_n^*(x, y)`: the maximum of [`d_n_from`] over one representative of every start class.
pub fn d_n_star(sys: &NaifsSystem, x: &Point, y: &Point, n: usize, budget: &TreeBudget) -> (f64, Mode) {
    let mut best = 0.0_f64;
    let mut mode = Mode::Exact;
    for start in 1..=sys.start_classes() {
        let (d, m) = d_n_from(sys, x, y, start, n, budget);
        best = best.max(d);
        mode = mode.and(m);
    }
    (best, mode)
}

pub fn metric_value(
    sys: &NaifsSystem,
    metric: Metric,
    x: &Point,
    y: &Point,
    n: usize,
    budget: &TreeBudget,
) -> (f64, Mode) {
    match metric {
        Metric::Dn => d_n(sys, x, y, n, budget),
        Metric::DnStar => d_n_star(sys, x, y, n, budget),
    }
}

/// Tests `metric(x, y) ≤ radius` (`closed`) or `< radius` without computing
/// the full maximum: the search stops at the first violating node.
#[allow(clippy::too_many_arguments)]
pub fn within(
    sys: &NaifsSystem,
    metric: Metric,
    x: &Point,
    y: &Point,
    n: usize,
    radius: f64,
    closed: bool,
    budget: &TreeBudget,
) -> Membership {
    let starts = match metric {
        Metric::Dn => 1,
        Metric::DnStar => sys.start_classes(),
    };
    let violates = |d: f64| if closed { d > radius } else { d >= radius };
    if violates(sys.space().distance(x, y)) {
        return Membership::Outside;
    }
    let mut uncertain = false;
    for start in 1..=starts {
        if n == 0 {
            break;
        }
        if sys.leaf_count(start, n) <= budget.node_budget {
            let g = sys.growth_bounds(start, n);
            if within_dfs(sys, start, n, 0, x, y, &violates, &g) {
                return Membership::Outside;
            }
        } else {
            let (_, exact, stopped) = dn_beam(sys, start, n, x, y, budget.beam_width, Some(&violates));
            if stopped {
                return Membership::Outside;
            }
            if !exact {
                uncertain = true;
            }
        }
    }
    if uncertain {
        Membership::Uncertain
    } else {
        Membership::Inside
    }
}

/// Whether `x ∈ B_n(center, δ)`, i.e. `d_n(center, x) < δ`.
pub fn bowen_ball_contains(
    sys: &NaifsSystem,
    center: &Point,
    x: &Point,
    n: usize,
    delta: f64,
    budget: &TreeBudget,
) -> Membership {
    within(sys, Metric::Dn, center, x, n, delta, false, budget)
}

/// Slack on Lipschitz bounds so that rounding in the map evaluations cannot
/// make a pruned subtree exceed its bound.
const BOUND_SLACK: f64 = 1.0 + 1e-9;

fn growth_bound(d: f64, g: f64) -> f64 {
    if d > 0.0 {
        d * g * BOUND_SLACK
    } else {
        f64::INFINITY
    }
}

#[allow(clippy::too_many_arguments)]
fn dn_dfs(
    sys: &NaifsSystem,
    start: usize,
    n: usize,
    t: usize,
    x: &Point,
    y: &Point,
    best: &mut f64,
    diam: f64,
    g: &[f64],
) {
    let space = sys.space();
    for m in sys.family_at(start + t) {
        let x1 = m.apply(space, x);
        let y1 = m.apply(space, y);
        let d = space.distance(&x1, &y1);
        if d > *best {
            *best = d;
            if *best >= diam {
                return;
            }
        }
        // identical points stay identical; otherwise skip subtrees that cannot beat the incumbent
        if t + 1 < n && x1 != y1 && growth_bound(d, g[t + 1]) > *best {
            dn_dfs(sys, start, n, t + 1, &x1, &y1, best, diam, g);
            if *best >= diam {
                return;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn within_dfs(
    sys: &NaifsSystem,
    start: usize,
    n: usize,
    t: usize,
    x: &Point,
    y: &Point,
    violates: &dyn Fn(f64) -> bool,
    g: &[f64],
) -> bool {
    let space = sys.space();
    for m in sys.family_at(start + t) {
        let x1 = m.apply(space, x);
        let y1 = m.apply(space, y);
        let d = space.distance(&x1, &y1);
        if violates(d) {
            return true;
        }
        if t + 1 < n
            && x1 != y1
            && violates(growth_bound(d, g[t + 1]))
            && within_dfs(sys, start, n, t + 1, &x1, &y1, violates, g)
        {
            return true;
        }
    }
    false
}

/// Beam search for the word-maximal distance. Returns the best value seen,
/// whether the frontier was never truncated (in which case the value is exact)
/// and whether `stop` fired.
fn dn_beam(
    sys: &NaifsSystem,
    start: usize,
    n: usize,
    x: &Point,
    y: &Point,
    width: usize,
    stop: Option<&dyn Fn(f64) -> bool>,
) -> (f64, bool, bool) {
    let space = sys.space();
    let mut best = space.distance(x, y);
    let mut frontier = vec![(x.clone(), y.clone())];
    let mut exact = true;
    for t in 0..n {
        let mut next: Vec<(f64, Point, Point)> = Vec::new();
        for (a, b) in &frontier {
            for m in sys.family_at(start + t) {
                let a1 = m.apply(space, a);
                let b1 = m.apply(space, b);
                let d = space.distance(&a1, &b1);
                best = best.max(d);
                if let Some(f) = stop {
                    if f(d) {
                        return (best, exact, true);
                    }
                }
                if a1 != b1 {
                    next.push((d, a1, b1));
                }
            }
        }
        if next.len() > width.max(1) {
            next.sort_by(|p, q| q.0.total_cmp(&p.0));
            next.truncate(width.max(1));
            exact = false;
        }
        frontier = next.into_iter().map(|(_, a, b)| (a, b)).collect();
        if frontier.is_empty() {
            break;
        }
    }
    (best, exact, false)
}

/// `S_n φ(x)`: the largest Birkhoff sum `Σ_{i<n} φ(f_w^{1,i} x)` over words.
pub fn birkhoff_max(
    sys: &NaifsSystem,
    phi: &Potential,
    x: &Point,
    n: usize,
    budget: &TreeBudget,
) -> (f64, Mode) {
    if n == 0 {
        return (0.0, Mode::Exact);
    }
    let (profile, mode) = birkhoff_profile(sys, phi, x, n, budget);
    (profile[n - 1], mode)
}

/// `[S_1 φ(x), …, S_{n_max} φ(x)]` from a single tree search.
pub fn birkhoff_profile(
    sys: &NaifsSystem,
    phi: &Potential,
    x: &Point,
    n_max: usize,
    budget: &TreeBudget,
) -> (Vec<f64>, Mode) {
    if n_max == 0 {
        return (Vec::new(), Mode::Exact);
    }
    let space = sys.space();
    let sup = phi.sup(space);
    let mut best = vec![f64::NEG_INFINITY; n_max];
    let root = phi.eval(space, x);
    if phi.is_constant() {
        for (k, b) in best.iter_mut().enumerate() {
            *b = root * (k + 1) as f64;
        }
        return (best, Mode::Exact);
    }
    if sys.leaf_count(1, n_max - 1) <= budget.node_budget {
        profile_dfs(sys, phi, n_max, 0, x, root, &mut best, sup);
        (best, Mode::Exact)
    } else {
        let exact = profile_beam(sys, phi, n_max, x, root, &mut best, budget.beam_width);
        (best, if exact { Mode::Exact } else { Mode::LowerBound })
    }
}

#[allow(clippy::too_many_arguments)]
fn profile_dfs(
    sys: &NaifsSystem,
    phi: &Potential,
    n_max: usize,
    t: usize,
    x: &Point,
    partial: f64,
    best: &mut [f64],
    sup: f64,
) {
    if partial > best[t] {
        best[t] = partial;
    }
    if t + 1 >= n_max {
        return;
    }
    // a branch is only worth exploring if it can still beat some deeper incumbent
    let promising = (t + 1..n_max).any(|k| partial + (k - t) as f64 * sup > best[k]);
    if !promising {
        return;
    }
    let space = sys.space();
    for m in sys.family_at(1 + t) {
        let x1 = m.apply(space, x);
        let p1 = partial + phi.eval(space, &x1);
        profile_dfs(sys, phi, n_max, t + 1, &x1, p1, best, sup);
    }
}

fn profile_beam(
    sys: &NaifsSystem,
    phi: &Potential,
    n_max: usize,
    x: &Point,
    root: f64,
    best: &mut [f64],
    width: usize,
) -> bool {
    let space = sys.space();
    let mut exact = true;
    best[0] = root;
    let mut frontier = vec![(root, x.clone())];
    #[allow(clippy::needless_range_loop)]
    for t in 1..n_max {
        let mut next: Vec<(f64, Point)> = Vec::new();
        for (partial, p) in &frontier {
            for m in sys.family_at(t) {
                let p1 = m.apply(space, p);
                let s = partial + phi.eval(space, &p1);
                next.push((s, p1));
            }
        }
        if next.len() > width.max(1) {
            next.sort_by(|a, b| b.0.total_cmp(&a.0));
            next.truncate(width.max(1));
            exact = false;
        }
        best[t] = next.iter().map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
        frontier = next;
    }
    exact
}

/// `S_n φ(x, δ)` relative to `pool`: the largest `S_n φ(y)` over pool points
/// `y` with `d_n(x, y) < δ`, always including `x` itself.
pub fn birkhoff_ball_sup(
    sys: &NaifsSystem,
    phi: &Potential,
    x: &Point,
    n: usize,
    delta: f64,
    pool: &[Point],
    budget: &TreeBudget,
) -> (f64, Mode) {
    let (mut best, mut mode) = birkhoff_max(sys, phi, x, n, budget);
    if phi.is_constant() {
        return (best, mode);
    }
    for y in pool {
        if y == x {
            continue;
        }
        match bowen_ball_contains(sys, x, y, n, delta, budget) {
            Membership::Inside => {
                let (s, m) = birkhoff_max(sys, phi, y, n, budget);
                best = best.max(s);
                mode = mode.and(m);
            }
            Membership::Uncertain => mode = Mode::LowerBound,
            Membership::Outside => {}
        }
    }
    (best, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MapSpec, StateSpace};

    fn circle(slopes: &[i64]) -> NaifsSystem {
        NaifsSystem::constant(
            StateSpace::Circle,
            slopes.iter().map(|a| MapSpec::affine_mod1(*a, 0.0)).collect(),
        )
        .unwrap()
    }

    fn r(x: f64) -> Point {
        Point::Real(x)
    }

    #[test]
    fn d_n_examples() {
        let b = TreeBudget::default();
        let sys = circle(&[2]);
        assert_eq!(d_n(&sys, &r(0.1), &r(0.3), 0, &b).0, sys.space().distance(&r(0.1), &r(0.3)));
        let (d, mode) = d_n(&sys, &r(0.1), &r(0.12), 2, &b);
        assert!((d - 0.08).abs() < 1e-12);
        assert_eq!(mode, Mode::Exact);
        let (d, _) = d_n(&circle(&[2, 3]), &r(0.1), &r(0.11), 1, &b);
        assert!((d - 0.03).abs() < 1e-12);
    }

    #[test]
    fn d_n_star_takes_sup_over_start_times() {
        let b = TreeBudget::default();
        let sys = NaifsSystem::new(
            StateSpace::Circle,
            vec![],
            vec![vec![MapSpec::affine_mod1(2, 0.0)], vec![MapSpec::affine_mod1(3, 0.0)]],
        )
        .unwrap();
        let (d, _) = d_n_star(&sys, &r(0.1), &r(0.11), 1, &b);
        assert!((d - 0.03).abs() < 1e-12);
        assert!((d_n(&sys, &r(0.1), &r(0.11), 1, &b).0 - 0.02).abs() < 1e-12);
    }

    #[test]
    fn bowen_ball_examples() {
        let b = TreeBudget::default();
        let sys = circle(&[2]);
        assert!(bowen_ball_contains(&sys, &r(0.1), &r(0.1), 5, 0.01, &b).is_inside());
        assert_eq!(bowen_ball_contains(&sys, &r(0.1), &r(0.12), 2, 0.05, &b), Membership::Outside);
        assert!(bowen_ball_contains(&sys, &r(0.1), &r(0.12), 2, 0.1, &b).is_inside());
    }

    #[test]
    fn birkhoff_examples() {
        let b = TreeBudget::default();
        let space = StateSpace::Circle;
        let id = Potential::affine(vec![1.0], 0.0);
        assert_eq!(birkhoff_max(&circle(&[2, 3]), &Potential::constant(0.7), &r(0.4), 5, &b).0, 0.7 * 5.0);
        assert!((birkhoff_max(&circle(&[2]), &id, &r(0.1), 2, &b).0 - 0.3).abs() < 1e-12);
        // two words of length 2 matter through their first letter: 0.1 + max(0.2, 0.3)
        assert!((birkhoff_max(&circle(&[2, 3]), &id, &r(0.1), 2, &b).0 - 0.4).abs() < 1e-12);
        let pool = [r(0.1), r(0.12)];
        let (s, _) = birkhoff_ball_sup(&circle(&[2]), &id, &r(0.1), 1, 0.05, &pool, &b);
        assert!((s - 0.12).abs() < 1e-12);
        let (s, _) = birkhoff_ball_sup(&circle(&[2]), &id, &r(0.1), 2, 0.05, &pool, &b);
        assert!((s - 0.3).abs() < 1e-12, "0.12 leaves the 2-ball");
        let _ = space;
    }

    #[test]
    fn beam_mode_is_flagged_and_bounded_by_exact() {
        let sys = circle(&[2, 3, 5]);
        let exact = TreeBudget::default();
        let tight = TreeBudget { node_budget: 8, beam_width: 4 };
        let (de, me) = d_n(&sys, &r(0.1), &r(0.1003), 6, &exact);
        let (db, mb) = d_n(&sys, &r(0.1), &r(0.1003), 6, &tight);
        assert_eq!(me, Mode::Exact);
        assert_eq!(mb, Mode::LowerBound);
        assert!(db <= de + 1e-15);
        let phi = Potential::grid(4, vec![0.0, 1.0, 0.0, -1.0]);
        let (se, _) = birkhoff_max(&sys, &phi, &r(0.3), 7, &exact);
        let (sb, m) = birkhoff_max(&sys, &phi, &r(0.3), 7, &tight);
        assert_eq!(m, Mode::LowerBound);
        assert!(sb <= se + 1e-12);
    }
}
