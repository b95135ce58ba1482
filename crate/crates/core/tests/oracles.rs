//! Library results against naive enumeration written independently of the
//! pruned searches and indexes in the crate.

use naifs_pressure::counting::{greedy_separated, sup_entropy};
use naifs_pressure::metrics::{birkhoff_max, d_n, d_n_star};
use naifs_pressure::{
    MapSpec, Metric, Mode, NaifsSystem, Point, Potential, SampleSet, Sequential, StateSpace, TreeBudget,
};
use proptest::prelude::*;

const LEN: usize = 16;

fn two_shift() -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: LEN }, vec![MapSpec::shift(0)]).unwrap()
}

fn circle_pair() -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.0)]).unwrap()
}

fn circle_periodic() -> NaifsSystem {
    NaifsSystem::new(
        StateSpace::Circle,
        vec![],
        vec![vec![MapSpec::affine_mod1(2, 0.0)], vec![MapSpec::affine_mod1(3, 0.0)]],
    )
    .unwrap()
}

fn circle_mixed() -> NaifsSystem {
    NaifsSystem::new(
        StateSpace::Circle,
        vec![vec![MapSpec::affine_mod1(3, 0.25)]],
        vec![vec![MapSpec::affine_mod1(2, 0.1)], vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(-3, 0.5)]],
    )
    .unwrap()
}

fn table() -> Potential {
    Potential::symbol_table(vec![0.0, 1.0])
}

fn bumpy() -> Potential {
    Potential::grid(8, vec![0.0, 0.7, -0.2, 1.1, 0.4, -0.6, 0.9, 0.3])
}

/// Largest distance along any word of length `n` started at `start`, by
/// walking every word.
fn naive_dn(sys: &NaifsSystem, start: usize, x: &Point, y: &Point, n: usize) -> f64 {
    let d0 = sys.space().distance(x, y);
    if n == 0 {
        return d0;
    }
    let mut best = d0;
    for m in sys.family_at(start) {
        let fx = m.apply(sys.space(), x);
        let fy = m.apply(sys.space(), y);
        best = best.max(naive_dn(sys, start + 1, &fx, &fy, n - 1));
    }
    best
}

fn naive_dn_star(sys: &NaifsSystem, x: &Point, y: &Point, n: usize) -> f64 {
    // more starts than there are classes; the extra ones must repeat values
    let starts = sys.preamble().len() + 3 * sys.period().len();
    (1..=starts).map(|s| naive_dn(sys, s, x, y, n)).fold(0.0, f64::max)
}

/// Largest `Σ_{i<n} φ(x_i)` over every word of length `n − 1`.
fn naive_birkhoff(sys: &NaifsSystem, phi: &Potential, x: &Point, n: usize) -> f64 {
    fn go(sys: &NaifsSystem, phi: &Potential, t: usize, x: &Point, left: usize) -> f64 {
        let here = phi.eval(sys.space(), x);
        if left == 1 {
            return here;
        }
        sys.family_at(t)
            .iter()
            .map(|m| go(sys, phi, t + 1, &m.apply(sys.space(), x), left - 1))
            .fold(f64::NEG_INFINITY, f64::max)
            + here
    }
    if n == 0 {
        0.0
    } else {
        go(sys, phi, 1, x, n)
    }
}

fn check_pair(sys: &NaifsSystem, phi: &Potential, x: &Point, y: &Point, n: usize) -> Result<(), TestCaseError> {
    let b = TreeBudget::default();
    let (d, m) = d_n(sys, x, y, n, &b);
    prop_assert_eq!(m, Mode::Exact);
    prop_assert!((d - naive_dn(sys, 1, x, y, n)).abs() <= 1e-12, "d_n {} vs {}", d, naive_dn(sys, 1, x, y, n));
    let (ds, m) = d_n_star(sys, x, y, n, &b);
    prop_assert_eq!(m, Mode::Exact);
    let want = naive_dn_star(sys, x, y, n);
    prop_assert!((ds - want).abs() <= 1e-12, "d_n* {} vs {}", ds, want);
    let (s, m) = birkhoff_max(sys, phi, x, n, &b);
    prop_assert_eq!(m, Mode::Exact);
    let want = naive_birkhoff(sys, phi, x, n);
    prop_assert!((s - want).abs() <= 1e-12, "S_n {} vs {}", s, want);
    Ok(())
}

fn symbols() -> impl Strategy<Value = Point> {
    prop::collection::vec(0u8..2, LEN).prop_map(Point::Symbols)
}

/// Pairs that are often close, so that deep orbit differences get exercised.
fn close_reals() -> impl Strategy<Value = (Point, Point)> {
    (0.0..1.0f64, -12i32..0, -1.0..1.0f64).prop_map(|(x, e, t)| {
        let y = (x + t * 2f64.powi(e)).rem_euclid(1.0);
        let y = if y >= 1.0 { 0.0 } else { y };
        (Point::Real(x), Point::Real(y))
    })
}

/// Symbol strings sharing a random-length prefix.
fn close_symbols() -> impl Strategy<Value = (Point, Point)> {
    (symbols(), symbols(), 0..LEN).prop_map(|(a, b, k)| {
        let (Point::Symbols(a), Point::Symbols(mut b)) = (a, b) else { unreachable!() };
        b[..k].copy_from_slice(&a[..k]);
        (Point::Symbols(a), Point::Symbols(b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_shift_zero_potential_matches_enumeration((x, y) in close_symbols(), n in 0usize..=8) {
        check_pair(&two_shift(), &Potential::zero(), &x, &y, n)?;
    }

    #[test]
    fn two_shift_table_potential_matches_enumeration((x, y) in close_symbols(), n in 0usize..=8) {
        check_pair(&two_shift(), &table(), &x, &y, n)?;
    }

    #[test]
    fn circle_pair_matches_enumeration((x, y) in close_reals(), n in 0usize..=8) {
        check_pair(&circle_pair(), &bumpy(), &x, &y, n)?;
    }

    #[test]
    fn circle_periodic_matches_enumeration((x, y) in close_reals(), n in 0usize..=8) {
        check_pair(&circle_periodic(), &bumpy(), &x, &y, n)?;
    }

    #[test]
    fn preamble_schedule_matches_enumeration((x, y) in close_reals(), n in 0usize..=8) {
        check_pair(&circle_mixed(), &bumpy(), &x, &y, n)?;
    }
}

#[test]
fn two_shift_separated_counts_are_cylinder_counts() {
    let sys = two_shift();
    let sample = SampleSet::cylinder_reps(sys.space(), 12, None, 0).unwrap();
    let b = TreeBudget::default();
    for m in 1..=5 {
        for n in 0..=(12 - m) {
            let sep = greedy_separated(&sys, &sample, n, 0.5f64.powi(m as i32), Metric::Dn, &b, &Sequential);
            // distinct prefixes of length n + m among the representatives
            let mut heads: Vec<&[u8]> = sample.points().iter().map(|p| &p.as_symbols().unwrap()[..n + m]).collect();
            heads.sort();
            heads.dedup();
            assert_eq!(sep.len(), heads.len());
            assert_eq!(sep.len(), 1 << (n + m), "n = {n}, m = {m}");
        }
    }
}

#[test]
fn cylinder_sums_of_table_potential() {
    let sys = two_shift();
    let phi = table();
    let b = TreeBudget::default();
    let e = std::f64::consts::E;
    for n in 1..=12 {
        let reps = SampleSet::cylinder_reps(sys.space(), n, None, 0).unwrap();
        let sum: f64 = reps.points().iter().map(|x| birkhoff_max(&sys, &phi, x, n, &b).0.exp()).sum();
        let exact = (1.0 + e).powi(n as i32);
        assert!((sum / exact - 1.0).abs() < 1e-12, "n = {n}: {sum} vs {exact}");
    }
}

/// Greedy separated counts on the grid `k/g` for a circle system built from
/// linear maps `x ↦ a·x mod 1`. Differences evolve independently of the base
/// point, so `d(x_i, x_j)` is a table lookup on `(j − i) mod g`.
fn translation_counts(slopes_at: &dyn Fn(usize) -> Vec<i64>, starts: usize, g: usize, n: usize, eps: f64) -> usize {
    fn walk(slopes_at: &dyn Fn(usize) -> Vec<i64>, t: usize, left: usize, delta: f64, best: &mut f64) {
        let d = delta.abs().min(1.0 - delta.abs());
        *best = best.max(d);
        if left == 0 {
            return;
        }
        for a in slopes_at(t) {
            walk(slopes_at, t + 1, left - 1, (a as f64 * delta).rem_euclid(1.0), best);
        }
    }
    let table: Vec<f64> = (0..g)
        .map(|k| {
            let mut best = 0.0;
            for s in 1..=starts {
                walk(slopes_at, s, n, k as f64 / g as f64, &mut best);
            }
            best
        })
        .collect();
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..g {
        if kept.iter().all(|&j| table[(i + g - j) % g] > eps) {
            kept.push(i);
        }
    }
    kept.len()
}

// 10007 is prime, so no grid difference times a slope product below it lands
// exactly on a dyadic ε; ties in the separation test cannot occur.
const G: usize = 10007;

#[test]
fn circle_pair_counts_match_translation_oracle() {
    let sys = circle_pair();
    let grid = SampleSet::grid(sys.space(), G).unwrap();
    let b = TreeBudget::default();
    for eps in [0.25, 0.125] {
        for n in 1..=8 {
            let lib = greedy_separated(&sys, &grid, n, eps, Metric::Dn, &b, &Sequential);
            let oracle = translation_counts(&|_| vec![2, 3], 1, G, n, eps);
            assert_eq!(lib.len(), oracle, "n = {n}, eps = {eps}");
        }
    }
}

#[test]
fn periodic_counts_match_translation_oracle() {
    let sys = circle_periodic();
    let grid = SampleSet::grid(sys.space(), G).unwrap();
    let b = TreeBudget::default();
    let slopes = |t: usize| if t % 2 == 1 { vec![2] } else { vec![3] };
    for eps in [0.25, 0.125] {
        for n in 1..=8 {
            let lib = greedy_separated(&sys, &grid, n, eps, Metric::DnStar, &b, &Sequential);
            let oracle = translation_counts(&slopes, 2, G, n, eps);
            assert_eq!(lib.len(), oracle, "n = {n}, eps = {eps}");
        }
    }
}

#[test]
fn periodic_expansion_products() {
    // largest slope product over n steps from either start
    let product = |n: usize| -> f64 {
        (0..2).map(|s| (0..n).map(|t| if (s + t) % 2 == 0 { 2.0 } else { 3.0 }).product::<f64>()).fold(0.0, f64::max)
    };
    let rate = product(10).ln() / 10.0;
    assert!((rate - 6f64.ln() / 2.0).abs() < 1e-12);
    let sys = circle_periodic();
    let grid = SampleSet::grid(sys.space(), 1 << 17).unwrap();
    let est = sup_entropy(&sys, &grid, &[2, 4, 6, 8, 10], &[0.5, 0.25], Metric::DnStar, &TreeBudget::default(), &Sequential)
        .unwrap();
    assert!((est.value - rate).abs() < 0.1, "{} vs {rate}", est.value);
}
