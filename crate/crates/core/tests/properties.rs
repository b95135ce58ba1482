use naifs_pressure::counting::{greedy_separated, greedy_spanning, vitali_subfamily, Ball};
use naifs_pressure::measures::{
    ball_measure, measure_pressure, BorelMeasure, Generator, Integration, MeasureParams,
};
use naifs_pressure::metrics::{birkhoff_ball_sup, birkhoff_max, d_n, d_n_star, within};
use naifs_pressure::pressure::{cover_cost_m, cover_cost_r, pressure_suite, CoverParams};
use naifs_pressure::{
    MapSpec, Metric, NaifsSystem, Point, Potential, SampleSet, Sequential, StateSpace, TreeBudget, Word,
};
use proptest::prelude::*;

fn shift(len: usize) -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: len }, vec![MapSpec::shift(0)]).unwrap()
}

fn circle_pair() -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.0)]).unwrap()
}

fn mixed() -> NaifsSystem {
    NaifsSystem::new(
        StateSpace::Circle,
        vec![vec![MapSpec::affine_mod1(3, 0.25)], vec![MapSpec::affine_mod1(2, 0.0)]],
        vec![vec![MapSpec::affine_mod1(2, 0.1)], vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.5)]],
    )
    .unwrap()
}

fn bumpy() -> Potential {
    Potential::grid(8, vec![0.0, 0.7, -0.2, 1.1, 0.4, -0.6, 0.9, 0.3])
}

fn real() -> impl Strategy<Value = Point> {
    (0.0..1.0f64).prop_map(Point::Real)
}

fn symbols(len: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(0u8..2, len).prop_map(Point::Symbols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbits_stay_in_space(x in real(), word in prop::collection::vec(0usize..2, 0..12)) {
        let sys = mixed();
        let w: Vec<usize> = word.iter().enumerate().map(|(t, &i)| i % sys.family_at(1 + t).len()).collect();
        let orbit = sys.orbit(&x, &Word::new(1, w)).unwrap();
        for p in &orbit {
            prop_assert!(sys.space().contains(p).is_ok());
        }
    }

    #[test]
    fn base_metric_triangle(a in real(), b in real(), c in real()) {
        let s = StateSpace::Circle;
        prop_assert!(s.distance(&a, &c) <= s.distance(&a, &b) + s.distance(&b, &c) + 1e-12);
    }

    #[test]
    fn symbolic_triangle_and_shift_expansion(a in symbols(12), b in symbols(12), c in symbols(12)) {
        let sys = shift(12);
        let s = sys.space();
        prop_assert!(s.distance(&a, &c) <= s.distance(&a, &b) + s.distance(&b, &c) + 1e-12);
        let m = &sys.family_at(1)[0];
        let (sa, sb) = (m.apply(s, &a), m.apply(s, &b));
        prop_assert!(s.distance(&sa, &sb) <= 2.0 * s.distance(&a, &b));
        let (Point::Symbols(x), Point::Symbols(y)) = (&a, &b) else { unreachable!() };
        if x[0] == y[0] && x != y {
            prop_assert_eq!(s.distance(&sa, &sb), 2.0 * s.distance(&a, &b));
        }
    }

    #[test]
    fn dn_grows_with_n(x in real(), y in real(), n in 0usize..8) {
        let sys = mixed();
        let b = TreeBudget::default();
        prop_assert!(d_n(&sys, &x, &y, n, &b).0 <= d_n(&sys, &x, &y, n + 1, &b).0);
    }

    #[test]
    fn dn_star_dominates(x in real(), y in real(), n in 0usize..8) {
        let b = TreeBudget::default();
        let sys = mixed();
        prop_assert!(d_n_star(&sys, &x, &y, n, &b).0 >= d_n(&sys, &x, &y, n, &b).0);
        let c = circle_pair();
        prop_assert_eq!(d_n_star(&c, &x, &y, n, &b).0, d_n(&c, &x, &y, n, &b).0);
    }

    #[test]
    fn ball_sup_sandwich(x in real(), n in 1usize..6, k in 2u32..6) {
        let sys = circle_pair();
        let phi = bumpy();
        let b = TreeBudget::default();
        let pool = SampleSet::grid(sys.space(), 97).unwrap();
        let delta = 0.5f64.powi(k as i32);
        let s = birkhoff_max(&sys, &phi, &x, n, &b).0;
        let sup = birkhoff_ball_sup(&sys, &phi, &x, n, delta, pool.points(), &b).0;
        let smaller = birkhoff_ball_sup(&sys, &phi, &x, n, delta / 2.0, pool.points(), &b).0;
        prop_assert!(s <= sup);
        prop_assert!(sup <= s + n as f64 * phi.modulus(sys.space(), delta) + 1e-12);
        prop_assert!(smaller <= sup);
    }

    #[test]
    fn potential_shift_moves_sums(x in real(), n in 1usize..7, c in -2.0..2.0f64) {
        let sys = mixed();
        let phi = bumpy();
        let b = TreeBudget::default();
        let s = birkhoff_max(&sys, &phi, &x, n, &b).0;
        let t = birkhoff_max(&sys, &phi.shifted(c), &x, n, &b).0;
        prop_assert!((t - s - n as f64 * c).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_ball_monotone(x in symbols(14), n in 0usize..6, m in 1u32..6, p in 0.05..0.95f64) {
        let sys = shift(14);
        let mu = BorelMeasure::bernoulli(vec![1.0 - p, p]);
        let b = TreeBudget::default();
        let r = 0.5f64.powi(m as i32);
        let here = ball_measure(&sys, &mu, &x, n, r, &b).unwrap().mass;
        prop_assert!(ball_measure(&sys, &mu, &x, n, 2.0 * r, &b).unwrap().mass >= here);
        prop_assert!(ball_measure(&sys, &mu, &x, n + 1, r, &b).unwrap().mass <= here);
    }

    #[test]
    fn sampled_ball_monotone(seed in 0u64..1000, n in 0usize..5, k in 1u32..5) {
        let sys = circle_pair();
        let mu = BorelMeasure::sampled(sys.space(), Generator::Uniform, 200, seed).unwrap();
        let b = TreeBudget::default();
        let x = Point::Real(0.3);
        let r = 0.5f64.powi(k as i32);
        let here = ball_measure(&sys, &mu, &x, n, r, &b).unwrap().mass;
        prop_assert!(ball_measure(&sys, &mu, &x, n, 1.5 * r, &b).unwrap().mass >= here);
        prop_assert!(ball_measure(&sys, &mu, &x, n + 1, r, &b).unwrap().mass <= here);
    }
}

#[test]
fn bernoulli_ball_matches_string_sums() {
    let sys = shift(16);
    let p = 0.3;
    let mu = BorelMeasure::bernoulli(vec![1.0 - p, p]);
    let b = TreeBudget::default();
    let x = Point::Symbols(vec![1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 0]);
    for n in 0..8 {
        for m in 1..=(15 - n) {
            let len = n + m + 1;
            let r = 0.5f64.powi(m as i32);
            // every string of length `len`, padded, tested for ball membership
            let mut sum = 0.0;
            for code in 0u32..(1 << len) {
                let mut s: Vec<u8> = (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect();
                let w: f64 = s.iter().map(|&c| if c == 1 { p } else { 1.0 - p }).product();
                s.resize(16, 0);
                if within(&sys, Metric::Dn, &x, &Point::Symbols(s), n, r, false, &b).is_inside() {
                    sum += w;
                }
            }
            let lib = ball_measure(&sys, &mu, &x, n, r, &b).unwrap().mass;
            assert!((lib - sum).abs() < 1e-12, "n = {n}, m = {m}: {lib} vs {sum}");
        }
    }
}

#[test]
fn spanning_separated_duality() {
    let b = TreeBudget::default();
    let cases: Vec<(NaifsSystem, SampleSet)> = vec![
        (circle_pair(), SampleSet::grid(&StateSpace::Circle, 400).unwrap()),
        (mixed(), SampleSet::grid(&StateSpace::Circle, 300).unwrap()),
        (shift(10), SampleSet::cylinder_reps(&StateSpace::Symbolic { alphabet: 2, length: 10 }, 8, None, 0).unwrap()),
    ];
    for (sys, sample) in &cases {
        for n in 1..4 {
            for eps in [0.25, 0.125] {
                let span = greedy_spanning(sys, sample, n, eps, Metric::Dn, &b, &Sequential).unwrap().len();
                let sep = greedy_separated(sys, sample, n, eps, Metric::Dn, &b, &Sequential).len();
                let span_half = greedy_spanning(sys, sample, n, eps / 2.0, Metric::Dn, &b, &Sequential).unwrap().len();
                assert!(span <= sep && sep <= span_half, "{span} {sep} {span_half}");
            }
        }
    }
}

#[test]
fn ultrametric_counts_ignore_order() {
    let sys = shift(10);
    let sample = SampleSet::cylinder_reps(sys.space(), 9, None, 1).unwrap();
    let mut pts = sample.points().to_vec();
    pts.reverse();
    pts.rotate_left(37);
    let shuffled = SampleSet::from_points(sys.space(), pts, sample.density()).unwrap();
    let b = TreeBudget::default();
    for n in 0..5 {
        for eps in [0.5, 0.25, 0.0625] {
            let a = greedy_separated(&sys, &sample, n, eps, Metric::Dn, &b, &Sequential).len();
            let c = greedy_separated(&sys, &shuffled, n, eps, Metric::Dn, &b, &Sequential).len();
            assert_eq!(a, c);
        }
    }
}

#[test]
fn vitali_selection_is_disjoint() {
    let sys = circle_pair();
    let b = TreeBudget::default();
    let (n, r) = (2, 0.02);
    let balls: Vec<Ball> =
        (0..60).map(|i| Ball { center: Point::Real((i as f64 * 0.0173) % 1.0), n, radius: r }).collect();
    let sel = vitali_subfamily(&sys, &balls, 3.0, &b).unwrap();
    for (k, &i) in sel.selected.iter().enumerate() {
        for &j in &sel.selected[k + 1..] {
            assert!(d_n(&sys, &balls[i].center, &balls[j].center, n, &b).0 > 2.0 * r);
        }
    }
}

#[test]
fn costs_decrease_in_alpha() {
    let sys = shift(14);
    let z = SampleSet::cylinder_reps(sys.space(), 10, None, 0).unwrap();
    let phi = Potential::symbol_table(vec![0.0, 1.0]);
    let b = TreeBudget::default();
    let alphas = [-1.0, 0.0, 0.5, 1.0, 1.3, 2.0];
    for w in alphas.windows(2) {
        let m0 = cover_cost_m(&sys, &z, &phi, w[0], 0.25, 3, 6, &z, &b, &Sequential).unwrap();
        let m1 = cover_cost_m(&sys, &z, &phi, w[1], 0.25, 3, 6, &z, &b, &Sequential).unwrap();
        assert!(m1 < m0);
        let r0 = cover_cost_r(&sys, &z, &phi, w[0], 0.25, 4, &z, &b, &Sequential).unwrap();
        let r1 = cover_cost_r(&sys, &z, &phi, w[1], 0.25, 4, &z, &b, &Sequential).unwrap();
        assert!(r1 < r0);
    }
}

fn small_suite(sys: &NaifsSystem, z: &SampleSet, pool: &SampleSet, phi: &Potential) -> (f64, f64, f64) {
    let params = CoverParams { window: 3, ..Default::default() };
    let s = pressure_suite(sys, z, pool, phi, &[0.5, 0.25, 0.125], &[3, 4, 5, 6], &params, &Sequential).unwrap();
    (s.pp.value, s.cp_lower.value, s.cp_upper.value)
}

#[test]
fn subset_union_and_swap() {
    let sys = shift(16);
    let space = sys.space().clone();
    let tol = 2.0 * CoverParams::default().tol;
    let phi = Potential::symbol_table(vec![0.0, 1.0]);
    let pool = SampleSet::cylinder_reps(&space, 12, None, 0).unwrap();
    let cyl = |p: &[&[u8]]| {
        let v: Vec<Vec<u8>> = p.iter().map(|w| w.to_vec()).collect();
        SampleSet::cylinder_reps(&space, 12, Some(&v), 0).unwrap()
    };
    let fixed = SampleSet::from_points(&space, vec![Point::Symbols(vec![0; 16])], 0.0).unwrap();
    let z01 = cyl(&[&[0, 1]]);
    let z0 = cyl(&[&[0]]);
    let z11 = cyl(&[&[1, 1]]);
    let union = z01.union(&space, &z11);
    let p_fixed = small_suite(&sys, &fixed, &pool, &phi);
    let p01 = small_suite(&sys, &z01, &pool, &phi);
    let p0 = small_suite(&sys, &z0, &pool, &phi);
    let p11 = small_suite(&sys, &z11, &pool, &phi);
    let pu = small_suite(&sys, &union, &pool, &phi);
    assert!(p_fixed.0.abs() < 0.05, "{p_fixed:?}");
    assert!(p_fixed.0 <= p0.0 + tol && p01.0 <= p0.0 + tol);
    assert!(p_fixed.1 <= p0.1 + 0.02 && p01.1 <= p0.1 + 0.02);
    assert!(p_fixed.2 <= p0.2 + 0.02 && p01.2 <= p0.2 + 0.02);
    let hi = p01.0.max(p11.0);
    assert!(pu.0 >= hi - tol && pu.0 <= hi + tol, "{pu:?} vs {hi}");
    for p in [p_fixed, p01, p0, p11, pu] {
        assert!(p.0 <= p.1 + tol && p.1 <= p.2 + tol, "{p:?}");
    }
    // swapping the symbols maps [0,1] to [1,0] and the table (0,1) to (1,0)
    let swap = |p: &Point| Point::Symbols(p.as_symbols().unwrap().iter().map(|c| 1 - c).collect());
    let swapped = z01.map_points(&space, swap).unwrap();
    let pool_swapped = pool.map_points(&space, swap).unwrap();
    let q = small_suite(&sys, &swapped, &pool_swapped, &Potential::symbol_table(vec![1.0, 0.0]));
    assert!((q.0 - p01.0).abs() <= tol, "{q:?} vs {p01:?}");
}

#[test]
fn potential_shift_moves_measure_pressure() {
    let sys = shift(64);
    let mu = BorelMeasure::bernoulli(vec![0.4, 0.6]);
    let params = MeasureParams {
        r_grid: vec![0.5, 0.25],
        n_window: (20, 40),
        integration: Integration::MonteCarlo { count: 12, seed: 3 },
        budget: TreeBudget::default(),
    };
    let phi = Potential::symbol_table(vec![0.2, -0.5]);
    let a = measure_pressure(&sys, &mu, &phi, &params, &Sequential).unwrap();
    let b = measure_pressure(&sys, &mu, &phi.shifted(0.75), &params, &Sequential).unwrap();
    assert!((b.value - a.value - 0.75).abs() < 1e-9);
    let again = measure_pressure(&sys, &mu, &phi, &params, &Sequential).unwrap();
    assert_eq!(a.value.to_bits(), again.value.to_bits());
}
