//! The acceptance suite: twelve criteria on four reference instances.
//!
//! 1. full 2-shift, φ = 0
//! 2. full 2-shift, φ = first-symbol table (0, 1)
//! 3. the constant pair {x ↦ 2x, x ↦ 3x} on the circle, φ = 0
//! 4. the period-2 schedule ({x ↦ 2x}, {x ↦ 3x}), φ = 0

use std::f64::consts::{E, LN_2};
use std::time::Instant;

use naifs_pressure::counting::{greedy_separated, sup_entropy, EntropyEstimate};
use naifs_pressure::measures::{
    theorem1_bounds_check_with, variational_gap_with, BorelMeasure, Integration, MeasureParams, Theorem1Report,
    VariationalReport,
};
use naifs_pressure::metrics::{birkhoff_max, d_n, d_n_star};
use naifs_pressure::pressure::{pressure_suite, sandwich_check_wm, CoverParams, PressureSuite, SandwichReport};
use naifs_pressure::{
    MapSpec, Metric, Mode, NaifsSystem, Point, Potential, SampleSet, StateSpace, TargetSet, TreeBudget,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::app;
use crate::cache::Cache;
use crate::config;
use crate::exec::Workers;
use crate::oracle;

/// The bundled check-suite configuration.
pub const CHECK_SUITE_CONFIG: &str = include_str!("../configs/two_shift_check_suite.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2}: {verdict}  {} ({:.1} s)  {}", self.id, self.title, self.seconds, self.detail)
    }
}

const SHIFT_LEN: usize = 20;
const ENTROPY_REPS: usize = 14;
const SUITE_REPS: usize = 16;
const SANDWICH_REPS: usize = 14;
const DYADIC: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];
const SHIFT_N_GRID: [usize; 4] = [3, 4, 5, 6];
const CIRCLE_GRID: usize = 1 << 17;
const ORACLE_GRID: usize = 10007;
const MEASURE_LEN: usize = 306;

fn shift(len: usize) -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: len }, vec![MapSpec::shift(0)])
        .expect("valid shift")
}

fn circle_pair() -> NaifsSystem {
    NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.0)])
        .expect("valid pair")
}

fn circle_periodic() -> NaifsSystem {
    let period = vec![vec![MapSpec::affine_mod1(2, 0.0)], vec![MapSpec::affine_mod1(3, 0.0)]];
    NaifsSystem::new(StateSpace::Circle, vec![], period).expect("valid schedule")
}

fn table() -> Potential {
    Potential::symbol_table(vec![0.0, 1.0])
}

fn cover_params() -> CoverParams {
    CoverParams { window: 3, ..CoverParams::default() }
}

fn tol2() -> f64 {
    2.0 * cover_params().tol
}

fn reps(sys: &NaifsSystem, len: usize) -> SampleSet {
    SampleSet::cylinder_reps(sys.space(), len, None, 0).expect("cylinder reps")
}

fn arc(sys: &NaifsSystem) -> SampleSet {
    SampleSet::segment(sys.space(), 0.3, 0.01, 400).expect("arc sample")
}

fn near(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

/// One cover-based instance: system, potential, `Z` and the ball pool.
struct CoverInstance {
    name: &'static str,
    sys: NaifsSystem,
    phi: Potential,
    z: SampleSet,
    deltas: Vec<f64>,
    sandwich_alphas: Vec<f64>,
    sandwich_deltas: Vec<f64>,
    sandwich_z: SampleSet,
}

fn instances() -> Vec<CoverInstance> {
    let s = shift(SHIFT_LEN);
    let z = reps(&s, SUITE_REPS);
    let zs = reps(&s, SANDWICH_REPS);
    let pair = circle_pair();
    let per = circle_periodic();
    vec![
        CoverInstance {
            name: "2-shift phi=0",
            sys: s.clone(),
            phi: Potential::zero(),
            z: z.clone(),
            deltas: DYADIC.to_vec(),
            sandwich_alphas: vec![0.69],
            sandwich_deltas: vec![1.0 / 32.0, 1.0 / 64.0],
            sandwich_z: zs.clone(),
        },
        CoverInstance {
            name: "2-shift table",
            sys: s,
            phi: table(),
            z,
            deltas: DYADIC.to_vec(),
            sandwich_alphas: vec![1.31],
            sandwich_deltas: vec![1.0 / 32.0, 1.0 / 64.0],
            sandwich_z: zs,
        },
        CoverInstance {
            name: "circle {E2,E3}",
            z: arc(&pair),
            sandwich_z: arc(&pair),
            sys: pair,
            phi: Potential::zero(),
            deltas: vec![0.125, 0.0625],
            sandwich_alphas: vec![1.1],
            sandwich_deltas: vec![1.0 / 32.0],
        },
        CoverInstance {
            name: "circle ({E2},{E3})",
            z: arc(&per),
            sandwich_z: arc(&per),
            sys: per,
            phi: Potential::zero(),
            deltas: vec![0.125, 0.0625],
            sandwich_alphas: vec![0.9],
            sandwich_deltas: vec![1.0 / 32.0],
        },
    ]
}

struct Computed {
    entropy: Vec<Option<EntropyEstimate>>,
    /// Time spent on the entropy and pressure estimates of instance 1.
    first_seconds: f64,
    suites: Vec<Result<PressureSuite, String>>,
    sandwich: Vec<Result<Vec<SandwichReport>, String>>,
}

fn entropy_of(sys: &NaifsSystem, sample: &SampleSet, ns: &[usize], eps: &[f64], metric: Metric, exec: &Workers) -> Option<EntropyEstimate> {
    sup_entropy(sys, sample, ns, eps, metric, &TreeBudget::default(), exec).ok()
}

fn suite_of(inst: &CoverInstance, exec: &Workers) -> Result<PressureSuite, String> {
    pressure_suite(&inst.sys, &inst.z, &inst.z, &inst.phi, &inst.deltas, &SHIFT_N_GRID, &cover_params(), exec)
        .map_err(|e| e.to_string())
}

fn sandwich_of(inst: &CoverInstance, exec: &Workers) -> Result<Vec<SandwichReport>, String> {
    let mut out = Vec::new();
    for &alpha in &inst.sandwich_alphas {
        for &delta in &inst.sandwich_deltas {
            let z = &inst.sandwich_z;
            let rep = sandwich_check_wm(&inst.sys, z, &inst.phi, alpha, 0.2, delta, &[6, 7, 8], 6, z, &cover_params(), exec)
                .map_err(|e| e.to_string())?;
            out.push(rep);
        }
    }
    Ok(out)
}

fn criterion(id: usize, title: &'static str, started: Instant, passed: bool, detail: String) -> Criterion {
    Criterion { id, title, passed, detail, seconds: started.elapsed().as_secs_f64() }
}

fn c1(comp: &Computed) -> (bool, String) {
    let s = shift(SHIFT_LEN);
    let sample = reps(&s, 12);
    let b = TreeBudget::default();
    let mut oracle_ok = true;
    for m in 1..=5 {
        for n in 0..=(12 - m) {
            let sep = greedy_separated(&s, &sample, n, 0.5f64.powi(m as i32), Metric::Dn, &b, &Workers::new(1).expect("workers"));
            oracle_ok &= sep.len() == 1 << (n + m);
        }
    }
    let (h, p) = match (&comp.entropy[0], &comp.suites[0]) {
        (Some(h), Ok(p)) => (h.value, p.pp.value),
        _ => return (false, "estimates failed".into()),
    };
    let ok = near(h, LN_2, 0.05) && near(p, LN_2, 0.05) && oracle_ok && comp.first_seconds < 60.0;
    (ok, format!("entropy {h:.4}, pp {p:.4}, log 2 = {LN_2:.4}; cylinder counts exact: {oracle_ok}; {:.1} s", comp.first_seconds))
}

fn c2(comp: &Computed) -> (bool, String) {
    let s = shift(SHIFT_LEN);
    let phi = table();
    let b = TreeBudget::default();
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let sum: f64 = reps(&s, n).points().iter().map(|x| birkhoff_max(&s, &phi, x, n, &b).0.exp()).sum();
        worst = worst.max((sum / (1.0 + E).powi(n as i32) - 1.0).abs());
    }
    let target = (1.0 + E).ln();
    match &comp.suites[1] {
        Ok(p) => {
            let ok = near(p.pp.value, target, 0.1) && worst < 1e-12;
            (ok, format!("pp {:.4} vs log(1+e) = {target:.4}; cylinder sums rel. error {worst:.1e}", p.pp.value))
        }
        Err(e) => (false, format!("error: {e}")),
    }
}

fn c3(comp: &Computed) -> (bool, String) {
    let sys = circle_pair();
    let grid = SampleSet::grid(sys.space(), ORACLE_GRID).expect("grid");
    let b = TreeBudget::default();
    let exec = Workers::new(1).expect("workers");
    let mut mismatches = 0;
    for eps in [0.25, 0.125] {
        for n in 1..=8 {
            let lib = greedy_separated(&sys, &grid, n, eps, Metric::Dn, &b, &exec).len();
            if lib != oracle::translation_counts(&|_| vec![2, 3], 1, ORACLE_GRID, n, eps) {
                mismatches += 1;
            }
        }
    }
    let target = 3f64.ln();
    match &comp.entropy[2] {
        Some(h) => {
            let ok = near(h.value, target, 0.1) && h.mode == Mode::Exact && mismatches == 0;
            (ok, format!("entropy {:.4} vs log 3 = {target:.4} ({:?}); oracle mismatches {mismatches}/16", h.value, h.mode))
        }
        None => (false, "estimate failed".into()),
    }
}

fn c4(comp: &Computed) -> (bool, String) {
    let sys = circle_periodic();
    let rate = oracle::max_slope_product(&sys, 10).map(|p| p.ln() / 10.0).unwrap_or(f64::NAN);
    let target = 6f64.ln() / 2.0;
    let grid = SampleSet::grid(sys.space(), ORACLE_GRID).expect("grid");
    let b = TreeBudget::default();
    let exec = Workers::new(1).expect("workers");
    let slopes = |t: usize| if t % 2 == 1 { vec![2] } else { vec![3] };
    let mut mismatches = 0;
    for eps in [0.25, 0.125] {
        for n in 1..=8 {
            let lib = greedy_separated(&sys, &grid, n, eps, Metric::DnStar, &b, &exec).len();
            if lib != oracle::translation_counts(&slopes, 2, ORACLE_GRID, n, eps) {
                mismatches += 1;
            }
        }
    }
    match &comp.entropy[3] {
        Some(h) => {
            let ok = near(h.value, target, 0.1) && near(rate, target, 1e-12) && mismatches == 0;
            (ok, format!("entropy {:.4} vs (log 6)/2 = {target:.4}; product rate {rate:.6}; oracle mismatches {mismatches}/16", h.value))
        }
        None => (false, "estimate failed".into()),
    }
}

fn c5(comp: &Computed, insts: &[CoverInstance]) -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    for (inst, res) in insts.iter().zip(&comp.sandwich) {
        match res {
            Ok(reps) => {
                let v: usize = reps.iter().map(|r| r.violations).sum();
                let rows: usize = reps.iter().map(|r| r.rows.iter().filter(|x| x.counted).count()).sum();
                ok &= v == 0 && rows > 0;
                parts.push(format!("{}: {v} violations in {rows} rows", inst.name));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: error {e}", inst.name));
            }
        }
    }
    (ok, parts.join("; "))
}

fn c6(comp: &Computed) -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in comp.suites[..2].iter() {
        match s {
            Ok(s) => {
                for d in &s.per_delta {
                    let gap = d.pp_prime - d.pp;
                    count += 1;
                    worst = worst.max(gap.abs());
                    ok &= gap >= 0.0 && gap <= d.modulus;
                }
            }
            Err(_) => ok = false,
        }
    }
    (ok, format!("{count} δ values, largest |P' - P| = {worst:.2e}"))
}

fn c7(comp: &Computed, insts: &[CoverInstance]) -> (bool, String) {
    let t = tol2();
    let mut ok = true;
    let mut parts = Vec::new();
    for (inst, s) in insts.iter().zip(&comp.suites) {
        match s {
            Ok(s) => {
                let (a, b, c) = (s.pp.value, s.cp_lower.value, s.cp_upper.value);
                ok &= a <= b + t && b <= c + t;
                parts.push(format!("{}: {a:.4} <= {b:.4} <= {c:.4}", inst.name));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: error {e}", inst.name));
            }
        }
    }
    (ok, parts.join("; "))
}

fn measure_params() -> MeasureParams {
    MeasureParams {
        r_grid: vec![0.5, 0.25, 0.125],
        n_window: (200, 300),
        integration: Integration::MonteCarlo { count: 64, seed: 7 },
        budget: TreeBudget::default(),
    }
}

fn bernoulli_grid() -> Vec<(f64, BorelMeasure)> {
    (1..=19).map(|k| k as f64 * 0.05).map(|p| (p, BorelMeasure::bernoulli(vec![1.0 - p, p]))).collect()
}

fn variational(phi: &Potential, pressure: f64, exec: &Workers) -> Result<VariationalReport, String> {
    let fam: Vec<BorelMeasure> = bernoulli_grid().into_iter().map(|(_, m)| m).collect();
    variational_gap_with(&shift(MEASURE_LEN), &TargetSet::Whole, phi, &fam, &measure_params(), pressure, exec)
        .map_err(|e| e.to_string())
}

fn c8(comp: &Computed, vars: &[Result<VariationalReport, String>]) -> (bool, String) {
    let grid = bernoulli_grid();
    let (v1, v2) = match (&vars[0], &vars[1]) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (false, format!("error: {e}")),
    };
    let p1 = comp.suites[0].as_ref().map(|s| s.pp.value).unwrap_or(f64::NAN);
    let half = v1.values[9].value;
    let ok1 = near(v1.sup, LN_2, 0.05) && near(half, LN_2, 0.05) && near(grid[v1.best].0, 0.5, 0.05 + 1e-9) && (p1 - v1.sup).abs() <= 0.1;
    let star = E / (1.0 + E);
    let p_best = grid[v2.best].0;
    let ok2 = (p_best - star).abs() <= 0.05 && near(v2.sup, (1.0 + E).ln(), 0.1);
    (
        ok1 && ok2,
        format!(
            "instance 1: S(p=0.5) {half:.4}, argmax p {:.2}, |P - S| {:.4}; instance 2: argmax p {p_best:.2} (e/(1+e) = {star:.4}), S {:.4}",
            grid[v1.best].0,
            (p1 - v1.sup).abs(),
            v2.sup
        ),
    )
}

fn c9(vars: &[Result<VariationalReport, String>], comp: &Computed, exec: &Workers) -> (bool, String) {
    let oracle_p = [LN_2, (1.0 + E).ln()];
    let phis = [Potential::zero(), table()];
    let grid = bernoulli_grid();
    let mut ok = true;
    let mut parts = Vec::new();
    for i in 0..2 {
        let (var, suite) = match (&vars[i], &comp.suites[i]) {
            (Ok(v), Ok(s)) => (v, s),
            _ => return (false, "inputs failed".into()),
        };
        let probes = [oracle_p[i] - 0.3, oracle_p[i] + 0.3];
        let rep: Result<Theorem1Report, _> = theorem1_bounds_check_with(
            &shift(MEASURE_LEN),
            &TargetSet::Whole,
            &grid[var.best].1,
            &phis[i],
            &probes,
            &measure_params(),
            suite.pp.value,
            0.05,
            exec,
        );
        match rep {
            Ok(r) => {
                let applied = r.probes.iter().filter(|p| p.part1_applies || p.part2_applies).count();
                ok &= r.violations == 0 && applied == 2;
                parts.push(format!("instance {}: {} violations, {applied}/2 probes applied", i + 1, r.violations));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("instance {}: error {e}", i + 1));
            }
        }
    }
    (ok, parts.join("; "))
}

fn random_point(rng: &mut ChaCha8Rng, space: &StateSpace) -> Point {
    match space {
        StateSpace::Symbolic { alphabet, length } => {
            Point::Symbols((0..*length).map(|_| rng.random_range(0..*alphabet) as u8).collect())
        }
        _ => Point::Real(rng.random::<f64>()),
    }
}

/// A second point close to `x`, so that distances along orbits are not all
/// saturated at the diameter.
fn nearby(rng: &mut ChaCha8Rng, space: &StateSpace, x: &Point) -> Point {
    match (space, x) {
        (StateSpace::Symbolic { alphabet, .. }, Point::Symbols(s)) => {
            let keep = rng.random_range(0..s.len());
            let mut t = s.clone();
            for c in &mut t[keep..] {
                *c = rng.random_range(0..*alphabet) as u8;
            }
            Point::Symbols(t)
        }
        (_, Point::Real(v)) => {
            let scale = 0.5f64.powi(rng.random_range(1..16));
            Point::Real((v + rng.random_range(-1.0..1.0) * scale).rem_euclid(1.0))
        }
        _ => x.clone(),
    }
}

fn c10() -> (bool, String) {
    let systems = [(shift(SHIFT_LEN), Potential::zero()), (shift(SHIFT_LEN), table()), (circle_pair(), Potential::zero()), (circle_periodic(), Potential::zero())];
    let bumpy = Potential::grid(8, vec![0.0, 0.7, -0.2, 1.1, 0.4, -0.6, 0.9, 0.3]);
    let b = TreeBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut inexact = 0;
    let mut cases = 0;
    for (sys, phi) in &systems {
        // φ = 0 makes the Birkhoff comparison trivial on the circle, so a
        // nonconstant grid potential is used there
        let phi = if matches!(sys.space(), StateSpace::Circle) { &bumpy } else { phi };
        for _ in 0..200 {
            let x = random_point(&mut rng, sys.space());
            let y = nearby(&mut rng, sys.space(), &x);
            let n = rng.random_range(0..=8);
            let (a, ma) = d_n(sys, &x, &y, n, &b);
            let (s, ms) = d_n_star(sys, &x, &y, n, &b);
            let (h, mh) = birkhoff_max(sys, phi, &x, n, &b);
            worst = worst
                .max((a - oracle::naive_dn(sys, 1, &x, &y, n)).abs())
                .max((s - oracle::naive_dn_star(sys, &x, &y, n)).abs())
                .max((h - oracle::naive_birkhoff(sys, phi, &x, n)).abs());
            inexact += [ma, ms, mh].iter().filter(|m| **m != Mode::Exact).count();
            cases += 1;
        }
    }
    (worst <= 1e-12 && inexact == 0, format!("{cases} inputs, largest difference {worst:.1e}, inexact results {inexact}"))
}

fn c11(exec: &Workers) -> (bool, String) {
    let sys = shift(16);
    let space = sys.space().clone();
    let t = tol2();
    let phi = table();
    let pool = SampleSet::cylinder_reps(&space, 12, None, 0).expect("pool");
    let cyl = |p: &[&[u8]]| {
        let v: Vec<Vec<u8>> = p.iter().map(|w| w.to_vec()).collect();
        SampleSet::cylinder_reps(&space, 12, Some(&v), 0).expect("cylinder")
    };
    let small = |z: &SampleSet, pool: &SampleSet, phi: &Potential| -> Result<(f64, f64, f64), String> {
        let s = pressure_suite(&sys, z, pool, phi, &[0.5, 0.25, 0.125], &SHIFT_N_GRID, &cover_params(), exec)
            .map_err(|e| e.to_string())?;
        Ok((s.pp.value, s.cp_lower.value, s.cp_upper.value))
    };
    let run = || -> Result<(bool, String), String> {
        let fixed = SampleSet::from_points(&space, vec![Point::Symbols(vec![0; 16])], 0.0).map_err(|e| e.to_string())?;
        let z0 = cyl(&[&[0]]);
        let z01 = cyl(&[&[0, 1]]);
        let z11 = cyl(&[&[1, 1]]);
        let union = z01.union(&space, &z11);
        let p_fixed = small(&fixed, &pool, &phi)?;
        let p0 = small(&z0, &pool, &phi)?;
        let p01 = small(&z01, &pool, &phi)?;
        let p11 = small(&z11, &pool, &phi)?;
        let pu = small(&union, &pool, &phi)?;
        let mono = p_fixed.0 <= p0.0 + t && p01.0 <= p0.0 + t;
        let hi = p01.0.max(p11.0);
        let union_ok = (pu.0 - hi).abs() <= t;
        let swap = |p: &Point| Point::Symbols(p.as_symbols().expect("symbols").iter().map(|c| 1 - c).collect());
        let z_swapped = z01.map_points(&space, swap).map_err(|e| e.to_string())?;
        let pool_swapped = pool.map_points(&space, swap).map_err(|e| e.to_string())?;
        let q = small(&z_swapped, &pool_swapped, &Potential::symbol_table(vec![1.0, 0.0]))?;
        let swap_ok = (q.0 - p01.0).abs() <= t;
        Ok((
            mono && union_ok && swap_ok,
            format!(
                "P(fixed) {:.4} <= P([0,1]) {:.4} <= P([0]) {:.4}; P(union) {:.4} vs max {hi:.4}; swapped {:.4} vs {:.4}",
                p_fixed.0, p01.0, p0.0, pu.0, q.0, p01.0
            ),
        ))
    };
    run().unwrap_or_else(|e| (false, format!("error: {e}")))
}

fn c12() -> (bool, String) {
    let cfg = match config::parse(CHECK_SUITE_CONFIG) {
        Ok(c) => c,
        Err(e) => return (false, format!("bundled config invalid: {e}")),
    };
    let base = std::env::temp_dir().join(format!("naifs-pressure-acceptance-{}", std::process::id()));
    let mut reports = Vec::new();
    for (i, workers) in [1usize, 1, 4].iter().enumerate() {
        let exec = match Workers::new(*workers) {
            Ok(e) => e,
            Err(e) => return (false, e),
        };
        let dir = base.join(format!("run{i}"));
        match app::execute(&cfg, Some(&dir), &exec, &Cache::disabled()) {
            Ok(_) => match std::fs::read(dir.join("report.json")) {
                Ok(bytes) => reports.push(bytes),
                Err(e) => return (false, e.to_string()),
            },
            Err(e) => return (false, e.to_string()),
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    let same_run = reports[0] == reports[1];
    let same_workers = reports[0] == reports[2];
    (same_run && same_workers, format!("two runs identical: {same_run}; 1 vs 4 workers identical: {same_workers}"))
}

pub const TITLES: [&str; 12] = [
    "2-shift entropy and pressure",
    "2-shift table pressure",
    "circle pair entropy",
    "periodic schedule entropy",
    "W/M sandwich",
    "P' - P within the modulus",
    "estimator ordering",
    "variational principle",
    "mass distribution bounds",
    "metrics against naive oracles",
    "monotonicity, union, symbol swap",
    "check-suite determinism",
];

/// Runs all criteria, calling `progress` as each one finishes.
pub fn run_all(exec: &Workers, mut progress: impl FnMut(&Criterion)) -> Vec<Criterion> {
    let mut out = Vec::new();
    let mut emit = |c: Criterion, out: &mut Vec<Criterion>| {
        progress(&c);
        out.push(c);
    };
    let insts = instances();

    let started = Instant::now();
    let s = shift(SHIFT_LEN);
    let ns: Vec<usize> = (3..=8).collect();
    let h1 = entropy_of(&s, &reps(&s, ENTROPY_REPS), &ns, &DYADIC, Metric::DnStar, exec);
    let suite1 = suite_of(&insts[0], exec);
    let first_seconds = started.elapsed().as_secs_f64();
    let mut comp = Computed { entropy: vec![h1, None, None, None], first_seconds, suites: vec![suite1], sandwich: Vec::new() };
    let (ok, d) = c1(&comp);
    emit(criterion(1, TITLES[0], started, ok, d), &mut out);

    let t = Instant::now();
    comp.suites.push(suite_of(&insts[1], exec));
    let (ok, d) = c2(&comp);
    emit(criterion(2, TITLES[1], t, ok, d), &mut out);

    let t = Instant::now();
    let grid = SampleSet::grid(&StateSpace::Circle, CIRCLE_GRID).expect("grid");
    comp.entropy[2] = entropy_of(&circle_pair(), &grid, &ns, &[0.5, 0.25, 0.125], Metric::Dn, exec);
    let (ok, d) = c3(&comp);
    emit(criterion(3, TITLES[2], t, ok, d), &mut out);

    let t = Instant::now();
    comp.entropy[3] = entropy_of(&circle_periodic(), &grid, &[2, 4, 6, 8, 10], &[0.5, 0.25], Metric::DnStar, exec);
    let (ok, d) = c4(&comp);
    emit(criterion(4, TITLES[3], t, ok, d), &mut out);

    let t = Instant::now();
    comp.sandwich = insts.iter().map(|i| sandwich_of(i, exec)).collect();
    let (ok, d) = c5(&comp, &insts);
    emit(criterion(5, TITLES[4], t, ok, d), &mut out);
    let t = Instant::now();
    let (ok, d) = c6(&comp);
    emit(criterion(6, TITLES[5], t, ok, d), &mut out);
    let t = Instant::now();
    comp.suites.extend(insts[2..].iter().map(|i| suite_of(i, exec)));
    let (ok, d) = c7(&comp, &insts);
    emit(criterion(7, TITLES[6], t, ok, d), &mut out);

    let t = Instant::now();
    let phis = [Potential::zero(), table()];
    let vars: Vec<_> = (0..2)
        .map(|i| match &comp.suites[i] {
            Ok(s) => variational(&phis[i], s.pp.value, exec),
            Err(e) => Err(e.clone()),
        })
        .collect();
    let (ok, d) = c8(&comp, &vars);
    emit(criterion(8, TITLES[7], t, ok, d), &mut out);
    let t = Instant::now();
    let (ok, d) = c9(&vars, &comp, exec);
    emit(criterion(9, TITLES[8], t, ok, d), &mut out);
    let t = Instant::now();
    let (ok, d) = c10();
    emit(criterion(10, TITLES[9], t, ok, d), &mut out);
    let t = Instant::now();
    let (ok, d) = c11(exec);
    emit(criterion(11, TITLES[10], t, ok, d), &mut out);
    let t = Instant::now();
    let (ok, d) = c12();
    emit(criterion(12, TITLES[11], t, ok, d), &mut out);
    out
}
