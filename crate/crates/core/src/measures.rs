//! Borel probability measures, Bowen-ball masses and measure-theoretic pressure.
//!
//! The local lower pressure at `x` is approximated by
//! `q(r, n) = (−ln μ(B_n(x, r)) + S_n φ(x)) / n` on a finite grid. The
//! `liminf` in `n` is replaced by the minimum over the upper half of the
//! `n` window and the limit in `r` by the value at the smallest radius.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{ceil, ln, log2, sqrt, wilson_half_width};
use crate::metrics::{birkhoff_profile, within, Membership};
use crate::pressure::{pp_pressure, CoverParams};
use crate::{
    Error, Executor, Metric, Mode, NaifsSystem, Point, Potential, Result, SampleSet, StateSpace, TargetSet,
    TreeBudget,
};

const MASS_TOL: f64 = 1e-9;

/// How a sampled measure draws its points.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Lebesgue on continuous spaces, uniform symbols on symbolic ones.
    Uniform,
    /// I.i.d. symbols with the given probabilities.
    Bernoulli(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BorelMeasure {
    Atomic { points: Vec<Point>, weights: Vec<f64> },
    /// Product measure on a symbolic space.
    Bernoulli { probs: Vec<f64> },
    /// Empirical measure of `count` draws from `generator`.
    Sampled { generator: Generator, count: usize, seed: u64, draws: Vec<Point> },
}

impl BorelMeasure {
    pub fn dirac(p: Point) -> Self {
        BorelMeasure::Atomic { points: vec![p], weights: vec![1.0] }
    }

    /// Equal weights on the given points.
    pub fn uniform_on(points: Vec<Point>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        BorelMeasure::Atomic { points, weights }
    }

    pub fn bernoulli(probs: Vec<f64>) -> Self {
        BorelMeasure::Bernoulli { probs }
    }

    /// Draws `count` points; draw `i` uses stream `i` of a generator keyed by `seed`.
    pub fn sampled(space: &StateSpace, generator: Generator, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidMeasure("sampled measure needs at least one draw".into()));
        }
        if let Generator::Bernoulli(p) = &generator {
            check_probs(space, p)?;
        }
        let draws = (0..count).map(|i| draw_from(space, &generator, &mut stream(seed, i as u64))).collect();
        Ok(BorelMeasure::Sampled { generator, count, seed, draws })
    }

    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        match self {
            BorelMeasure::Atomic { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(Error::InvalidMeasure("atoms and weights must be nonempty and of equal length".into()));
                }
                if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidMeasure("atomic weights must be positive".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidMeasure(format!("atomic weights sum to {total}")));
                }
                points.iter().try_for_each(|p| space.contains(p))
            }
            BorelMeasure::Bernoulli { probs } => check_probs(space, probs),
            BorelMeasure::Sampled { generator, count, draws, .. } => {
                if let Generator::Bernoulli(p) = generator {
                    check_probs(space, p)?;
                }
                if *count == 0 || draws.len() != *count {
                    return Err(Error::InvalidMeasure("sampled measure has no draws".into()));
                }
                draws.iter().try_for_each(|p| space.contains(p))
            }
        }
    }

    /// `μ(Z)`.
    pub fn target_mass(&self, space: &StateSpace, target: &TargetSet) -> Result<f64> {
        target.validate(space)?;
        Ok(match (self, target) {
            (_, TargetSet::Whole) => 1.0,
            (BorelMeasure::Atomic { points, weights }, _) => points
                .iter()
                .zip(weights)
                .filter(|(p, _)| target.contains(space, p))
                .map(|(_, w)| *w)
                .sum(),
            (BorelMeasure::Sampled { draws, .. }, _) => {
                draws.iter().filter(|p| target.contains(space, p)).count() as f64 / draws.len() as f64
            }
            (BorelMeasure::Bernoulli { probs }, TargetSet::Cylinders(_)) => target
                .prefixes()
                .unwrap_or_default()
                .iter()
                .map(|w| w.iter().map(|&c| probs[c as usize]).product::<f64>())
                .sum(),
            // non-atomic unless some symbol has probability 1
            (BorelMeasure::Bernoulli { probs }, TargetSet::Points(pts)) => pts
                .iter()
                .map(|p| p.as_symbols().map(|s| s.iter().map(|&c| probs[c as usize]).product::<f64>()).unwrap_or(0.0))
                .filter(|m| *m >= 1.0 - MASS_TOL)
                .sum::<f64>()
                .min(1.0),
        })
    }
}

fn check_probs(space: &StateSpace, probs: &[f64]) -> Result<()> {
    let StateSpace::Symbolic { alphabet, .. } = *space else {
        return Err(Error::InvalidMeasure("Bernoulli measures need a symbolic space".into()));
    };
    if probs.len() != alphabet {
        return Err(Error::InvalidMeasure(format!("{} probabilities for {alphabet} symbols", probs.len())));
    }
    if probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidMeasure("probabilities must be nonnegative".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidMeasure(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn symbol(probs: &[f64], u: f64) -> u8 {
    let mut acc = 0.0;
    for (c, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return c as u8;
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0) as u8
}

fn draw_from(space: &StateSpace, generator: &Generator, rng: &mut ChaCha8Rng) -> Point {
    match *space {
        StateSpace::Circle => Point::Real(rng.random::<f64>()),
        StateSpace::Interval => Point::Real(rng.random::<f64>()),
        StateSpace::Torus { dim } => Point::Vector((0..dim).map(|_| rng.random::<f64>()).collect()),
        StateSpace::Symbolic { alphabet, length } => {
            let probs = match generator {
                Generator::Bernoulli(p) => p.clone(),
                Generator::Uniform => vec![1.0 / alphabet as f64; alphabet],
            };
            Point::Symbols((0..length).map(|_| symbol(&probs, rng.random::<f64>())).collect())
        }
    }
}

/// One point distributed according to `μ`, from stream `index`.
fn draw_measure(space: &StateSpace, mu: &BorelMeasure, seed: u64, index: u64) -> Point {
    let mut rng = stream(seed, index);
    match mu {
        BorelMeasure::Atomic { points, weights } => {
            let u = rng.random::<f64>();
            let mut acc = 0.0;
            for (p, w) in points.iter().zip(weights) {
                acc += w;
                if u < acc {
                    return p.clone();
                }
            }
            points[points.len() - 1].clone()
        }
        BorelMeasure::Bernoulli { probs } => draw_from(space, &Generator::Bernoulli(probs.clone()), &mut rng),
        BorelMeasure::Sampled { draws, .. } => draws[(rng.random::<u64>() % draws.len() as u64) as usize].clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BallMass {
    pub mass: f64,
    /// Wilson half-width for sampled measures, 0 otherwise.
    pub half_width: f64,
    pub mode: Mode,
}

/// `μ(B_n(x, r))` with `B_n(x, r) = {y : d_n(x, y) < r}`.
pub fn ball_measure(
    sys: &NaifsSystem,
    mu: &BorelMeasure,
    x: &Point,
    n: usize,
    r: f64,
    budget: &TreeBudget,
) -> Result<BallMass> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let space = sys.space();
    space.contains(x)?;
    let inside = |y: &Point| within(sys, Metric::Dn, x, y, n, r, false, budget);
    match mu {
        BorelMeasure::Atomic { points, weights } => {
            let mut mass = 0.0;
            let mut mode = Mode::Exact;
            for (y, w) in points.iter().zip(weights) {
                match inside(y) {
                    Membership::Inside => mass += w,
                    Membership::Uncertain => mode = Mode::LowerBound,
                    Membership::Outside => {}
                }
            }
            Ok(BallMass { mass, half_width: 0.0, mode })
        }
        BorelMeasure::Bernoulli { probs } => {
            if r > 1.0 {
                return Ok(BallMass { mass: 1.0, half_width: 0.0, mode: Mode::Exact });
            }
            let m = -log2(r);
            let mi = libm::round(m);
            if (m - mi).abs() > 1e-12 {
                return Err(Error::NonDyadicRadius(r));
            }
            let len = n + mi as usize + 1;
            let s = x.as_symbols().ok_or_else(|| Error::InvalidPoint("expected a symbol sequence".into()))?;
            if len > s.len() {
                return Err(Error::InvalidArgument(format!(
                    "ball fixes {len} symbols but the stored length is {}",
                    s.len()
                )));
            }
            let mass = s[..len].iter().map(|&c| probs[c as usize]).product();
            Ok(BallMass { mass, half_width: 0.0, mode: Mode::Exact })
        }
        BorelMeasure::Sampled { draws, .. } => {
            let mut hits = 0;
            let mut mode = Mode::Exact;
            for y in draws {
                match inside(y) {
                    Membership::Inside => hits += 1,
                    Membership::Uncertain => mode = Mode::LowerBound,
                    Membership::Outside => {}
                }
            }
            Ok(BallMass {
                mass: hits as f64 / draws.len() as f64,
                half_width: wilson_half_width(hits, draws.len()),
                mode,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalPressureValue {
    pub point: Point,
    pub r_grid: Vec<f64>,
    pub n_window: (usize, usize),
    /// `q(r, n)` for every radius (rows) and `n` in the window (columns).
    pub table: Vec<Vec<f64>>,
    /// Minimum of each row over the upper half of the window.
    pub liminf: Vec<f64>,
    /// `liminf` at the smallest radius.
    pub limit: f64,
    /// Whether the last two radii agree to within 0.02.
    pub stabilized: bool,
    /// Some ball had zero mass, so the value is `+∞`.
    pub undersampled: bool,
    pub mode: Mode,
}

fn check_window(r_grid: &[f64], n_window: (usize, usize)) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0)) || r_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("radius grid must be positive and strictly decreasing".into()));
    }
    let (lo, hi) = n_window;
    if lo == 0 || hi < lo + 4 {
        return Err(Error::InvalidArgument("n window must satisfy 1 ≤ n_lo and n_hi − n_lo ≥ 4".into()));
    }
    Ok(())
}

/// Approximates `lim_{r→0} liminf_n (−ln μ(B_n(x, r)) + S_n φ(x)) / n`.
pub fn local_lower_pressure(
    sys: &NaifsSystem,
    mu: &BorelMeasure,
    phi: &Potential,
    x: &Point,
    r_grid: &[f64],
    n_window: (usize, usize),
    budget: &TreeBudget,
) -> Result<LocalPressureValue> {
    check_window(r_grid, n_window)?;
    phi.validate(sys.space())?;
    let (lo, hi) = n_window;
    let (profile, mut mode) = birkhoff_profile(sys, phi, x, hi, budget);
    let tail_from = lo + ceil((hi - lo) as f64 / 2.0) as usize;
    let mut table = Vec::with_capacity(r_grid.len());
    let mut liminf = Vec::with_capacity(r_grid.len());
    let mut undersampled = false;
    for &r in r_grid {
        let mut row = Vec::with_capacity(hi - lo + 1);
        for n in lo..=hi {
            let b = ball_measure(sys, mu, x, n, r, budget)?;
            mode = mode.and(b.mode);
            let q = if b.mass > 0.0 {
                (-ln(b.mass) + profile[n - 1]) / n as f64
            } else {
                undersampled = true;
                f64::INFINITY
            };
            row.push(q);
        }
        liminf.push(row[tail_from - lo..].iter().copied().fold(f64::INFINITY, f64::min));
        table.push(row);
    }
    let k = liminf.len();
    let limit = liminf[k - 1];
    let stabilized = k >= 2 && (liminf[k - 1] - liminf[k - 2]).abs() < 0.02;
    Ok(LocalPressureValue {
        point: x.clone(),
        r_grid: r_grid.to_vec(),
        n_window,
        table,
        liminf,
        limit,
        stabilized,
        undersampled,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Integration {
    /// Weighted sum over the atoms of an atomic measure.
    ExactAtomic,
    /// Mean over `count` i.i.d. draws from `μ`.
    MonteCarlo { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureParams {
    pub r_grid: Vec<f64>,
    pub n_window: (usize, usize),
    pub integration: Integration,
    pub budget: TreeBudget,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurePressure {
    pub value: f64,
    /// Standard error of the Monte Carlo mean (0 for exact integration).
    pub std_error: f64,
    pub samples: usize,
    pub undersampled: usize,
    pub unstabilized: usize,
    pub mode: Mode,
}

/// `∫ P̲_μ(x) dμ(x)` with the local values from [`local_lower_pressure`].
pub fn measure_pressure<E: Executor>(
    sys: &NaifsSystem,
    mu: &BorelMeasure,
    phi: &Potential,
    params: &MeasureParams,
    exec: &E,
) -> Result<MeasurePressure> {
    let space = sys.space();
    mu.validate(space)?;
    check_window(&params.r_grid, params.n_window)?;
    let (points, weights): (Vec<Point>, Vec<f64>) = match (params.integration, mu) {
        (Integration::ExactAtomic, BorelMeasure::Atomic { points, weights }) => (points.clone(), weights.clone()),
        (Integration::ExactAtomic, _) => {
            return Err(Error::InvalidArgument("exact integration needs an atomic measure".into()))
        }
        (Integration::MonteCarlo { count, seed }, _) => {
            if count == 0 {
                return Err(Error::InvalidArgument("Monte Carlo count must be positive".into()));
            }
            let pts = (0..count as u64).map(|i| draw_measure(space, mu, seed, i)).collect();
            (pts, vec![1.0 / count as f64; count])
        }
    };
    let locals = exec.map(&points, |x| {
        local_lower_pressure(sys, mu, phi, x, &params.r_grid, params.n_window, &params.budget)
    });
    let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
    let value: f64 = locals.iter().zip(&weights).map(|(l, w)| w * l.limit).sum();
    let std_error = match params.integration {
        Integration::MonteCarlo { count, .. } if count > 1 && value.is_finite() => {
            let var = locals.iter().map(|l| (l.limit - value) * (l.limit - value)).sum::<f64>() / (count - 1) as f64;
            sqrt(var / count as f64)
        }
        _ => 0.0,
    };
    Ok(MeasurePressure {
        value,
        std_error,
        samples: points.len(),
        undersampled: locals.iter().filter(|l| l.undersampled).count(),
        unstabilized: locals.iter().filter(|l| !l.stabilized).count(),
        mode: Mode::all(locals.iter().map(|l| l.mode)),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrostmanViolation {
    pub point: usize,
    pub n: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrostmanReport {
    pub checked: usize,
    pub violations: Vec<FrostmanViolation>,
    /// Smallest `ln((1/c) e^{−αn + S_n φ(x)}) − ln μ(B_n(x, ε))` seen.
    pub worst_slack: f64,
    pub mode: Mode,
}

/// Tests `μ(B_n(x, ε)) ≤ (1/c) exp(−αn + S_n φ(x))` for every `x` in `k` and
/// `n ∈ [n, n_max]`, in the log domain with tolerance `1e-9`.
#[allow(clippy::too_many_arguments)]
pub fn frostman_inequality_check(
    sys: &NaifsSystem,
    mu: &BorelMeasure,
    k: &SampleSet,
    phi: &Potential,
    alpha: f64,
    eps: f64,
    n: usize,
    n_max: usize,
    c: f64,
    budget: &TreeBudget,
) -> Result<FrostmanReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    let mut report = FrostmanReport { checked: 0, violations: Vec::new(), worst_slack: f64::INFINITY, mode: Mode::Exact };
    for (i, x) in k.points().iter().enumerate() {
        let (profile, m) = birkhoff_profile(sys, phi, x, n_max, budget);
        report.mode = report.mode.and(m);
        for len in n..=n_max {
            let b = ball_measure(sys, mu, x, len, eps, budget)?;
            report.mode = report.mode.and(b.mode);
            let s = if len == 0 { 0.0 } else { profile[len - 1] };
            let slack = -ln(c) - alpha * len as f64 + s - ln(b.mass);
            report.checked += 1;
            report.worst_slack = report.worst_slack.min(slack);
            if slack < -1e-9 {
                report.violations.push(FrostmanViolation { point: i, n: len, slack });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariationalReport {
    pub values: Vec<MeasurePressure>,
    pub best: usize,
    /// `S`: the largest measure pressure in the family.
    pub sup: f64,
    /// `P`: the cover-based pressure of `Z`.
    pub pressure: f64,
    pub gap: f64,
}

/// Compares `sup_μ P̲_μ` over `family` with a precomputed pressure of the target.
pub fn variational_gap_with<E: Executor>(
    sys: &NaifsSystem,
    target: &TargetSet,
    phi: &Potential,
    family: &[BorelMeasure],
    params: &MeasureParams,
    pressure: f64,
    exec: &E,
) -> Result<VariationalReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("measure family is empty".into()));
    }
    let mut values = Vec::with_capacity(family.len());
    for mu in family {
        let mass = mu.target_mass(sys.space(), target)?;
        if mass < 1.0 - MASS_TOL {
            return Err(Error::MeasureNotOnTarget { mass });
        }
        values.push(measure_pressure(sys, mu, phi, params, exec)?);
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.value > values[best].value {
            best = i;
        }
    }
    let sup = values[best].value;
    Ok(VariationalReport { values, best, sup, pressure, gap: pressure - sup })
}

/// [`variational_gap_with`] with the pressure computed by [`pp_pressure`] on `z`.
#[allow(clippy::too_many_arguments)]
pub fn variational_gap<E: Executor>(
    sys: &NaifsSystem,
    target: &TargetSet,
    z: &SampleSet,
    pool: &SampleSet,
    phi: &Potential,
    family: &[BorelMeasure],
    params: &MeasureParams,
    delta_grid: &[f64],
    n_grid: &[usize],
    cover: &CoverParams,
    exec: &E,
) -> Result<VariationalReport> {
    let p = pp_pressure(sys, z, phi, delta_grid, n_grid, pool, cover, exec)?;
    variational_gap_with(sys, target, phi, family, params, p.value, exec)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeResult {
    pub s: f64,
    /// Every sampled local value is `≤ s`, so the pressure must be `≤ s`.
    pub part1_applies: bool,
    pub part1_holds: bool,
    /// Every sampled local value is `≥ s` and `μ(Z) > 0`, so the pressure must be `≥ s`.
    pub part2_applies: bool,
    pub part2_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Theorem1Report {
    pub pressure: f64,
    pub target_mass: f64,
    pub local_min: f64,
    pub local_max: f64,
    pub probes: Vec<ProbeResult>,
    pub violations: usize,
    pub note: Option<String>,
}

/// Checks both mass-distribution implications at every probe exponent against
/// the pressure estimate `pressure`, with local values taken at points of `Z`
/// drawn from `μ` (or at its atoms).
#[allow(clippy::too_many_arguments)]
pub fn theorem1_bounds_check_with<E: Executor>(
    sys: &NaifsSystem,
    target: &TargetSet,
    mu: &BorelMeasure,
    phi: &Potential,
    probes: &[f64],
    params: &MeasureParams,
    pressure: f64,
    tol: f64,
    exec: &E,
) -> Result<Theorem1Report> {
    let space = sys.space();
    mu.validate(space)?;
    let mass = mu.target_mass(space, target)?;
    let pts: Vec<Point> = match (params.integration, mu) {
        (Integration::ExactAtomic, BorelMeasure::Atomic { points, .. }) => points.clone(),
        (Integration::MonteCarlo { count, seed }, _) => {
            (0..count as u64).map(|i| draw_measure(space, mu, seed, i)).collect()
        }
        _ => return Err(Error::InvalidArgument("exact integration needs an atomic measure".into())),
    };
    let pts: Vec<Point> = pts.into_iter().filter(|p| target.contains(space, p)).collect();
    let locals = exec.map(&pts, |x| local_lower_pressure(sys, mu, phi, x, &params.r_grid, params.n_window, &params.budget));
    let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
    let local_min = locals.iter().map(|l| l.limit).fold(f64::INFINITY, f64::min);
    let local_max = locals.iter().map(|l| l.limit).fold(f64::NEG_INFINITY, f64::max);
    let note = if locals.is_empty() { Some("no sampled points fell in the target".into()) } else { None };
    let mut probe_results = Vec::new();
    let mut violations = 0;
    for &s in probes {
        let part1_applies = !locals.is_empty() && local_max <= s;
        let part2_applies = !locals.is_empty() && mass > 0.0 && local_min >= s;
        let r = ProbeResult {
            s,
            part1_applies,
            part1_holds: !part1_applies || pressure <= s + tol,
            part2_applies,
            part2_holds: !part2_applies || pressure >= s - tol,
        };
        if !(r.part1_holds && r.part2_holds) {
            violations += 1;
        }
        probe_results.push(r);
    }
    Ok(Theorem1Report { pressure, target_mass: mass, local_min, local_max, probes: probe_results, violations, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MapSpec, Sequential};
    use core::f64::consts::LN_2;

    fn shift(len: usize) -> NaifsSystem {
        NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: len }, vec![MapSpec::shift(0)]).unwrap()
    }

    fn zeros_then(len: usize, head: &[u8]) -> Point {
        let mut v = head.to_vec();
        v.resize(len, 0);
        Point::Symbols(v)
    }

    #[test]
    fn bernoulli_ball_examples() {
        let sys = shift(10);
        let b = TreeBudget::default();
        let fair = BorelMeasure::bernoulli(vec![0.5, 0.5]);
        let x = zeros_then(10, &[1, 0, 1]);
        assert!((ball_measure(&sys, &fair, &x, 3, 0.5, &b).unwrap().mass - 1.0 / 32.0).abs() < 1e-15);
        let skew = BorelMeasure::bernoulli(vec![0.25, 0.75]);
        let m = ball_measure(&sys, &skew, &zeros_then(10, &[]), 1, 0.5, &b).unwrap().mass;
        assert!((m - 1.0 / 64.0).abs() < 1e-15);
        assert_eq!(ball_measure(&sys, &fair, &x, 3, 0.3, &b).unwrap_err(), Error::NonDyadicRadius(0.3));
    }

    #[test]
    fn dirac_has_unit_balls() {
        let sys = NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0)]).unwrap();
        let mu = BorelMeasure::dirac(Point::Real(0.0));
        let b = TreeBudget::default();
        assert_eq!(ball_measure(&sys, &mu, &Point::Real(0.0), 7, 0.01, &b).unwrap().mass, 1.0);
        let params = MeasureParams {
            r_grid: vec![0.1, 0.01],
            n_window: (2, 8),
            integration: Integration::ExactAtomic,
            budget: b,
        };
        let p = measure_pressure(&sys, &mu, &Potential::zero(), &params, &Sequential).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn fair_coin_local_pressure() {
        let sys = shift(320);
        let mu = BorelMeasure::bernoulli(vec![0.5, 0.5]);
        let x = zeros_then(320, &[1, 1, 0, 1]);
        let v = local_lower_pressure(&sys, &mu, &Potential::zero(), &x, &[0.5, 0.25], (200, 300), &TreeBudget::default())
            .unwrap();
        assert!((v.limit - LN_2).abs() < 0.02);
        assert!(v.stabilized);
        // m = 2 at the smallest radius: (n + 3) ln 2 / n minimised at n = 300
        assert!((v.limit - 303.0 * LN_2 / 300.0).abs() < 1e-12);
        let shifted = Potential::symbol_table(vec![0.4, 0.4]);
        let w = local_lower_pressure(&sys, &mu, &shifted, &x, &[0.5, 0.25], (200, 300), &TreeBudget::default()).unwrap();
        assert!((w.limit - v.limit - 0.4).abs() < 1e-12);
    }

    #[test]
    fn skew_coin_entropy() {
        let sys = shift(320);
        let mu = BorelMeasure::bernoulli(vec![0.25, 0.75]);
        let params = MeasureParams {
            r_grid: vec![0.5, 0.25],
            n_window: (200, 300),
            integration: Integration::MonteCarlo { count: 64, seed: 7 },
            budget: TreeBudget::default(),
        };
        let h = 0.25 * ln(4.0) + 0.75 * ln(4.0 / 3.0);
        let p = measure_pressure(&sys, &mu, &Potential::zero(), &params, &Sequential).unwrap();
        assert!((p.value - h).abs() < 0.05, "{p:?}");
        let again = measure_pressure(&sys, &mu, &Potential::zero(), &params, &Sequential).unwrap();
        assert_eq!(p.value.to_bits(), again.value.to_bits());
    }

    #[test]
    fn target_mass_of_cylinders() {
        let space = StateSpace::Symbolic { alphabet: 2, length: 8 };
        let mu = BorelMeasure::bernoulli(vec![0.25, 0.75]);
        let t = TargetSet::Cylinders(vec![vec![0], vec![1, 1], vec![0, 1]]);
        assert!((mu.target_mass(&space, &t).unwrap() - (0.25 + 0.5625)).abs() < 1e-15);
        assert_eq!(mu.target_mass(&space, &TargetSet::Whole).unwrap(), 1.0);
    }

    #[test]
    fn frostman_examples() {
        let sys = shift(12);
        let mu = BorelMeasure::bernoulli(vec![0.5, 0.5]);
        let k = SampleSet::cylinder_reps(sys.space(), 10, None, 0).unwrap();
        let b = TreeBudget::default();
        // cheapest cover by B_n(x, 1/2), n ≥ 4, uses 2^6 balls of length 4
        let c = 64.0 * libm::exp(-0.6 * 4.0);
        let ok = frostman_inequality_check(&sys, &mu, &k, &Potential::zero(), 0.6, 0.5, 4, 8, c, &b).unwrap();
        assert!(ok.violations.is_empty(), "{ok:?}");
        let bad = frostman_inequality_check(&sys, &mu, &k, &Potential::zero(), 0.9, 0.5, 4, 8, c, &b).unwrap();
        assert!(!bad.violations.is_empty());
        let vac = frostman_inequality_check(&sys, &mu, &k, &Potential::zero(), 0.9, 0.5, 4, 8, 1e-300, &b).unwrap();
        assert!(vac.violations.is_empty());
    }

    #[test]
    fn measure_off_target_is_rejected() {
        let sys = shift(12);
        let t = TargetSet::Cylinders(vec![vec![0]]);
        let params = MeasureParams {
            r_grid: vec![0.5],
            n_window: (2, 6),
            integration: Integration::MonteCarlo { count: 2, seed: 0 },
            budget: TreeBudget::default(),
        };
        let r = variational_gap_with(&sys, &t, &Potential::zero(), &[BorelMeasure::bernoulli(vec![0.5, 0.5])], &params, 0.0, &Sequential);
        assert_eq!(r.unwrap_err(), Error::MeasureNotOnTarget { mass: 0.5 });
    }
}
