//! Carathéodory–Pesin cover costs and the pressures defined by their critical exponents.
//!
//! Everything is computed on a [`CoverProblem`]: the candidate Bowen balls
//! `B_n(x, δ)` for centers `x` in the pool and lengths `n` in a range, each
//! recorded with the sample points of `Z` it contains and the two weights
//! `S_n φ(x)` and the pool-relative `S_n φ(x, δ)`. Cover costs are minima over
//! a fixed family of greedy covers, so each cost is a continuous, strictly
//! decreasing function of `α` and the critical exponent is found by bisection.
//!
//! # Crossing level
//!
//! For large `N` the cost behaves like `ln M(α, N) ≈ λ(α) + (a − α)·N`, so
//! the conventional level `M = 1` gives crossings `a + λ/N`, a bias that
//! decays slowly (for the full shift `λ` is about the log of the number of
//! cylinders a ball fixes beyond its length). Instead the estimators locate
//! the `α*` at which `ln M(α, N)` is flat in `N` over the tail of the `N`
//! grid, and take the crossings of `M` and `M'` at the level
//! `λ = mean ln M(α*, N)`. Sharing that level keeps `P ≤ P'` and
//! `P' − P ≤ ω(δ)` exact at every grid cell. The fixed-length cost `R` gets
//! its own flat level.
//! Sharing one level keeps `P ≤ P'` and `P ≤ CP` exact at every grid cell;
//! the capacity values then inherit an upward bias of `(λ_R − λ)/N`, where
//! `λ_R ≥ λ` is the intercept of the fixed-length costs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::counting::tail_len;
use crate::cover::greedy_weighted_cover;
use crate::index::OrbitIndex;
use crate::lp::covering_lp;
use crate::math::{exp, least_squares, log_sum_exp};
use crate::metrics::{birkhoff_profile, within, Membership};
use crate::{Error, Executor, Metric, Mode, NaifsSystem, Potential, Result, SampleSet, TreeBudget};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverParams {
    /// Variable-length covers use lengths `N..=N + window`.
    pub window: usize,
    /// Bisection tolerance on `α`.
    pub tol: f64,
    /// Bracket doublings allowed before giving up.
    pub max_expansions: usize,
    pub budget: TreeBudget,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams { window: 6, tol: 1e-3, max_expansions: 60, budget: TreeBudget::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    UpperBound,
    LowerBound,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub delta: f64,
    pub n: usize,
    pub n_max: usize,
    pub pool_size: usize,
    pub cover_size: usize,
    /// Log-cost level at which the crossing was taken.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressureEstimate {
    pub value: f64,
    pub bracket: (f64, f64),
    pub direction: Direction,
    pub mode: Mode,
    pub diagnostics: Diagnostics,
}

/// A candidate ball, deduplicated by the part of `Z` it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub n: usize,
    /// Index into [`CoverProblem::points`].
    pub center: usize,
    /// Cheapest `S_n φ(center)` among centers giving this coverage.
    pub s: f64,
    /// Cheapest pool-relative `S_n φ(center, δ)` among those centers.
    pub s_prime: f64,
    /// Covered elements of `Z` (indices `< z_len`), sorted.
    pub members: Vec<u32>,
}

/// Candidate balls for one radius and a range of lengths.
#[derive(Debug, Clone)]
pub struct CoverProblem {
    pub delta: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    /// `Z` first, then pool points not in `Z`.
    pub points: SampleSet,
    pub z_len: usize,
    pub candidates: Vec<Candidate>,
    by_n: Vec<Vec<usize>>,
    sets: Vec<Vec<u32>>,
    pub mode: Mode,
    /// Growth rate of fixed-length cover costs over the length range.
    pub growth: f64,
}

/// A cover summarised by `(n, ln Σ e^{s}, ln Σ e^{s'})` per length.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSummary {
    pub size: usize,
    pub per_length: Vec<(usize, f64, f64)>,
}

impl CoverSummary {
    pub fn log_cost(&self, alpha: f64, prime: bool) -> f64 {
        log_sum_exp(
            self.per_length
                .iter()
                .map(|&(n, s, sp)| -alpha * n as f64 + if prime { sp } else { s }),
        )
    }
}

impl CoverProblem {
    /// Builds every candidate `B_n(x, δ)` with `x` in `Z ∪ pool` and `n_lo ≤ n ≤ n_hi`.
    #[allow(clippy::too_many_arguments)]
    pub fn build<E: Executor>(
        sys: &NaifsSystem,
        z: &SampleSet,
        pool: &SampleSet,
        phi: &Potential,
        delta: f64,
        n_lo: usize,
        n_hi: usize,
        budget: &TreeBudget,
        exec: &E,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        if n_lo == 0 || n_lo > n_hi {
            return Err(Error::InvalidArgument("lengths must satisfy 1 ≤ N ≤ N_max".into()));
        }
        phi.validate(sys.space())?;
        let space = sys.space();
        let points = z.union(space, pool);
        let z_len = z.len();
        let pts = points.points();
        let profiles = exec.map(pts, |p| birkhoff_profile(sys, phi, p, n_hi, budget));
        let mut mode = Mode::all(profiles.iter().map(|p| p.1));
        let s_of = |p: usize, n: usize| profiles[p].0[n - 1];
        let index = OrbitIndex::build(sys, pts, delta, n_hi, exec);
        let ball = |c: usize, n: usize| -> (Vec<u32>, Mode) {
            let mut cand = Vec::new();
            index.candidates(sys, &pts[c], n, &mut cand);
            let mut members = Vec::new();
            let mut m = Mode::Exact;
            for &j in &cand {
                if j == c {
                    members.push(j as u32);
                    continue;
                }
                match within(sys, Metric::Dn, &pts[c], &pts[j], n, delta, false, budget) {
                    Membership::Inside => members.push(j as u32),
                    Membership::Uncertain => m = Mode::LowerBound,
                    Membership::Outside => {}
                }
            }
            members.sort_unstable();
            (members, m)
        };

        let mut candidates = Vec::new();
        let mut by_n = Vec::with_capacity(n_hi - n_lo + 1);
        for n in n_lo..=n_hi {
            let mut ids = Vec::new();
            if space.is_ultrametric() {
                // balls around any member coincide, so one query per ball suffices
                let mut assigned = vec![false; pts.len()];
                for c in 0..pts.len() {
                    if assigned[c] {
                        continue;
                    }
                    let (members, m) = ball(c, n);
                    mode = mode.and(m);
                    let mut best = (c, s_of(c, n));
                    let mut top = f64::NEG_INFINITY;
                    for &y in &members {
                        let y = y as usize;
                        assigned[y] = true;
                        let s = s_of(y, n);
                        if s < best.1 {
                            best = (y, s);
                        }
                        top = top.max(s);
                    }
                    let zm: Vec<u32> = members.into_iter().filter(|&y| (y as usize) < z_len).collect();
                    if zm.is_empty() {
                        continue;
                    }
                    ids.push(candidates.len());
                    candidates.push(Candidate { n, center: best.0, s: best.1, s_prime: top, members: zm });
                }
            } else {
                let centers: Vec<usize> = (0..pts.len()).collect();
                let balls = exec.map(&centers, |&c| ball(c, n));
                let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
                for (c, (members, m)) in balls.into_iter().enumerate() {
                    mode = mode.and(m);
                    let s = s_of(c, n);
                    let sp = members.iter().map(|&y| s_of(y as usize, n)).fold(s, f64::max);
                    let zm: Vec<u32> = members.into_iter().filter(|&y| (y as usize) < z_len).collect();
                    if zm.is_empty() {
                        continue;
                    }
                    match seen.get(&zm) {
                        Some(&k) => {
                            let cand: &mut Candidate = &mut candidates[k];
                            if s < cand.s {
                                cand.s = s;
                                cand.center = c;
                            }
                            cand.s_prime = cand.s_prime.min(sp);
                        }
                        None => {
                            seen.insert(zm.clone(), candidates.len());
                            ids.push(candidates.len());
                            candidates.push(Candidate { n, center: c, s, s_prime: sp, members: zm });
                        }
                    }
                }
            }
            by_n.push(ids);
        }
        let sets = candidates.iter().map(|c| c.members.clone()).collect();
        let mut problem = CoverProblem {
            delta,
            n_lo,
            n_hi,
            points,
            z_len,
            candidates,
            by_n,
            sets,
            mode,
            growth: 0.0,
        };
        problem.growth = problem.fixed_growth()?;
        Ok(problem)
    }

    pub fn pool_size(&self) -> usize {
        self.points.len()
    }

    /// Candidate ids with `lo ≤ n ≤ hi`.
    pub fn ids_between(&self, lo: usize, hi: usize) -> Vec<usize> {
        let lo = lo.max(self.n_lo);
        let hi = hi.min(self.n_hi);
        (lo..=hi).flat_map(|n| self.by_n[n - self.n_lo].iter().copied()).collect()
    }

    fn weight(&self, c: usize, alpha: f64, prime: bool) -> f64 {
        let cand = &self.candidates[c];
        -alpha * cand.n as f64 + if prime { cand.s_prime } else { cand.s }
    }

    /// Greedy cover of `Z` by the candidates in `ids` under weights `e^{−αn + s}`
    /// (or `s'` when `prime`).
    pub fn greedy(&self, ids: &[usize], alpha: f64, prime: bool) -> Result<Vec<usize>> {
        let w: Vec<f64> = (0..self.candidates.len()).map(|c| self.weight(c, alpha, prime)).collect();
        Ok(greedy_weighted_cover(self.z_len, &self.sets, ids, &w)?.chosen)
    }

    pub fn summarize(&self, cover: &[usize]) -> CoverSummary {
        let mut by: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for &c in cover {
            let cand = &self.candidates[c];
            let e = by.entry(cand.n).or_default();
            e.0.push(cand.s);
            e.1.push(cand.s_prime);
        }
        CoverSummary {
            size: cover.len(),
            per_length: by
                .into_iter()
                .map(|(n, (s, sp))| (n, log_sum_exp(s), log_sum_exp(sp)))
                .collect(),
        }
    }

    /// Fixed-length covers at length `n`, chosen greedily under `s` and under `s'`.
    pub fn fixed_covers(&self, n: usize) -> Result<Vec<CoverSummary>> {
        let ids = self.ids_between(n, n);
        let a = self.summarize(&self.greedy(&ids, 0.0, false)?);
        let b = self.summarize(&self.greedy(&ids, 0.0, true)?);
        Ok(if a == b { vec![a] } else { vec![a, b] })
    }

    /// `ln Σ e^{S_n φ}` of the cheapest fixed-length cover at length `n`.
    pub fn fixed_log_mass(&self, n: usize) -> Result<f64> {
        Ok(self
            .fixed_covers(n)?
            .iter()
            .map(|c| c.log_cost(0.0, false))
            .fold(f64::INFINITY, f64::min))
    }

    fn fixed_growth(&self) -> Result<f64> {
        if self.z_len == 0 {
            return Ok(0.0);
        }
        let ns: Vec<usize> = (self.n_lo..=self.n_hi).collect();
        let ys = ns.iter().map(|&n| self.fixed_log_mass(n)).collect::<Result<Vec<f64>>>()?;
        if ns.len() == 1 {
            return Ok(ys[0] / ns[0] as f64);
        }
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        Ok(least_squares(&xs, &ys)?.0)
    }

    /// Reference exponents for variable-length greedy covers.
    pub fn reference_alphas(&self) -> [f64; 5] {
        let a = self.growth;
        [a - 0.2, a - 0.05, a, a + 0.05, a + 0.2]
    }

    /// The cover family used for costs with lengths in `[lo, hi]`: fixed-length
    /// covers at every length plus variable-length greedy covers at the
    /// reference exponents, each under both weightings.
    pub fn family(&self, lo: usize, hi: usize) -> Result<Vec<CoverSummary>> {
        let mut fam: Vec<CoverSummary> = Vec::new();
        let mut push = |c: CoverSummary| {
            if !fam.contains(&c) {
                fam.push(c);
            }
        };
        for n in lo.max(self.n_lo)..=hi.min(self.n_hi) {
            for c in self.fixed_covers(n)? {
                push(c);
            }
        }
        let ids = self.ids_between(lo, hi);
        for alpha in self.reference_alphas() {
            for prime in [false, true] {
                push(self.summarize(&self.greedy(&ids, alpha, prime)?));
            }
        }
        Ok(fam)
    }

    /// `ln W`: optimum of the fractional covering program over lengths `[lo, hi]`,
    /// capped by the integral covers of `family` (which are feasible points).
    pub fn weighted_log_cost(&self, lo: usize, hi: usize, alpha: f64, family: &[CoverSummary]) -> Result<f64> {
        if self.z_len == 0 {
            return Ok(f64::NEG_INFINITY);
        }
        let ids = self.ids_between(lo, hi);
        let w: Vec<f64> = (0..self.candidates.len()).map(|c| self.weight(c, alpha, false)).collect();
        let lp = covering_lp(self.z_len, &self.sets, &ids, &w)?;
        Ok(family_log_cost(family, alpha, false).min(lp.log_value))
    }
}

/// The exponent `α*` at which `ln M(α, N)` has zero least-squares slope in `N`
/// over `ns`, and the mean of `ln M(α*, N)` there.
pub fn flat_level(
    fams: &[Vec<CoverSummary>],
    ns: &[usize],
    bracket0: (f64, f64),
    max_expansions: usize,
) -> Result<(f64, f64)> {
    let mean_n = ns.iter().sum::<usize>() as f64 / ns.len() as f64;
    let sxx: f64 = ns.iter().map(|&n| (n as f64 - mean_n) * (n as f64 - mean_n)).sum();
    let slope = |a: f64| {
        ns.iter().zip(fams).map(|(&n, f)| (n as f64 - mean_n) * family_log_cost(f, a, false)).sum::<f64>() / sxx
    };
    let (lo, hi) = expand_bracket(&[&slope], 0.0, bracket0, max_expansions)?;
    let (a, _) = bisect(&slope, 0.0, lo, hi, 1e-10);
    let level = fams.iter().map(|f| family_log_cost(f, a, false)).sum::<f64>() / fams.len() as f64;
    Ok((a, level))
}

pub fn family_log_cost(family: &[CoverSummary], alpha: f64, prime: bool) -> f64 {
    family
        .iter()
        .map(|c| c.log_cost(alpha, prime))
        .fold(f64::INFINITY, f64::min)
}

/// Critical exponent of a nonincreasing log-cost: the `α` where
/// `log_cost(α)` crosses `level` (`level = 0` is the usual cost `= 1`).
/// The bracket is expanded geometrically from `bracket0` and then bisected to `tol`.
pub fn critical_alpha<F: Fn(f64) -> f64>(
    log_cost: F,
    level: f64,
    bracket0: (f64, f64),
    tol: f64,
    max_expansions: usize,
) -> Result<(f64, (f64, f64))> {
    let (lo, hi) = expand_bracket(&[&log_cost], level, bracket0, max_expansions)?;
    Ok(bisect(&log_cost, level, lo, hi, tol))
}

/// Widens `bracket0` until every function is above `level` at the left end
/// and below it at the right end.
pub fn expand_bracket(
    fs: &[&dyn Fn(f64) -> f64],
    level: f64,
    bracket0: (f64, f64),
    max_expansions: usize,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = bracket0;
    if !(lo < hi) {
        return Err(Error::InvalidArgument("bracket must satisfy lo < hi".into()));
    }
    let mut step = (hi - lo).max(1e-3);
    let mut expansions = 0;
    loop {
        let lo_ok = fs.iter().all(|f| f(lo) > level);
        let hi_ok = fs.iter().all(|f| f(hi) < level);
        if lo_ok && hi_ok {
            return Ok((lo, hi));
        }
        if expansions >= max_expansions {
            return Err(Error::UnboundedPressure { expansions });
        }
        if !lo_ok {
            lo -= step;
        }
        if !hi_ok {
            hi += step;
        }
        step *= 2.0;
        expansions += 1;
    }
}

/// Bisection keeping `f(lo) > level ≥ f(hi)`. Two functions `f ≤ g`
/// bisected from the same bracket return `α_f ≤ α_g`.
pub fn bisect<F: Fn(f64) -> f64 + ?Sized>(f: &F, level: f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, (f64, f64)) {
    let tol = if tol > 0.0 { tol } else { 1e-3 };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), (lo, hi))
}

/// Crossings for one `(δ, N)` cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    pub delta: f64,
    pub n: usize,
    pub n_max: usize,
    /// Variable-length cost `M` at the flat level.
    pub alpha_m: f64,
    pub bracket_m: (f64, f64),
    /// `M` with pool-relative ball sums.
    pub alpha_m_prime: f64,
    pub bracket_m_prime: (f64, f64),
    /// Fixed-length cost `R` at its own flat level.
    pub alpha_r: f64,
    pub bracket_r: (f64, f64),
    /// `M` at the conventional level `M = 1`.
    pub alpha_unit: f64,
    /// `ln Σ e^{S_N φ}` of the cheapest fixed-length cover.
    pub log_fixed_mass: f64,
    pub cover_size: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaSummary {
    pub delta: f64,
    pub modulus: f64,
    /// The flat exponent `α*` of the variable-length costs and the level `λ` taken there.
    pub growth: f64,
    pub level: f64,
    pub pp: f64,
    pub pp_prime: f64,
    pub cp_lower: f64,
    pub cp_upper: f64,
    pub cells: Vec<GridCell>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressureSuite {
    pub pp: PressureEstimate,
    pub pp_prime: PressureEstimate,
    pub cp_lower: PressureEstimate,
    pub cp_upper: PressureEstimate,
    pub per_delta: Vec<DeltaSummary>,
}

fn validate_grids(delta_grid: &[f64], n_grid: &[usize]) -> Result<()> {
    if delta_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::InvalidArgument("δ and N grids must be nonempty".into()));
    }
    if delta_grid.iter().any(|d| !(*d > 0.0)) || delta_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("δ grid must be positive and strictly decreasing".into()));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// All cover-based pressures at once: Pesin–Pitskel `P`, its ball-sup variant
/// `P'`, and the lower/upper capacity pressures.
///
/// For each `δ` and `N`: `α_M(N)`, `α_M'(N)` and `α_R(N)` are crossings of the
/// family costs at the fitted level. `P(δ) = min α_M`, `P'(δ) = min α_M'`,
/// lower/upper capacity = `min`/`max` of `α_R`, all over the tail of the `N`
/// grid. The reported values are those at the smallest `δ`.
#[allow(clippy::too_many_arguments)]
pub fn pressure_suite<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    pool: &SampleSet,
    phi: &Potential,
    delta_grid: &[f64],
    n_grid: &[usize],
    params: &CoverParams,
    exec: &E,
) -> Result<PressureSuite> {
    validate_grids(delta_grid, n_grid)?;
    if z.is_empty() {
        return Err(Error::InvalidArgument("target sample is empty".into()));
    }
    let n_lo = n_grid[0];
    let n_hi = *n_grid.last().unwrap_or(&n_lo) + params.window;
    let tail = tail_len(n_grid.len()).max(2.min(n_grid.len()));
    let tail_ns = &n_grid[n_grid.len() - tail..];
    let mut per_delta = Vec::new();
    let mut mode = Mode::Exact;
    let mut finals = None;
    for &delta in delta_grid {
        let prob = CoverProblem::build(sys, z, pool, phi, delta, n_lo, n_hi, &params.budget, exec)?;
        mode = mode.and(prob.mode);
        let g = prob.growth;
        let fams = n_grid.iter().map(|&n| prob.family(n, n + params.window)).collect::<Result<Vec<_>>>()?;
        let mut units = Vec::with_capacity(n_grid.len());
        for fam in &fams {
            let f_m = |a: f64| family_log_cost(fam, a, false);
            let (lo0, hi0) = expand_bracket(&[&f_m], 0.0, (g - 0.5, g + 0.5), params.max_expansions)?;
            units.push(bisect(&f_m, 0.0, lo0, hi0, params.tol).0);
        }
        let fixed_fams = n_grid.iter().map(|&n| prob.fixed_covers(n)).collect::<Result<Vec<_>>>()?;
        let (growth, level) = if tail >= 2 {
            flat_level(&fams[n_grid.len() - tail..], tail_ns, (g - 0.5, g + 0.5), params.max_expansions)?
        } else {
            (units[0], 0.0)
        };
        let mut cells = Vec::new();
        for (((&n, fam), fixed), &a_unit) in n_grid.iter().zip(&fams).zip(&fixed_fams).zip(&units) {
            let f_m = |a: f64| family_log_cost(fam, a, false);
            let f_mp = |a: f64| family_log_cost(fam, a, true);
            let f_r = |a: f64| family_log_cost(fixed, a, false);
            // one level and one bracket for all three: M ≤ M′ and M ≤ R pointwise,
            // so the crossings keep that order
            let (lo, hi) = expand_bracket(&[&f_m, &f_mp, &f_r], level, (growth - 0.5, growth + 0.5), params.max_expansions)?;
            let (am, bm) = bisect(&f_m, level, lo, hi, params.tol);
            let (amp, bmp) = bisect(&f_mp, level, lo, hi, params.tol);
            let (ar, br) = bisect(&f_r, level, lo, hi, params.tol);
            let best = fam
                .iter()
                .min_by(|x, y| x.log_cost(am, false).total_cmp(&y.log_cost(am, false)))
                .map(|c| c.size)
                .unwrap_or(0);
            cells.push(GridCell {
                delta,
                n,
                n_max: n + params.window,
                alpha_m: am,
                bracket_m: bm,
                alpha_m_prime: amp,
                bracket_m_prime: bmp,
                alpha_r: ar,
                bracket_r: br,
                alpha_unit: a_unit,
                log_fixed_mass: prob.fixed_log_mass(n)?,
                cover_size: best,
                candidates: prob.ids_between(n, n + params.window).len(),
            });
        }
        let tail_cells = &cells[cells.len() - tail..];
        let pick = |f: &dyn Fn(&GridCell) -> f64, want_min: bool| -> usize {
            let mut k = 0;
            for (i, c) in tail_cells.iter().enumerate() {
                let better = if want_min { f(c) < f(&tail_cells[k]) } else { f(c) > f(&tail_cells[k]) };
                if better {
                    k = i;
                }
            }
            k
        };
        let i_m = pick(&|c| c.alpha_m, true);
        let i_mp = pick(&|c| c.alpha_m_prime, true);
        let i_lo = pick(&|c| c.alpha_r, true);
        let i_hi = pick(&|c| c.alpha_r, false);
        let est = |value: f64, bracket: (f64, f64), c: &GridCell, level: f64| PressureEstimate {
            value,
            bracket,
            direction: Direction::UpperBound,
            mode,
            diagnostics: Diagnostics {
                delta,
                n: c.n,
                n_max: c.n_max,
                pool_size: prob.pool_size(),
                cover_size: c.cover_size,
                level,
            },
        };
        let (cm, cmp, clo, chi) = (&tail_cells[i_m], &tail_cells[i_mp], &tail_cells[i_lo], &tail_cells[i_hi]);
        finals = Some((
            est(cm.alpha_m, cm.bracket_m, cm, level),
            est(cmp.alpha_m_prime, cmp.bracket_m_prime, cmp, level),
            est(clo.alpha_r, clo.bracket_r, clo, level),
            est(chi.alpha_r, chi.bracket_r, chi, level),
        ));
        per_delta.push(DeltaSummary {
            delta,
            modulus: phi.modulus(sys.space(), delta),
            growth,
            level,
            pp: cm.alpha_m,
            pp_prime: cmp.alpha_m_prime,
            cp_lower: clo.alpha_r,
            cp_upper: chi.alpha_r,
            cells,
        });
    }
    let (mut pp, mut pp_prime, mut cp_lower, mut cp_upper) =
        finals.ok_or_else(|| Error::InvalidArgument("empty δ grid".into()))?;
    for e in [&mut pp, &mut pp_prime, &mut cp_lower, &mut cp_upper] {
        e.mode = mode;
    }
    Ok(PressureSuite { pp, pp_prime, cp_lower, cp_upper, per_delta })
}

#[allow(clippy::too_many_arguments)]
pub fn pp_pressure<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    delta_grid: &[f64],
    n_grid: &[usize],
    pool: &SampleSet,
    params: &CoverParams,
    exec: &E,
) -> Result<PressureEstimate> {
    Ok(pressure_suite(sys, z, pool, phi, delta_grid, n_grid, params, exec)?.pp)
}

#[allow(clippy::too_many_arguments)]
pub fn pp_pressure_prime<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    delta_grid: &[f64],
    n_grid: &[usize],
    pool: &SampleSet,
    params: &CoverParams,
    exec: &E,
) -> Result<PressureEstimate> {
    Ok(pressure_suite(sys, z, pool, phi, delta_grid, n_grid, params, exec)?.pp_prime)
}

#[allow(clippy::too_many_arguments)]
pub fn capacity_pressures<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    delta_grid: &[f64],
    n_grid: &[usize],
    pool: &SampleSet,
    params: &CoverParams,
    exec: &E,
) -> Result<(PressureEstimate, PressureEstimate)> {
    let s = pressure_suite(sys, z, pool, phi, delta_grid, n_grid, params, exec)?;
    Ok((s.cp_lower, s.cp_upper))
}

/// Upper bound on `M(Z, φ, α, δ, N)` with lengths `N..=n_max`.
#[allow(clippy::too_many_arguments)]
pub fn cover_cost_m<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    alpha: f64,
    delta: f64,
    n: usize,
    n_max: usize,
    pool: &SampleSet,
    budget: &TreeBudget,
    exec: &E,
) -> Result<f64> {
    if z.is_empty() {
        return Ok(0.0);
    }
    let prob = CoverProblem::build(sys, z, pool, phi, delta, n, n_max, budget, exec)?;
    let fam = prob.family(n, n_max)?;
    Ok(exp(family_log_cost(&fam, alpha, false)))
}

/// Upper bound on `R(Z, φ, α, δ, N)` (all lengths equal to `N`).
#[allow(clippy::too_many_arguments)]
pub fn cover_cost_r<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    alpha: f64,
    delta: f64,
    n: usize,
    pool: &SampleSet,
    budget: &TreeBudget,
    exec: &E,
) -> Result<f64> {
    if z.is_empty() {
        return Ok(0.0);
    }
    let prob = CoverProblem::build(sys, z, pool, phi, delta, n, n, budget, exec)?;
    Ok(exp(family_log_cost(&prob.fixed_covers(n)?, alpha, false)))
}

/// Fractional covering cost `W(φ, Z, α, δ, N)` with lengths `N..=n_max`.
#[allow(clippy::too_many_arguments)]
pub fn weighted_cover_cost_w<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    alpha: f64,
    delta: f64,
    n: usize,
    n_max: usize,
    pool: &SampleSet,
    budget: &TreeBudget,
    exec: &E,
) -> Result<f64> {
    if z.is_empty() {
        return Ok(0.0);
    }
    let prob = CoverProblem::build(sys, z, pool, phi, delta, n, n_max, budget, exec)?;
    let fam = prob.family(n, n_max)?;
    Ok(exp(prob.weighted_log_cost(n, n_max, alpha, &fam)?))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SandwichRow {
    pub n: usize,
    /// `M(α + ε, 6δ, N)`.
    pub m_shifted: f64,
    /// `W(α, δ, N)`.
    pub w: f64,
    /// `M(α, δ, N)`.
    pub m: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// Only rows with `N ≥` the threshold count as violations.
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SandwichReport {
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    pub rows: Vec<SandwichRow>,
    pub violations: usize,
    pub mode: Mode,
    pub note: Option<String>,
}

/// Evaluates `M(α + ε, 6δ, N) ≤ W(α, δ, N) ≤ M(α, δ, N)` for every `N` in
/// `n_values`, with lengths `N..=N + window`.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check_wm<E: Executor>(
    sys: &NaifsSystem,
    z: &SampleSet,
    phi: &Potential,
    alpha: f64,
    eps: f64,
    delta: f64,
    n_values: &[usize],
    n_threshold: usize,
    pool: &SampleSet,
    params: &CoverParams,
    exec: &E,
) -> Result<SandwichReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let mut report = SandwichReport { alpha, eps, delta, rows: Vec::new(), violations: 0, mode: Mode::Exact, note: None };
    if z.is_empty() {
        for &n in n_values {
            report.rows.push(SandwichRow { n, m_shifted: 0.0, w: 0.0, m: 0.0, lower_holds: true, upper_holds: true, counted: n >= n_threshold });
        }
        return Ok(report);
    }
    let Some(&lo) = n_values.iter().min() else {
        return Ok(report);
    };
    let hi = n_values.iter().max().copied().unwrap_or(lo) + params.window;
    let fine = CoverProblem::build(sys, z, pool, phi, delta, lo, hi, &params.budget, exec)?;
    let coarse = CoverProblem::build(sys, z, pool, phi, 6.0 * delta, lo, hi, &params.budget, exec)?;
    report.mode = fine.mode.and(coarse.mode);
    for &n in n_values {
        let top = n + params.window;
        let fam = fine.family(n, top)?;
        let m = exp(family_log_cost(&fam, alpha, false));
        let w = exp(fine.weighted_log_cost(n, top, alpha, &fam)?);
        let m_shifted = exp(family_log_cost(&coarse.family(n, top)?, alpha + eps, false));
        let row = SandwichRow {
            n,
            m_shifted,
            w,
            m,
            lower_holds: m_shifted <= w,
            upper_holds: w <= m,
            counted: n >= n_threshold,
        };
        if row.counted && !(row.lower_holds && row.upper_holds) {
            report.violations += 1;
        }
        report.rows.push(row);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::ln;
    use crate::{MapSpec, Point, Sequential, StateSpace};
    use core::f64::consts::LN_2;

    fn two_shift(len: usize) -> NaifsSystem {
        NaifsSystem::constant(StateSpace::Symbolic { alphabet: 2, length: len }, vec![MapSpec::shift(0)]).unwrap()
    }

    #[test]
    fn critical_alpha_examples() {
        let (a, (lo, hi)) = critical_alpha(|a| -a * 5.0, 0.0, (1.0, 2.0), 1e-3, 60).unwrap();
        assert!(a.abs() < 1e-3 && lo <= a && a <= hi && hi - lo <= 1e-3);
        let n = 40.0;
        let (a, _) = critical_alpha(|a| n * LN_2 - a * n, 0.0, (0.0, 0.1), 1e-6, 60).unwrap();
        assert!((a - LN_2).abs() < 1e-5);
        assert_eq!(
            critical_alpha(|_| ln(5.0), 0.0, (0.0, 1.0), 1e-3, 10).unwrap_err(),
            Error::UnboundedPressure { expansions: 10 }
        );
    }

    #[test]
    fn fixed_length_cost_counts_cylinders() {
        let sys = two_shift(8);
        let z = SampleSet::cylinder_reps(sys.space(), 7, None, 0).unwrap();
        let b = TreeBudget::default();
        // B_3(x, 1/2) is a cylinder of length 5
        let r = cover_cost_r(&sys, &z, &Potential::zero(), 0.0, 0.5, 3, &z, &b, &Sequential).unwrap();
        assert!((r - 32.0).abs() < 1e-9);
        let w = weighted_cover_cost_w(&sys, &z, &Potential::zero(), 0.0, 0.5, 3, 3, &z, &b, &Sequential).unwrap();
        assert!((w - 32.0).abs() < 1e-9);
        assert_eq!(cover_cost_r(&sys, &SampleSet::empty(), &Potential::zero(), 0.0, 0.5, 3, &z, &b, &Sequential).unwrap(), 0.0);
    }

    #[test]
    fn variable_length_cost_at_entropy() {
        let sys = two_shift(14);
        let z = SampleSet::cylinder_reps(sys.space(), 13, None, 0).unwrap();
        let b = TreeBudget::default();
        let m = cover_cost_m(&sys, &z, &Potential::zero(), LN_2, 0.25, 4, 8, &z, &b, &Sequential).unwrap();
        // every admissible cylinder cover costs 2^{N+3}·2^{−N}
        assert!((m - 8.0).abs() < 1e-9);
    }

    #[test]
    fn single_point_cover() {
        let sys = NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0)]).unwrap();
        let z = SampleSet::from_points(sys.space(), vec![Point::Real(0.0)], 0.0).unwrap();
        let b = TreeBudget::default();
        let m = cover_cost_m(&sys, &z, &Potential::constant(0.1), 2.0, 0.1, 3, 5, &z, &b, &Sequential).unwrap();
        assert!((m - exp(-2.0 * 5.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn suite_on_two_shift() {
        let sys = two_shift(12);
        let z = SampleSet::cylinder_reps(sys.space(), 11, None, 0).unwrap();
        let params = CoverParams { window: 2, ..CoverParams::default() };
        let phi = Potential::symbol_table(vec![0.0, 1.0]);
        let s = pressure_suite(&sys, &z, &z, &phi, &[0.5, 0.25], &[3, 4, 5, 6], &params, &Sequential).unwrap();
        let target = ln(1.0 + core::f64::consts::E);
        for e in [&s.pp, &s.pp_prime] {
            assert!((e.value - target).abs() < 2e-3, "{e:?}");
        }
        // fixed-length covers carry a larger prefactor than mixed ones, so at
        // finite N the capacity crossings sit above
        for e in [&s.cp_lower, &s.cp_upper] {
            assert!(e.value >= target - 2e-3 && e.value < target + 0.2, "{e:?}");
        }
        for e in [&s.pp, &s.pp_prime, &s.cp_lower, &s.cp_upper] {
            assert!(e.bracket.0 <= e.value && e.value <= e.bracket.1);
        }
        assert!(s.pp.value <= s.cp_lower.value && s.cp_lower.value <= s.cp_upper.value);
        assert_eq!(s.pp.value, s.pp_prime.value);
    }
}
