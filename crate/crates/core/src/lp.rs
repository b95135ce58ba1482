//! Fractional covering: `min Σ c_s w_s` subject to `Σ_{s ∋ e} w_s ≥ 1`, `w ≥ 0`.
//!
//! The problem splits into connected components (elements linked by shared
//! sets). Each component is reduced (elements with identical set lists are
//! merged, dominated sets dropped) and its packing dual
//! `max Σ y_e` s.t. `Σ_{e ∈ s} y_e ≤ c_s` is solved with a dense tableau
//! simplex. The covering weights are read off the optimal tableau.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{exp, ln, log_sum_exp};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Natural log of the optimal covering cost.
    pub log_value: f64,
    /// Nonzero covering weights `(set id, w_s)`.
    pub weights: Vec<(usize, f64)>,
    /// Largest relative primal/dual gap over components.
    pub gap: f64,
    pub components: usize,
}

/// Solves the fractional covering program for elements `0..universe`
/// with the sets listed in `ids` (`sets[s]` = elements, `log_costs[s]` = ln cost).
pub fn covering_lp(
    universe: usize,
    sets: &[Vec<u32>],
    ids: &[usize],
    log_costs: &[f64],
) -> Result<LpSolution> {
    if universe == 0 {
        return Ok(LpSolution { log_value: f64::NEG_INFINITY, weights: Vec::new(), gap: 0.0, components: 0 });
    }
    let mut uf = UnionFind::new(universe);
    let mut coverable = vec![false; universe];
    for &s in ids {
        let elems = &sets[s];
        for &e in elems {
            coverable[e as usize] = true;
        }
        for w in elems.windows(2) {
            uf.union(w[0] as usize, w[1] as usize);
        }
    }
    if let Some(index) = coverable.iter().position(|c| !c) {
        return Err(Error::NoCover { index });
    }
    let mut comp_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp_elems: Vec<Vec<u32>> = Vec::new();
    for e in 0..universe {
        let r = uf.find(e);
        let c = *comp_of_root.entry(r).or_insert_with(|| {
            comp_elems.push(Vec::new());
            comp_elems.len() - 1
        });
        comp_elems[c].push(e as u32);
    }
    let mut comp_sets: Vec<Vec<usize>> = vec![Vec::new(); comp_elems.len()];
    for &s in ids {
        if let Some(&e) = sets[s].first() {
            let c = comp_of_root[&uf.find(e as usize)];
            comp_sets[c].push(s);
        }
    }
    let mut logs = Vec::with_capacity(comp_elems.len());
    let mut weights = Vec::new();
    let mut gap = 0.0_f64;
    for (elems, cs) in comp_elems.iter().zip(&comp_sets) {
        let sol = solve_component(elems, cs, sets, log_costs)?;
        logs.push(sol.0);
        weights.extend(sol.1);
        gap = gap.max(sol.2);
    }
    weights.sort_by_key(|a| a.0);
    Ok(LpSolution { log_value: log_sum_exp(logs), weights, gap, components: comp_elems.len() })
}

#[allow(clippy::type_complexity)]
fn solve_component(
    elems: &[u32],
    set_ids: &[usize],
    sets: &[Vec<u32>],
    log_costs: &[f64],
) -> Result<(f64, Vec<(usize, f64)>, f64)> {
    // element signature = sorted list of local set positions containing it
    let local: BTreeMap<u32, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut sig: Vec<Vec<u32>> = vec![Vec::new(); elems.len()];
    for (k, &s) in set_ids.iter().enumerate() {
        for e in &sets[s] {
            sig[local[e]].push(k as u32);
        }
    }
    let mut class_of_sig: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for sg in &sig {
        let next = class_of_sig.len();
        class_of_sig.entry(sg.clone()).or_insert(next);
    }
    let classes = class_of_sig.len();
    let mut set_classes: Vec<Vec<u32>> = vec![Vec::new(); set_ids.len()];
    for (sg, &c) in &class_of_sig {
        for &k in sg {
            set_classes[k as usize].push(c as u32);
        }
    }
    for sc in &mut set_classes {
        sc.sort_unstable();
    }
    let alive = undominated(&set_classes, set_ids, log_costs);
    let kept: Vec<usize> = (0..set_ids.len()).filter(|&k| alive[k]).collect();

    let base = kept.iter().map(|&k| log_costs[set_ids[k]]).fold(f64::INFINITY, f64::min);
    let costs: Vec<f64> = kept
        .iter()
        .map(|&k| exp((log_costs[set_ids[k]] - base).min(600.0)))
        .collect();
    let rows: Vec<&[u32]> = kept.iter().map(|&k| set_classes[k].as_slice()).collect();

    let (dual_value, w) = packing_simplex(&rows, &costs, classes)?;

    // covering weights: rescale if rounding left a constraint slightly short
    let mut coverage = vec![0.0; classes];
    for (r, row) in rows.iter().enumerate() {
        for &c in *row {
            coverage[c as usize] += w[r];
        }
    }
    let min_cov = coverage.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_cov > 0.0) {
        return Err(Error::Lp("simplex returned an infeasible covering".into()));
    }
    let scale = if min_cov < 1.0 { 1.0 / min_cov } else { 1.0 };
    let primal: f64 = w.iter().zip(&costs).map(|(wi, ci)| wi * ci * scale).sum();
    let gap = (primal - dual_value).abs() / primal.max(1e-300);
    let out: Vec<(usize, f64)> = kept
        .iter()
        .zip(&w)
        .filter(|(_, wi)| **wi > 0.0)
        .map(|(&k, wi)| (set_ids[k], wi * scale))
        .collect();
    Ok((base + ln(primal), out, gap))
}

/// Marks sets that are not dominated by a cheaper (or equal-cost, earlier) superset.
fn undominated(set_classes: &[Vec<u32>], set_ids: &[usize], log_costs: &[f64]) -> Vec<bool> {
    let m = set_classes.len();
    let mut alive = vec![true; m];
    if m > 4000 {
        return alive;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        log_costs[set_ids[a]]
            .total_cmp(&log_costs[set_ids[b]])
            .then_with(|| set_classes[b].len().cmp(&set_classes[a].len()))
            .then_with(|| a.cmp(&b))
    });
    for (pos, &a) in order.iter().enumerate() {
        if !alive[a] {
            continue;
        }
        for &b in &order[pos + 1..] {
            if alive[b] && is_subset(&set_classes[b], &set_classes[a]) {
                alive[b] = false;
            }
        }
    }
    alive
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
    }
    true
}

/// `max Σ y` s.t. `Σ_{c ∈ rows[r]} y_c ≤ costs[r]`, `y ≥ 0`.
/// Returns the optimum and the dual (covering) weights, one per row.
fn packing_simplex(rows: &[&[u32]], costs: &[f64], vars: usize) -> Result<(f64, Vec<f64>)> {
    const EPS: f64 = 1e-11;
    let m = rows.len();
    let width = vars + m + 1;
    let mut t = vec![0.0_f64; (m + 1) * width];
    for (r, row) in rows.iter().enumerate() {
        for &c in *row {
            t[r * width + c as usize] = 1.0;
        }
        t[r * width + vars + r] = 1.0;
        t[r * width + width - 1] = costs[r];
    }
    let obj = m * width;
    for c in 0..vars {
        t[obj + c] = -1.0;
    }
    let mut basis: Vec<usize> = (vars..vars + m).collect();
    let max_iter = 50 * (m + vars) + 1000;
    let mut stall = 0usize;
    let mut last = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        let bland = stall > 50;
        let mut enter = None;
        let mut most = -EPS;
        for c in 0..vars + m {
            let v = t[obj + c];
            if v < most || (bland && v < -EPS) {
                enter = Some(c);
                most = v;
                if bland {
                    break;
                }
            }
        }
        let Some(col) = enter else {
            let value = t[obj + width - 1];
            let y: Vec<f64> = (0..m).map(|r| t[obj + vars + r].max(0.0)).collect();
            return Ok((value, y));
        };
        let mut leave = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            let a = t[r * width + col];
            if a > EPS {
                let ratio = t[r * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[r] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(pr) = leave else {
            return Err(Error::Lp("packing program is unbounded".into()));
        };
        pivot(&mut t, width, m, pr, col);
        basis[pr] = col;
        let value = t[obj + width - 1];
        if value <= last + 1e-15 {
            stall += 1;
        } else {
            stall = 0;
        }
        last = value;
    }
    Err(Error::Lp(format!("simplex did not converge in {max_iter} pivots")))
}

fn pivot(t: &mut [f64], width: usize, m: usize, pr: usize, col: usize) {
    let p = t[pr * width + col];
    for j in 0..width {
        t[pr * width + j] /= p;
    }
    t[pr * width + col] = 1.0;
    let prow: Vec<f64> = t[pr * width..(pr + 1) * width].to_vec();
    for r in 0..=m {
        if r == pr {
            continue;
        }
        let f = t[r * width + col];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[r * width..(r + 1) * width];
        for (x, pv) in row.iter_mut().zip(&prow) {
            if *pv != 0.0 {
                *x -= f * pv;
            }
        }
        row[col] = 0.0;
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_fractional_optimum() {
        // three elements, three pairs of cost 1: integral optimum 2, fractional 1.5
        let sets = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        let sol = covering_lp(3, &sets, &[0, 1, 2], &[0.0, 0.0, 0.0]).unwrap();
        assert!((exp(sol.log_value) - 1.5).abs() < 1e-9);
        assert!(sol.gap < 1e-9);
        for (_, w) in &sol.weights {
            assert!((w - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn disjoint_components_add_up() {
        let sets = vec![vec![0], vec![1], vec![0, 1], vec![2]];
        let costs = [ln(1.0), ln(1.0), ln(3.0), ln(5.0)];
        let sol = covering_lp(3, &sets, &[0, 1, 2, 3], &costs).unwrap();
        assert_eq!(sol.components, 2);
        assert!((exp(sol.log_value) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn uncovered_element_is_an_error() {
        let sets = vec![vec![0]];
        assert_eq!(covering_lp(2, &sets, &[0], &[0.0]).unwrap_err(), Error::NoCover { index: 1 });
    }
}
