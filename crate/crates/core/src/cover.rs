//! Greedy weighted set cover in the log domain.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::{ln, log_sum_exp};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSolution {
    /// Chosen set ids, in selection order.
    pub chosen: Vec<usize>,
    /// `ln Σ exp(log_costs[s])` over the chosen sets.
    pub log_cost: f64,
}

#[derive(PartialEq)]
struct Entry {
    key: f64,
    set: usize,
    count: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap: invert so the smallest key (then smallest id) pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.set.cmp(&self.set))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Covers elements `0..universe` with sets drawn from `ids`, repeatedly taking
/// the set with the smallest cost per newly covered element. `sets[s]` lists
/// the elements of set `s`; `log_costs[s]` is its natural-log cost.
///
/// A final pass drops chosen sets that became redundant, most expensive first.
pub fn greedy_weighted_cover(
    universe: usize,
    sets: &[Vec<u32>],
    ids: &[usize],
    log_costs: &[f64],
) -> Result<CoverSolution> {
    let mut coverable = vec![false; universe];
    for &s in ids {
        for &e in &sets[s] {
            coverable[e as usize] = true;
        }
    }
    if let Some(index) = coverable.iter().position(|c| !c) {
        return Err(Error::NoCover { index });
    }
    let mut covered = vec![false; universe];
    let mut remaining = universe;
    let mut heap: BinaryHeap<Entry> = ids
        .iter()
        .filter(|&&s| !sets[s].is_empty())
        .map(|&s| Entry { key: log_costs[s] - ln(sets[s].len() as f64), set: s, count: sets[s].len() })
        .collect();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let Some(top) = heap.pop() else {
            // unreachable given the coverability check
            let index = covered.iter().position(|c| !c).unwrap_or(0);
            return Err(Error::NoCover { index });
        };
        let fresh = sets[top.set].iter().filter(|&&e| !covered[e as usize]).count();
        if fresh == 0 {
            continue;
        }
        if fresh < top.count {
            heap.push(Entry { key: log_costs[top.set] - ln(fresh as f64), set: top.set, count: fresh });
            continue;
        }
        for &e in &sets[top.set] {
            if !covered[e as usize] {
                covered[e as usize] = true;
                remaining -= 1;
            }
        }
        chosen.push(top.set);
    }
    prune_redundant(universe, sets, &mut chosen, log_costs);
    let log_cost = log_sum_exp(chosen.iter().map(|&s| log_costs[s]));
    Ok(CoverSolution { chosen, log_cost })
}

fn prune_redundant(universe: usize, sets: &[Vec<u32>], chosen: &mut Vec<usize>, log_costs: &[f64]) {
    let mut mult = vec![0u32; universe];
    for &s in chosen.iter() {
        for &e in &sets[s] {
            mult[e as usize] += 1;
        }
    }
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by(|&a, &b| {
        log_costs[chosen[b]]
            .total_cmp(&log_costs[chosen[a]])
            .then_with(|| chosen[a].cmp(&chosen[b]))
    });
    let mut keep = vec![true; chosen.len()];
    for k in order {
        let s = chosen[k];
        if sets[s].iter().all(|&e| mult[e as usize] >= 2) {
            keep[k] = false;
            for &e in &sets[s] {
                mult[e as usize] -= 1;
            }
        }
    }
    let mut i = 0;
    chosen.retain(|_| {
        let k = keep[i];
        i += 1;
        k
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheap_large_sets() {
        let sets = vec![vec![0, 1, 2, 3], vec![0, 1], vec![2, 3], vec![3]];
        let costs = [ln(3.0), ln(1.0), ln(1.0), ln(0.1)];
        let sol = greedy_weighted_cover(4, &sets, &[0, 1, 2, 3], &costs).unwrap();
        // {3} first (0.1 per element), then the pairs beat the big set per new element
        let mut c = sol.chosen.clone();
        c.sort();
        assert_eq!(c, vec![1, 2]);
        assert!((sol.log_cost - ln(2.0)).abs() < 1e-12);
    }

    #[test]
    fn reports_uncoverable_element() {
        let sets = vec![vec![0], vec![1]];
        let err = greedy_weighted_cover(3, &sets, &[0, 1], &[0.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NoCover { index: 2 });
    }

    #[test]
    fn empty_universe_costs_nothing() {
        let sol = greedy_weighted_cover(0, &[], &[], &[]).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.log_cost, f64::NEG_INFINITY);
    }
}
