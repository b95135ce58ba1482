//! Brute-force references, written without the pruning and indexing used by
//! the library so that agreement means something.

use naifs_pressure::{MapSpec, NaifsSystem, Point, Potential, StateSpace};

/// Largest distance along any word of length `n` that starts at time `start`.
pub fn naive_dn(sys: &NaifsSystem, start: usize, x: &Point, y: &Point, n: usize) -> f64 {
    let d0 = sys.space().distance(x, y);
    if n == 0 {
        return d0;
    }
    sys.family_at(start)
        .iter()
        .map(|m| naive_dn(sys, start + 1, &m.apply(sys.space(), x), &m.apply(sys.space(), y), n - 1))
        .fold(d0, f64::max)
}

/// Maximum of [`naive_dn`] over more start times than there are start classes.
pub fn naive_dn_star(sys: &NaifsSystem, x: &Point, y: &Point, n: usize) -> f64 {
    let starts = sys.preamble().len() + 3 * sys.period().len();
    (1..=starts).map(|s| naive_dn(sys, s, x, y, n)).fold(0.0, f64::max)
}

/// Largest `Σ_{i<n} φ(x_i)` over every word of length `n − 1`.
pub fn naive_birkhoff(sys: &NaifsSystem, phi: &Potential, x: &Point, n: usize) -> f64 {
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

/// Every composition `f_{w_k} ∘ … ∘ f_{w_1}` with `k ≤ n`, evaluated from
/// scratch for each word, for one generator family acting as a semigroup.
pub fn semigroup_dn(space: &StateSpace, family: &[MapSpec], x: &Point, y: &Point, n: usize) -> f64 {
    let g = family.len();
    let mut best = space.distance(x, y);
    for k in 1..=n {
        let words = g.pow(k as u32);
        for code in 0..words {
            let (mut fx, mut fy) = (x.clone(), y.clone());
            let mut c = code;
            for _ in 0..k {
                let m = &family[c % g];
                c /= g;
                fx = m.apply(space, &fx);
                fy = m.apply(space, &fy);
            }
            best = best.max(space.distance(&fx, &fy));
        }
    }
    best
}

/// Greedy separated count in sample order with a caller-supplied distance.
pub fn greedy_count(points: &[Point], eps: f64, dist: impl Fn(&Point, &Point) -> f64) -> usize {
    let mut kept: Vec<&Point> = Vec::new();
    for p in points {
        if kept.iter().all(|q| dist(p, q) > eps) {
            kept.push(p);
        }
    }
    kept.len()
}

/// Largest slope product over the schedule of a circle system built from
/// `x ↦ a·x + b mod 1`: the expansion rate `max_w Π |a|` over words of length `n`.
pub fn max_slope_product(sys: &NaifsSystem, n: usize) -> Option<f64> {
    let slope = |m: &MapSpec| match m.kind {
        naifs_pressure::MapKind::AffineMod1 { slope, .. } => Some(slope.unsigned_abs() as f64),
        _ => None,
    };
    let starts = sys.start_classes();
    let mut best: f64 = 0.0;
    for s in 1..=starts {
        let mut prod = 1.0;
        for t in 0..n {
            let mut top: f64 = 0.0;
            for m in sys.family_at(s + t) {
                top = top.max(slope(m)?);
            }
            prod *= top;
        }
        best = best.max(prod);
    }
    Some(best)
}

/// Greedy separated counts on the grid `k/g` for circle schedules of linear
/// maps `x ↦ a·x mod 1`, where `slopes_at(t)` lists the slopes at time `t`.
/// Differences evolve independently of the base point, so every distance is
/// a lookup on `(j − i) mod g`.
pub fn translation_counts(slopes_at: &dyn Fn(usize) -> Vec<i64>, starts: usize, g: usize, n: usize, eps: f64) -> usize {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semigroup_and_schedule_enumerations_agree() {
        let fam = vec![MapSpec::affine_mod1(2, 0.0), MapSpec::affine_mod1(3, 0.1)];
        let sys = NaifsSystem::constant(StateSpace::Circle, fam.clone()).unwrap();
        for (x, y) in [(0.1, 0.1003), (0.5, 0.52), (0.9, 0.05)] {
            let (x, y) = (Point::Real(x), Point::Real(y));
            for n in 0..6 {
                let a = naive_dn(&sys, 1, &x, &y, n);
                let b = semigroup_dn(sys.space(), &fam, &x, &y, n);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slope_products_of_the_period_two_schedule() {
        let sys = NaifsSystem::new(
            StateSpace::Circle,
            vec![],
            vec![vec![MapSpec::affine_mod1(2, 0.0)], vec![MapSpec::affine_mod1(3, 0.0)]],
        )
        .unwrap();
        assert_eq!(max_slope_product(&sys, 3), Some(18.0));
        assert_eq!(max_slope_product(&sys, 4), Some(36.0));
    }
}
