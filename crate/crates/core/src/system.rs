use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, MapSpec, Point, Result, StateSpace};

pub type GeneratorFamily = Vec<MapSpec>;

/// A state space with an eventually periodic schedule of generator families.
///
/// Time starts at 1: `family_at(1)` is the first family applied.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NaifsSystem {
    space: StateSpace,
    preamble: Vec<GeneratorFamily>,
    period: Vec<GeneratorFamily>,
}

/// Generator indices chosen at consecutive times, starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Word {
    pub start: usize,
    pub indices: Vec<usize>,
}

impl Word {
    pub fn new(start: usize, indices: Vec<usize>) -> Self {
        Word { start, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn validate(&self, sys: &NaifsSystem) -> Result<()> {
        if self.start == 0 {
            return Err(Error::MalformedWord("start time must be at least 1".into()));
        }
        for (t, &i) in self.indices.iter().enumerate() {
            let size = sys.family_at(self.start + t).len();
            if i >= size {
                return Err(Error::MalformedWord(format!(
                    "index {i} at position {t} exceeds family size {size}"
                )));
            }
        }
        Ok(())
    }
}

impl NaifsSystem {
    pub fn new(
        space: StateSpace,
        preamble: Vec<GeneratorFamily>,
        period: Vec<GeneratorFamily>,
    ) -> Result<Self> {
        space.validate()?;
        if period.is_empty() {
            return Err(Error::InvalidSchedule("period must contain at least one family".into()));
        }
        for (name, list) in [("preamble", &preamble), ("period", &period)] {
            for (j, fam) in list.iter().enumerate() {
                if fam.is_empty() {
                    return Err(Error::InvalidSchedule(format!("{name} family {j} is empty")));
                }
                for (i, m) in fam.iter().enumerate() {
                    m.validate(&space).map_err(|e| match e {
                        Error::InvalidMap(msg) => {
                            Error::InvalidMap(format!("{name} family {j}, map {i}: {msg}"))
                        }
                        other => other,
                    })?;
                }
            }
        }
        Ok(NaifsSystem { space, preamble, period })
    }

    /// Free semigroup action: the same family at every time.
    pub fn constant(space: StateSpace, family: GeneratorFamily) -> Result<Self> {
        Self::new(space, Vec::new(), vec![family])
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn preamble(&self) -> &[GeneratorFamily] {
        &self.preamble
    }

    pub fn period(&self) -> &[GeneratorFamily] {
        &self.period
    }

    /// Family used at time `j ≥ 1`.
    pub fn family_at(&self, j: usize) -> &GeneratorFamily {
        assert!(j >= 1, "time index starts at 1");
        let p = self.preamble.len();
        if j <= p {
            &self.preamble[j - 1]
        } else {
            &self.period[(j - 1 - p) % self.period.len()]
        }
    }

    /// Number of distinct start times needed to realise every shifted schedule.
    pub fn start_classes(&self) -> usize {
        self.preamble.len() + self.period.len()
    }

    pub fn is_constant(&self) -> bool {
        self.start_classes() == 1
    }

    pub fn max_family_size(&self) -> usize {
        self.preamble
            .iter()
            .chain(&self.period)
            .map(|f| f.len())
            .max()
            .unwrap_or(1)
    }

    /// Number of words of length `n` starting at `start`, saturating at `u64::MAX`.
    pub fn leaf_count(&self, start: usize, n: usize) -> u64 {
        let mut total: u64 = 1;
        for t in 0..n {
            total = total.saturating_mul(self.family_at(start + t).len() as u64);
            if total == u64::MAX {
                break;
            }
        }
        total
    }

    pub fn apply_map(&self, j: usize, i: usize, x: &Point) -> Result<Point> {
        if j == 0 {
            return Err(Error::MalformedWord("time index starts at 1".into()));
        }
        let fam = self.family_at(j);
        let m = fam.get(i).ok_or_else(|| {
            Error::MalformedWord(format!("index {i} exceeds family size {} at time {j}", fam.len()))
        })?;
        Ok(m.apply(&self.space, x))
    }

    #[inline]
    pub(crate) fn step(&self, j: usize, i: usize, x: &Point) -> Point {
        self.family_at(j)[i].apply(&self.space, x)
    }

    /// `[x, f_w^{m,1}(x), …, f_w^{m,|w|}(x)]`.
    pub fn orbit(&self, x: &Point, w: &Word) -> Result<Vec<Point>> {
        self.space.contains(x)?;
        w.validate(self)?;
        let mut out = Vec::with_capacity(w.len() + 1);
        out.push(x.clone());
        for (t, &i) in w.indices.iter().enumerate() {
            let next = self.step(w.start + t, i, &out[t]);
            out.push(next);
        }
        Ok(out)
    }

    /// `g[t]`: bound on how much a distance at depth `t` can grow over the
    /// remaining `n − t` steps, `max_k Π_{s<k} L(start + t + s)` with certified
    /// constants (`∞` when some map has none).
    pub(crate) fn growth_bounds(&self, start: usize, n: usize) -> Vec<f64> {
        let mut g = vec![0.0_f64; n + 1];
        for t in (0..n).rev() {
            let l = self
                .family_at(start + t)
                .iter()
                .map(|m| m.certified_lipschitz().unwrap_or(f64::INFINITY))
                .fold(0.0_f64, f64::max);
            g[t] = l * g[t + 1].max(1.0);
        }
        g
    }

    /// Word that picks the generator with the largest declared Lipschitz
    /// constant at every time (first one on ties).
    pub fn steepest_word(&self, start: usize, n: usize) -> Word {
        let indices = (0..n)
            .map(|t| {
                let fam = self.family_at(start + t);
                let mut best = 0;
                for (i, m) in fam.iter().enumerate() {
                    if m.lipschitz > fam[best].lipschitz {
                        best = i;
                    }
                }
                best
            })
            .collect();
        Word { start, indices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: i64) -> MapSpec {
        MapSpec::affine_mod1(a, 0.0)
    }

    #[test]
    fn family_lookup_follows_unrolled_schedule() {
        let sys = NaifsSystem::new(
            StateSpace::Circle,
            vec![vec![e(5)]],
            vec![vec![e(2)], vec![e(3)]],
        )
        .unwrap();
        let slope = |j| match sys.family_at(j)[0].kind {
            crate::MapKind::AffineMod1 { slope, .. } => slope,
            _ => unreachable!(),
        };
        // unrolled: A, B, C, B, C, ...
        assert_eq!([1, 2, 3, 4, 5].map(slope), [5, 2, 3, 2, 3]);
        for j in 2..=(1 + 3 * 2) {
            assert_eq!(slope(j), slope(j + 2));
        }
    }

    #[test]
    fn orbit_examples() {
        let doubling = NaifsSystem::constant(StateSpace::Circle, vec![e(2)]).unwrap();
        let x = Point::Real(0.1);
        assert_eq!(doubling.orbit(&x, &Word::new(1, vec![])).unwrap(), vec![x.clone()]);
        let o = doubling.orbit(&x, &Word::new(1, vec![0, 0])).unwrap();
        let vals: Vec<f64> = o.iter().map(|p| p.as_real().unwrap()).collect();
        assert!((vals[1] - 0.2).abs() < 1e-12 && (vals[2] - 0.4).abs() < 1e-12);

        let alt = NaifsSystem::new(StateSpace::Circle, vec![], vec![vec![e(2)], vec![e(3)]]).unwrap();
        let o = alt.orbit(&x, &Word::new(1, vec![0, 0])).unwrap();
        assert!((o[2].as_real().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn malformed_words_are_rejected() {
        let sys = NaifsSystem::constant(StateSpace::Circle, vec![e(2), e(3)]).unwrap();
        assert!(matches!(
            sys.apply_map(1, 2, &Point::Real(0.1)),
            Err(Error::MalformedWord(_))
        ));
        assert!(sys.orbit(&Point::Real(0.1), &Word::new(1, vec![0, 5])).is_err());
        assert!(sys.orbit(&Point::Real(0.1), &Word::new(0, vec![0])).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(NaifsSystem::new(StateSpace::Circle, vec![], vec![]).is_err());
        assert!(NaifsSystem::new(StateSpace::Circle, vec![], vec![vec![]]).is_err());
        assert!(NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::shift(0)]).is_err());
    }

    #[test]
    fn leaf_counts_and_steepest_word() {
        let sys = NaifsSystem::constant(StateSpace::Circle, vec![e(2), e(3)]).unwrap();
        assert_eq!(sys.leaf_count(1, 10), 1024);
        assert_eq!(sys.leaf_count(1, 100), u64::MAX);
        assert_eq!(sys.steepest_word(1, 3).indices, vec![1, 1, 1]);
    }
}
