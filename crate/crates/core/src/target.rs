use alloc::format;
use alloc::vec::Vec;

use crate::sample::dedup_prefixes;
use crate::{Error, Point, Result, SampleSet, StateSpace};

/// The set `Z` whose pressure is estimated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TargetSet {
    Whole,
    /// Union of cylinders `[w]` (symbolic spaces only).
    Cylinders(Vec<Vec<u8>>),
    /// A finite set of points.
    Points(Vec<Point>),
}

impl TargetSet {
    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        match self {
            TargetSet::Whole => Ok(()),
            TargetSet::Cylinders(list) => {
                let StateSpace::Symbolic { alphabet, length } = *space else {
                    return Err(Error::InvalidArgument("cylinder targets need a symbolic space".into()));
                };
                if list.is_empty() {
                    return Err(Error::InvalidArgument("cylinder list is empty".into()));
                }
                for w in list {
                    if w.len() > length || w.iter().any(|&c| c as usize >= alphabet) {
                        return Err(Error::InvalidArgument(format!("cylinder {w:?} does not fit the space")));
                    }
                }
                Ok(())
            }
            TargetSet::Points(pts) => {
                if pts.is_empty() {
                    return Err(Error::InvalidArgument("point list is empty".into()));
                }
                pts.iter().try_for_each(|p| space.contains(p))
            }
        }
    }

    pub fn contains(&self, space: &StateSpace, p: &Point) -> bool {
        match self {
            TargetSet::Whole => space.contains(p).is_ok(),
            TargetSet::Cylinders(list) => match p.as_symbols() {
                Some(s) => list.iter().any(|w| s.starts_with(w)),
                None => false,
            },
            TargetSet::Points(pts) => pts.iter().any(|q| space.same_point(p, q)),
        }
    }

    /// Cylinders with no redundant members, for symbolic targets.
    pub fn prefixes(&self) -> Option<Vec<Vec<u8>>> {
        match self {
            TargetSet::Whole => Some(alloc::vec![Vec::new()]),
            TargetSet::Cylinders(list) => Some(dedup_prefixes(list)),
            TargetSet::Points(_) => None,
        }
    }

    /// A finite sample of the target. Symbolic targets get one representative
    /// per cylinder of length `resolution`; continuous whole spaces get a grid
    /// with `resolution` points per axis.
    pub fn sample(&self, space: &StateSpace, resolution: usize, fill: u8) -> Result<SampleSet> {
        self.validate(space)?;
        match self {
            TargetSet::Points(pts) => SampleSet::from_points(space, pts.clone(), 0.0),
            TargetSet::Cylinders(list) => SampleSet::cylinder_reps(space, resolution, Some(list), fill),
            TargetSet::Whole => match space {
                StateSpace::Symbolic { .. } => SampleSet::cylinder_reps(space, resolution, None, fill),
                _ => SampleSet::grid(space, resolution),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn cylinder_membership_and_sample() {
        let space = StateSpace::Symbolic { alphabet: 2, length: 6 };
        let t = TargetSet::Cylinders(vec![vec![0, 1], vec![0, 1, 1], vec![1, 1, 0]]);
        assert!(t.contains(&space, &Point::Symbols(vec![0, 1, 0, 0, 0, 0])));
        assert!(!t.contains(&space, &Point::Symbols(vec![1, 0, 0, 0, 0, 0])));
        assert_eq!(t.prefixes().unwrap(), vec![vec![0, 1], vec![1, 1, 0]]);
        // 2^2 extensions of [01] plus 2 of [110]
        assert_eq!(t.sample(&space, 4, 0).unwrap().len(), 6);
        assert!(TargetSet::Cylinders(vec![vec![2]]).validate(&space).is_err());
    }

    #[test]
    fn whole_circle_sample_is_a_grid() {
        let s = TargetSet::Whole.sample(&StateSpace::Circle, 10, 0).unwrap();
        assert_eq!(s.len(), 10);
    }
}
