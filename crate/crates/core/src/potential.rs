use alloc::format;
use alloc::vec::Vec;

use crate::math::floor;
use crate::{Error, Point, Result, StateSpace};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PotentialKind {
    Constant { value: f64 },
    /// `offset + Σ weights[i]·x_i` on real coordinates.
    Affine { weights: Vec<f64>, offset: f64 },
    /// Value of the first symbol.
    SymbolTable { values: Vec<f64> },
    /// Multilinear interpolation of node values on a uniform grid with
    /// `nodes` points per axis. On the circle the grid is periodic
    /// (nodes at `i/nodes`), otherwise it includes both endpoints.
    Grid { nodes: usize, values: Vec<f64> },
}

/// A continuous potential together with the data needed for its modulus of continuity.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Potential {
    pub kind: PotentialKind,
    /// Added to every value; lets `φ + c` reuse the same kind.
    #[cfg_attr(feature = "serde", serde(default))]
    pub shift: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Potential { kind: PotentialKind::Constant { value }, shift: 0.0 }
    }

    pub fn affine(weights: Vec<f64>, offset: f64) -> Self {
        Potential { kind: PotentialKind::Affine { weights, offset }, shift: 0.0 }
    }

    pub fn symbol_table(values: Vec<f64>) -> Self {
        Potential { kind: PotentialKind::SymbolTable { values }, shift: 0.0 }
    }

    pub fn grid(nodes: usize, values: Vec<f64>) -> Self {
        Potential { kind: PotentialKind::Grid { nodes, values }, shift: 0.0 }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Potential { kind: self.kind.clone(), shift: self.shift + c }
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            PotentialKind::Constant { .. } => true,
            PotentialKind::Affine { weights, .. } => weights.iter().all(|w| *w == 0.0),
            PotentialKind::SymbolTable { values } | PotentialKind::Grid { values, .. } => {
                values.windows(2).all(|w| w[0] == w[1])
            }
        }
    }

    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidPotential(m));
        if !self.shift.is_finite() {
            return bad("shift must be finite".into());
        }
        match (&self.kind, space) {
            (PotentialKind::Constant { value }, _) => {
                if !value.is_finite() {
                    return bad("constant must be finite".into());
                }
            }
            (PotentialKind::Affine { weights, offset }, s) if !matches!(s, StateSpace::Symbolic { .. }) => {
                if weights.len() != s.dim() {
                    return bad(format!("expected {} weights, got {}", s.dim(), weights.len()));
                }
                if !offset.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return bad("affine coefficients must be finite".into());
                }
            }
            (PotentialKind::SymbolTable { values }, StateSpace::Symbolic { alphabet, .. }) => {
                if values.len() != *alphabet {
                    return bad(format!("expected {alphabet} table values, got {}", values.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("table values must be finite".into());
                }
            }
            (PotentialKind::Grid { nodes, values }, s) if !matches!(s, StateSpace::Symbolic { .. }) => {
                if *nodes < 2 {
                    return bad("grid needs at least 2 nodes per axis".into());
                }
                let expected = nodes.checked_pow(s.dim() as u32).unwrap_or(usize::MAX);
                if values.len() != expected {
                    return bad(format!("expected {expected} grid values, got {}", values.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("grid values must be finite".into());
                }
            }
            (kind, s) => return bad(format!("{kind:?} is not defined on {s:?}")),
        }
        Ok(())
    }

    pub fn eval(&self, space: &StateSpace, p: &Point) -> f64 {
        let base = match (&self.kind, p) {
            (PotentialKind::Constant { value }, _) => *value,
            (PotentialKind::Affine { weights, offset }, Point::Real(x)) => offset + weights[0] * x,
            (PotentialKind::Affine { weights, offset }, Point::Vector(v)) => {
                offset + weights.iter().zip(v).map(|(w, x)| w * x).sum::<f64>()
            }
            (PotentialKind::SymbolTable { values }, Point::Symbols(s)) => values[s[0] as usize],
            (PotentialKind::Grid { nodes, values }, Point::Real(x)) => {
                grid_eval(*nodes, values, &[*x], matches!(space, StateSpace::Circle))
            }
            (PotentialKind::Grid { nodes, values }, Point::Vector(v)) => grid_eval(*nodes, values, v, false),
            _ => {
                debug_assert!(false, "potential {:?} evaluated at {:?}", self.kind, p);
                0.0
            }
        };
        base + self.shift
    }

    /// `sup φ` over the whole space.
    pub fn sup(&self, space: &StateSpace) -> f64 {
        self.range(space).1 + self.shift
    }

    pub fn inf(&self, space: &StateSpace) -> f64 {
        self.range(space).0 + self.shift
    }

    fn range(&self, space: &StateSpace) -> (f64, f64) {
        match &self.kind {
            PotentialKind::Constant { value } => (*value, *value),
            PotentialKind::Affine { weights, offset } => {
                let lo = offset + weights.iter().map(|w| w.min(0.0)).sum::<f64>();
                let hi = offset + weights.iter().map(|w| w.max(0.0)).sum::<f64>();
                (lo, hi)
            }
            PotentialKind::SymbolTable { values } | PotentialKind::Grid { values, .. } => {
                let _ = space;
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Upper bound on `sup{|φ(x) − φ(y)| : d(x, y) < δ}`.
    pub fn modulus(&self, space: &StateSpace, delta: f64) -> f64 {
        if self.is_constant() || delta <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.range(space);
        let spread = hi - lo;
        match &self.kind {
            PotentialKind::Constant { .. } => 0.0,
            PotentialKind::Affine { weights, .. } => {
                if matches!(space, StateSpace::Circle) {
                    // the lift jumps at 0, so the potential is only continuous when constant
                    spread
                } else {
                    (weights.iter().map(|w| w.abs()).sum::<f64>() * delta).min(spread)
                }
            }
            // d(x, y) < 1 forces equal first symbols
            PotentialKind::SymbolTable { .. } => {
                if delta <= 1.0 {
                    0.0
                } else {
                    spread
                }
            }
            PotentialKind::Grid { nodes, values } => {
                (grid_lipschitz(*nodes, values, space) * delta).min(spread)
            }
        }
    }
}

fn grid_eval(nodes: usize, values: &[f64], x: &[f64], periodic: bool) -> f64 {
    let dim = x.len();
    let cells = if periodic { nodes } else { nodes - 1 };
    let mut base = Vec::with_capacity(dim);
    let mut frac = Vec::with_capacity(dim);
    for &c in x {
        let s = c * cells as f64;
        let mut i = floor(s);
        if i >= cells as f64 {
            i = cells as f64 - 1.0;
        }
        if i < 0.0 {
            i = 0.0;
        }
        base.push(i as usize);
        frac.push((s - i).clamp(0.0, 1.0));
    }
    let mut acc = 0.0;
    for corner in 0u32..(1u32 << dim) {
        let mut weight = 1.0;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for k in 0..dim {
            let up = corner >> k & 1 == 1;
            weight *= if up { frac[k] } else { 1.0 - frac[k] };
            let mut node = base[k] + up as usize;
            if periodic {
                node %= nodes;
            }
            idx += node * stride;
            stride *= nodes;
        }
        if weight != 0.0 {
            acc += weight * values[idx];
        }
    }
    acc
}

/// Sum over axes of the largest edge slope, a Lipschitz bound for the sup metric.
fn grid_lipschitz(nodes: usize, values: &[f64], space: &StateSpace) -> f64 {
    let dim = space.dim();
    let periodic = matches!(space, StateSpace::Circle);
    let h = if periodic { 1.0 / nodes as f64 } else { 1.0 / (nodes - 1) as f64 };
    let mut total = 0.0;
    let mut stride = 1usize;
    for _axis in 0..dim {
        let mut worst = 0.0_f64;
        for idx in 0..values.len() {
            let coord = (idx / stride) % nodes;
            let next = if coord + 1 < nodes {
                Some(idx + stride)
            } else if periodic {
                Some(idx + stride - nodes * stride)
            } else {
                None
            };
            if let Some(j) = next {
                worst = worst.max((values[j] - values[idx]).abs() / h);
            }
        }
        total += worst;
        stride *= nodes;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn values_and_bounds() {
        let s = StateSpace::Symbolic { alphabet: 2, length: 4 };
        let phi = Potential::symbol_table(vec![0.0, 1.0]);
        assert!(phi.validate(&s).is_ok());
        assert_eq!(phi.eval(&s, &Point::Symbols(vec![1, 0, 0, 0])), 1.0);
        assert_eq!(phi.sup(&s), 1.0);
        assert_eq!(phi.modulus(&s, 0.5), 0.0);
        assert_eq!(phi.modulus(&s, 1.5), 1.0);
        assert_eq!(phi.shifted(2.0).eval(&s, &Point::Symbols(vec![0, 0, 0, 0])), 2.0);

        let i = StateSpace::Interval;
        let aff = Potential::affine(vec![1.0], 0.0);
        assert_eq!(aff.sup(&i), 1.0);
        assert!((aff.modulus(&i, 0.1) - 0.1).abs() < 1e-15);
        assert_eq!(aff.modulus(&StateSpace::Circle, 0.1), 1.0);
    }

    #[test]
    fn grid_interpolation() {
        let circle = StateSpace::Circle;
        let g = Potential::grid(4, vec![0.0, 1.0, 0.0, -1.0]);
        assert!(g.validate(&circle).is_ok());
        assert!((g.eval(&circle, &Point::Real(0.125)) - 0.5).abs() < 1e-12);
        assert!((g.eval(&circle, &Point::Real(0.875)) + 0.5).abs() < 1e-12);
        assert_eq!(g.sup(&circle), 1.0);
        assert!((g.modulus(&circle, 0.01) - 0.04).abs() < 1e-12);

        let t = StateSpace::Torus { dim: 2 };
        let bil = Potential::grid(2, vec![0.0, 1.0, 1.0, 2.0]);
        assert!(bil.validate(&t).is_ok());
        assert!((bil.eval(&t, &Point::Vector(vec![0.25, 0.5])) - 0.75).abs() < 1e-12);
        assert!(Potential::grid(3, vec![0.0; 4]).validate(&t).is_err());
    }

    #[test]
    fn modulus_bounds_sampled_differences() {
        let circle = StateSpace::Circle;
        let g = Potential::grid(8, vec![0.3, -0.2, 0.9, 0.1, 0.0, 0.5, -0.7, 0.2]);
        for i in 0..500 {
            let x = (i as f64 * 0.618_033_988_7) % 1.0;
            let y = (x + 0.003 * (i % 7) as f64) % 1.0;
            let (px, py) = (Point::Real(x), Point::Real(y));
            let d = circle.distance(&px, &py);
            let diff = (g.eval(&circle, &px) - g.eval(&circle, &py)).abs();
            assert!(diff <= g.modulus(&circle, d * (1.0 + 1e-9)) + 1e-12);
        }
    }
}
