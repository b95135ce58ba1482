//! Topological pressure estimators for non-autonomous iterated function systems.
//!
//! A system is a compact metric space together with an eventually periodic
//! schedule of finite generator families. Orbits follow words, one generator
//! index per time step. Everything in this crate is built on the word-maximal
//! dynamical metric `d_n` and the maximal Birkhoff sum `S_n φ`, both evaluated
//! by exact pruned search over the word tree (with a flagged beam fallback).
//!
//! On top of those primitives the crate provides
//!
//! - separated/spanning set counting and the sup-entropy estimator ([`counting`]),
//! - Carathéodory–Pesin cover costs, their critical exponents and the weighted
//!   (fractional covering) variant ([`pressure`]),
//! - Borel measures on the state space, Bowen-ball masses and the
//!   measure-theoretic pressure used for the variational principle ([`measures`]).
//!
//! The crate is `no_std` and only needs `alloc`. Parallel evaluation is
//! delegated to an [`Executor`] supplied by the caller.
//!
//! ```
//! use naifs_pressure::{metrics, MapSpec, NaifsSystem, Point, StateSpace, TreeBudget};
//!
//! let sys = NaifsSystem::constant(StateSpace::Circle, vec![MapSpec::affine_mod1(2, 0.0)]).unwrap();
//! let (d, _) = metrics::d_n(&sys, &Point::Real(0.1), &Point::Real(0.12), 2, &TreeBudget::default());
//! assert!((d - 0.08).abs() < 1e-12);
//! ```

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod counting;
pub mod cover;
mod error;
mod exec;
pub mod index;
pub mod lp;
mod map;
pub mod math;
pub mod measures;
pub mod metrics;
mod potential;
pub mod pressure;
mod sample;
mod space;
mod system;
mod target;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use map::{MapKind, MapSpec};
pub use metrics::{Membership, Metric, Mode, TreeBudget};
pub use potential::{Potential, PotentialKind};
pub use sample::SampleSet;
pub use space::{Point, StateSpace, POINT_TOLERANCE};
pub use system::{GeneratorFamily, NaifsSystem, Word};
pub use target::TargetSet;
