//! Spectral simulator for the kicked rotor with a two-harmonic potential at
//! quantum resonance `T = 4πr/q`.
//!
//! States live in the momentum basis ([`state`]); one kick period is the
//! exact resonant free phase followed by an FFT-applied kick
//! ([`propagator`]). [`perturbation`] holds the small-`a` force theory and
//! [`symmetry`] the executable transport theorems.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bessel;
pub mod error;
pub mod initial;
pub mod perturbation;
pub mod propagator;
pub mod state;
pub mod symmetry;

pub use error::{Error, Result};
pub use initial::{Builtin, InitialCondition};
pub use perturbation::{ForceCurve, ForceMethod};
pub use propagator::{
    evolve, evolve_inspect, period_map, split_step_oracle, Aborted, FloquetMap, GammaTable,
    KickPotential, ResonanceOrder, Trajectory, TrajectoryRecord,
};
pub use state::{GridSpec, Observables, WaveFunction};
pub use symmetry::{Outcome, SymmetryReport};
