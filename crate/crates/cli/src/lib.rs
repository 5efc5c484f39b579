//! Library side of the `ratchet` command: configuration, CSV commands and
//! verification batteries.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

pub use commands::{cmd_evolve, cmd_fig, cmd_gamma, cmd_sweep, FigureId, SweepRow};
pub use config::{KSpec, RunConfig};
pub use error::CliError;
pub use verify::{cmd_verify, Suite};
