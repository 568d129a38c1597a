//! Shipboard post-combustion carbon capture: plant simulation, hybrid
//! gray-box modeling, and sampling-based economic predictive control.
//!
//! The crate models a two-engine cargo ship whose flue gas is treated by an
//! MEA absorber/desorber loop with waste-heat recovery and a diesel gas
//! turbine supplying reboiler duty. The plant is a semi-explicit index-1 DAE
//! with 103 differential and 7 algebraic states, advanced by fixed-step
//! implicit Euler with Newton iteration.
//!
//! On top of the simulator the crate provides:
//!
//! - [`datagen`]: excitation-signal generation and one-step-ahead dataset
//!   assembly with model-mismatch labels,
//! - [`neural`]: a small dense-MLP stack (tanh activations, Adam) used for
//!   algebraic-state inference, state-dynamics compensation, and black-box
//!   baselines,
//! - [`hybrid`]: the composed predictor `x_next = fp_step(x, z_inferred, u, p)
//!   + compensation(x, z_inferred, u, p)`,
//! - [`control`]: economic and tracking stage costs, a constrained
//!   cross-entropy solver, and a closed-loop runner against the truth plant,
//! - [`cli`]: config-driven commands used by the `shipcc` binary and the
//!   runnable examples.
//!
//! Start with the examples: `cargo run --release --example simulate_open_loop`.

pub mod cli;
pub mod config;
pub mod control;
pub mod datagen;
mod error;
pub mod hybrid;
pub mod integrator;
pub mod io;
pub mod neural;
pub mod plant;

pub use error::{Error, Result};
