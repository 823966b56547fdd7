//! Detection, identification, and compensation of linear man-in-the-middle
//! attacks on the forward channel of a discrete-time feedback loop.
//!
//! The crate simulates a sampled control loop (reference -> controller ->
//! forward channel -> plant -> feedback) in which an attacker may transform
//! the control signal with a gain or an LTI filter. A residual-threshold
//! detector compares the plant output against a parallel reference model,
//! an ARX estimator identifies the attacked dynamics once the detector
//! fires, and a substitute PI/PID controller is synthesized from a
//! unit-circle stability region and hot-swapped into the loop.
//!
//! Modules follow the pipeline: [`lti`] (transfer-function math and
//! simulation), [`attack`] (forward-channel models), [`ids`] (residual
//! detector), [`ident`] (ARX least squares, batch and recursive),
//! [`compensate`] (stability regions and gain selection), [`sim`] (the
//! closed-loop orchestrator), [`scenarios`] (golden experiment
//! definitions), and [`config`] (scenario files).

// validation uses `!(x > 0.0)` so NaN fails the check; `x <= 0.0` would let
// NaN through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod compensate;
pub mod config;
pub mod error;
pub mod ident;
pub mod ids;
pub mod lti;
pub mod scenarios;
pub mod sim;

pub use error::{Error, Result};
