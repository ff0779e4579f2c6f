//! Pseudo-spectral simulator and certification suite for an inviscid
//! three-dimensional drift-wave transport system on the periodic box.
//!
//! The model couples a vertical velocity `w` and vertical vorticity `omega`
//! through slice-wise horizontal advection and vertical wave coupling. In the
//! diagonalizing variables `theta = w + L*omega`, `eta = w - L*omega` it is a
//! pair of transport equations
//!
//! ```text
//! d theta/dt + (u . grad_h) theta - U0 d theta/dz = 0
//! d eta/dt   + (u . grad_h) eta   + U0 d eta/dz   = 0
//! ```
//!
//! with the horizontal velocity `u` recovered slice-by-slice from
//! `omega = (theta - eta) / (2L)` by the periodic Biot-Savart law. The crate
//! provides the spectral substrate, the nonlinear and linearized propagators,
//! the fixed-point (successive-linearization) construction with its
//! contraction diagnostics and growth certificates, and runtime checks of the
//! conserved quantities and a-priori inequalities the model satisfies.

pub mod analysis;
pub mod biot_savart;
pub mod commands;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod picard;
pub mod snapshot;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
