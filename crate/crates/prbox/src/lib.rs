//! Process-based Popescu-Rohrlich boxes.
//!
//! A simulator and verification library for the two-qubit measure-and-prepare
//! channel that realizes a PR box when probed with Z-basis process
//! measurements, together with CHSH analysis of correlation boxes, the
//! process-effect measurement layer over Choi operators, a seesaw search for
//! the quantum CHSH ceiling, and the classical two-party protocol that
//! simulates the channel with one shared bit and one communicated bit.

pub mod boxes;
pub mod channels;
pub mod error;
pub mod linalg;
pub mod process_gpt;
pub mod protocol;
pub mod quantum_bounds;
pub mod random;
pub mod verify;

pub use error::{PrBoxError, Result};
