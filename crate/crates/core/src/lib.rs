//! Positive realizations of primitive transfer functions.
//!
//! [`realizer::realize`] expands `H(z)`, shifts it until the dominant
//! residue covers every pole block, builds the blocks and prepends a delay
//! chain for the skipped impulse values. [`bounds`] gives lower bounds on the
//! dimension from the zero pattern of the impulse response, and [`checker`]
//! verifies realizations independently of the construction.

pub mod blocks;
pub mod bounds;
pub mod checker;
pub mod error;
pub mod geometry;
pub mod partial_fraction;
pub mod polynomial;
pub mod realization;
pub mod realizer;
pub mod transfer;

pub use blocks::BudgetMode;
pub use error::{Error, Result};
pub use partial_fraction::{expand, PartialFraction, PoleTerm};
pub use realization::Realization;
pub use realizer::{realize, realize_partial_fraction, Outcome, RealizeOptions};
pub use transfer::TransferFunction;
