//! Λ-coalescent rates, samplers for the block-count jump chain and the
//! external branch, closed-form limit laws and Monte Carlo verifiers.

pub mod error;
pub mod limits;
pub mod measures;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod simulator;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
