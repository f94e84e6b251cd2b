//! Exact simulation of separability criteria built from collective
//! measurements on spin chains and two-mode bosonic lattices.
//!
//! Site indices are 1-based everywhere and composite bases are big-endian
//! (site 1 is the most significant digit).

pub mod bosonic;
pub mod channels;
pub mod criteria;
pub mod error;
pub mod optimize;
pub mod qcore;
pub mod sampling;
pub mod spinchain;

/// Crate version, reported by the command line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use qcore::{
    Axis, CollectiveSpin, DensityMatrix, HilbertSpace, LinearOperator, MaximallyMixed, Observable,
    PauliSum, PureState, QuantumState,
};
