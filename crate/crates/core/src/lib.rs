//! Quantum energy teleportation in the fully connected N-qubit model.
//!
//! Closed-form energies and efficiencies live in [`closedform`] and
//! [`analysis`]. The [`simkernel`] and [`protocol`] modules re-derive the same
//! quantities by brute force on explicit statevectors, which is how the
//! closed forms are cross-checked.

pub mod analysis;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod golden;
pub mod model;
pub mod output;
pub mod protocol;
pub mod simkernel;
pub mod verify;

pub use error::{QetError, Result};
pub use model::{ModelParams, Partition};
