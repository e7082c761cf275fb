//! Rotor-router walks on the diagonal lattice: exact influence kernels, extremal block
//! configurations, certified discrepancy sums, chip machines and rotor IDLA.

pub mod aggregate;
pub mod blockcfg;
pub mod error;
pub mod idla;
pub mod interval;
pub mod kernel;
pub mod lattice;
pub mod machine;
pub mod modes;
pub mod poly;

pub use error::{Error, Result};
