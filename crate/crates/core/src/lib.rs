//! Solution verification by grid refinement with preset orders of accuracy.
//!
//! The crate is organised around four pieces:
//!
//! * [`grid`]: refinement ladders, irreducible units and exact shared-point lattices;
//! * [`schemes`]: reference finite-difference solvers with manufactured solutions;
//! * [`estimator`]: preset-order expansion fits, error norms, convergence slopes,
//!   the asymptotic-range ratio and order iteration;
//! * [`midas`]: interpolation of differences between approximate solutions so that
//!   fractional refinement ratios still yield dense error estimates.

pub mod estimator;
pub mod grid;
pub mod midas;
pub mod schemes;

mod error;

pub use error::{Error, Result};
