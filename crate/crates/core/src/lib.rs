//! Numerics for dissipatively coupled Su–Schrieffer–Heeger chains.
//!
//! * [`linalg`]: dense complex matrices, LU, non-Hermitian eigensolver, ODE integration.
//! * [`model`]: chain parameters and Hamiltonians.
//! * [`topology`]: phase classification, dispersion, winding number.
//! * [`edge`]: hybridized edge states and their analytic splitting.
//! * [`dynamics`]: single-excitation open-system dynamics and adiabatic elimination.

pub mod error;
pub mod linalg;
pub mod model;
pub mod topology;
pub mod edge;
pub mod dynamics;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
