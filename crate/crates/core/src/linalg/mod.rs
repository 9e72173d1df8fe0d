//! Dense complex linear algebra: matrices, LU solves, the non-Hermitian
//! eigensolver and the adaptive time integrator.

pub mod eigen;
pub mod matrix;
pub mod ode;
pub mod solve;

pub use eigen::{eig, eig_with, eigenvalues, spectral_distance, EigenDecomposition, EigenOptions, LeftVectors};
pub use matrix::{bilinear, inner, norm2, normalize, ComplexMatrix};
pub use ode::{evolve, evolve_with, integrate, OdeOptions};
pub use solve::{solve, Lu};
