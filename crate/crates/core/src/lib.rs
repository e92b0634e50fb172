//! Analysis of square matrices as candidate kernels of permanental vectors.
//!
//! A nonnegative random vector θ is permanental with kernel Γ and index β
//! when its Laplace transform is `det(I + αΓ)^(-β)` for every nonnegative
//! diagonal α. This crate checks the standard necessary conditions, decides
//! the two-class structure of 3x3 kernels (diagonally equivalent to a
//! symmetric PSD matrix, or inverse diagonally equivalent to an M-matrix),
//! certifies infinite divisibility, and validates accepted kernels by
//! sampling.

pub mod classify;
pub mod divisibility;
pub mod error;
pub mod kernelcheck;
pub mod matcore;
pub mod sampleverify;
pub mod spectra;

pub use error::{Error, Result};
pub use kernelcheck::{Kernel, Tolerance};
pub use matcore::{Diagonal, Matrix, Spectrum};
