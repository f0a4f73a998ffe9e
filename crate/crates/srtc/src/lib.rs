//! Smooth robust tensor completion for grayscale video.
//!
//! Given a video tensor with missing pixels, the solver simultaneously
//! recovers the full tensor and decomposes it into a low-rank Tucker
//! background and a total-variation-smooth foreground, using proximal
//! alternating minimization with an inner ADMM for the smooth component.
//!
//! The crate is organized as:
//!
//! - [`tensor`]: dense order-3 tensors and multilinear primitives
//! - [`tucker`]: factor matrices, HOSVD, and the eigen-based factor update
//! - [`tv`]: periodic difference operators and the FFT solve they induce
//! - [`admm`]: the inner ADMM for the smooth-component subproblem
//! - [`solver`]: the outer alternating loop with convergence diagnostics
//! - [`metrics`]: PSNR / SSIM / precision-recall evaluation
//! - [`data`]: synthetic scenes and observation masks
//! - [`io`]: the SRT1 tensor container and PGM frame export

pub mod admm;
pub mod data;
pub mod error;
pub mod io;
pub mod metrics;
pub mod solver;
pub mod tensor;
pub mod tucker;
pub mod tv;

#[doc(hidden)]
pub mod test_util;

pub use error::{Error, Result};
pub use tensor::{fold, fro_norm, inner, mode_mul, multi_project, unfold, Matrix, Tensor3};
pub use tucker::{CoreTensor, FactorSet};
