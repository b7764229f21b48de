//! Numerical core for disordered pinning models built on renewal processes.
//!
//! The crate is `no_std` with `alloc`. It provides renewal kernels, the
//! exactly solvable homogeneous model, reproducible disorder, and exact
//! finite-volume partition functions with Gibbs sampling.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod disorder;
pub mod engine;
pub mod error;
pub mod fit;
pub mod homogeneous;
pub mod kernels;
pub mod math;
pub mod stats;

pub use disorder::{sample, DisorderLaw, DisorderSample};
pub use engine::{GibbsPath, ModelParams, PartitionTable};
pub use error::{Error, Result};
pub use kernels::{build_kernel, KernelFamily, RenewalKernel, SlowlyVarying};
pub use stats::EstimateWithError;
