//! Spectral-truncation microlocal analysis on the flat torus.
//!
//! Finite Fourier models of distributions, smoothing kernels and filtered
//! pseudodifferential operators, the graded norms they carry, tameness and
//! regularity estimation for maps between the graded spaces, wavefront and
//! singular-support detectors, exact unitary propagation with symbol
//! transport checks, and a pair-groupoid model with its vector
//! representation.

pub mod error;
pub mod lattice;
pub mod spectral;
pub mod kernel;
pub mod symbol;
pub mod report;
pub mod tameness;
pub mod microlocal;
pub mod egorov;
pub mod groupoid;

pub use error::{CoreError, Result};
pub use lattice::{Freq, FrequencyLattice, HalfInt};
pub use spectral::SpectralDistribution;
pub use kernel::SmoothingKernel;
pub use symbol::{SampledSymbol, SymbolOperator, XModeProfile};

pub type C64 = num_complex::Complex64;
