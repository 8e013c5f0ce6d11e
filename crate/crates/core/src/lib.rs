//! Gaussian Weyl calculus for the Ornstein-Uhlenbeck operator `L = -Δ + x·∇`.
//!
//! The crate computes the semigroup `exp(-zL)` in complex time along three
//! independent routes (closed-form Gaussian kernels, the Hermite spectral
//! representation, and quadrature) and decides restricted
//! `L^p(γ_α) → L^q(γ_β)` boundedness through explicit Schur bounds.
//!
//! Module map:
//!
//! * [`plane_map`]: the time change `s = (1 - e^{-z}) / (1 + e^{-z})`, the
//!   region predicates and grid sampling of regions.
//! * [`weyl_kernel`]: exact algebra of Gaussian kernels, the symbol-to-kernel
//!   map and the Mehler kernel.
//! * [`spectral_oracle`]: Hermite expansions, position/momentum operators and
//!   the Wiener-Plancherel transform.
//! * [`bounds`]: closed-form and numerical Schur bounds.
//! * [`probe`]: forward application of kernels, Gaussian `L^p` norms and
//!   trial-function ratio probes.
//! * [`checks`]: the named verification suites used by the command line.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod checks;
pub mod cmath;
pub mod error;
pub mod func;
pub mod plane_map;
pub mod probe;
pub mod quadrature;
pub mod report;
pub mod spectral_oracle;
pub mod weyl_kernel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
