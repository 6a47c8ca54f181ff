//! Synthesis and verification toolkit for finite-dimensional output-feedback
//! boundary control of the semilinear heat equation
//!
//! ```text
//! z_t = z_xx + q z + f(x, t, z),   z_x(0, t) = 0,   z_x(pi, t) = u(t),   y(t) = z(0, t)
//! ```
//!
//! The pipeline is:
//!
//! 1. [`modal`] truncates the Neumann-Laplacian expansion to the first `N` modes.
//! 2. [`residue_gain`] computes the L² gain `gamma` from the input to the
//!    output residue of the neglected modes (harmonic allocation or the
//!    Sobolev baseline).
//! 3. [`riccati`] solves the two coupled H∞-type Riccati equations and builds
//!    the controller gain `K` and observer gain `L`.
//! 4. [`lmi`] searches for a sampled-data certificate and the largest
//!    sampling period it covers.
//! 5. [`synthesis`] composes the above into end-to-end pipelines.
//! 6. [`sim`] validates everything against a spectral Galerkin simulation.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod lmi;
pub mod modal;
mod parallel;
pub mod residue_gain;
pub mod riccati;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use modal::{ModalSystem, PlantParams};
pub use residue_gain::{GainBreakdown, GainMethod};
pub use riccati::{ControllerGains, SynthesisResult};
