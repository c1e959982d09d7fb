//! Riemannian geometry kernels, covariant dynamics and trajectory-stability
//! tooling for controller and observer design on manifolds.
//!
//! * [`manifold`]: closed-form metric, exp/log, transport, curvature and
//!   distance-function derivatives on Euclidean space, spheres, SO(3) and SPD.
//! * [`oracles`]: finite-difference ground truth for the closed forms.
//! * [`dynamics`]: integrators, variational (complete-lift) propagation,
//!   Jacobi fields and exponential decay fits.
//! * [`control`]: tracking controller, speed observer, SO(3) and Killing
//!   filters, gradient flows and contraction certificates.
//! * [`scenario`]: TOML-configured experiments behind the `geoctl` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod oracles;
pub mod scenario;

pub use error::{GeoError, Result};
pub use linalg::Mat;
pub use manifold::{Manifold, Point, Tangent};
