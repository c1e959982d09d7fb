//! Integration of first- and second-order dynamics on manifolds, variations
//! along trajectories, and exponential decay fits.

mod decay;
mod integrate;
mod lift;
mod variation;

use crate::error::Result;
use crate::linalg::Mat;
use crate::manifold::Manifold;

pub use decay::{fit_decay, DecayFit, DEFAULT_WINDOW_FRAC, MIN_WINDOW_SAMPLES, ZERO_FLOOR};
pub use integrate::{
    integrate_first_order, integrate_second_order, integrate_tangent_bundle, Scheme, Trajectory,
    MAX_DRIFT,
};
pub use lift::{lift_frame_analysis, lift_frame_analysis_tb, LiftAnalysis};
pub use variation::{
    geodesic_residual, parallel_frame, propagate_jacobi, propagate_linearized_el,
    propagate_variation_fd, propagate_variation_fd_tb, VariationTrack,
};

/// Default integration step.
pub const DEFAULT_H: f64 = 1e-3;
/// Default finite-difference offset for variations.
pub const DEFAULT_EPS: f64 = 1e-5;

/// Transport-based proxy for the Sasaki distance between `(p, v)` and
/// `(q, w)`: `√(d(p,q)² + |P_p^q v − w|²)`. It bounds the true distance
/// from above.
pub fn sasaki_distance(m: &Manifold, a: (&Mat, &Mat), b: (&Mat, &Mat)) -> Result<f64> {
    let (p, v) = a;
    let (q, w) = b;
    let d = m.dist(p, q);
    let moved = m.transport(p, q, v)?;
    let fiber = m.norm(q, &(moved - w));
    Ok((d * d + fiber * fiber).sqrt())
}

#[cfg(test)]
mod tests;
