use std::f64::consts::FRAC_PI_2;

use crate::dynamics::Trajectory;
use crate::error::{GeoError, Result};
use crate::linalg::{min_eigenvalue, Mat};
use crate::manifold::Manifold;
use crate::oracles::{fd_directional_covariant, OracleConfig};

/// Gradient flow of `d(·, P)² / (2λ)`: `(1/λ) log(q, P)`.
pub fn gradient_flow_field(m: &Manifold, q: &Mat, p: &Mat, lambda_flow: f64) -> Result<Mat> {
    Ok(m.log(q, p)? / lambda_flow)
}

/// Contraction rate `2√A d / (λ tan(√A d))` of `⟨δq, δq⟩` at distance `d`
/// from the attractor, for sectional curvature at most `A`.
pub fn rate_at_distance(d: f64, lambda_flow: f64, a: f64) -> Result<f64> {
    if a < 0.0 {
        return Err(GeoError::DegenerateInput(format!(
            "curvature bound must be ≥ 0, got {a}"
        )));
    }
    let x = a.sqrt() * d;
    if x >= FRAC_PI_2 {
        return Err(GeoError::BeyondValidityRange {
            distance: d,
            limit: FRAC_PI_2 / a.sqrt(),
        });
    }
    Ok(2.0 * crate::manifold::x_cot_x(x) / lambda_flow)
}

/// [`rate_at_distance`] evaluated at `d(q, P)`.
pub fn contraction_rate_bound(
    m: &Manifold,
    q: &Mat,
    p: &Mat,
    lambda_flow: f64,
    a: f64,
) -> Result<f64> {
    rate_at_distance(m.dist(q, p), lambda_flow, a)
}

/// Smallest eigenvalue of the symmetrized `−∇f` over `n_samples` evenly
/// spaced points of `base`. Positive values certify contraction of the norm
/// of variations at that rate.
pub fn contraction_certificate<F>(f: F, base: &Trajectory, n_samples: usize) -> Result<f64>
where
    F: Fn(f64, &Mat) -> Result<Mat>,
{
    if n_samples == 0 || base.is_empty() {
        return Err(GeoError::DegenerateInput("need at least one sample".into()));
    }
    let m = &base.manifold;
    let cfg = OracleConfig::default();
    let last = base.len() - 1;
    let mut margin = f64::INFINITY;
    for s in 0..n_samples {
        let i = if n_samples == 1 {
            0
        } else {
            s * last / (n_samples - 1)
        };
        let (t, p) = (base.times[i], &base.points[i]);
        let basis = m.tangent_basis(p);
        let field =
            |q: &Mat| f(t, q).unwrap_or_else(|_| Mat::from_element(q.nrows(), q.ncols(), f64::NAN));
        let columns: Vec<Mat> = basis
            .iter()
            .map(|e| fd_directional_covariant(m, p, e, &field, &cfg))
            .collect();
        let n = basis.len();
        let jac = Mat::from_fn(n, n, |r, c| -m.inner(p, &basis[r], &columns[c]));
        let lowest = min_eigenvalue(&jac);
        if !lowest.is_finite() {
            return Err(GeoError::DegenerateInput(format!(
                "field undefined near t = {t}"
            )));
        }
        margin = margin.min(lowest);
    }
    Ok(margin)
}

/// Instantaneous log-volume rate `−ΔF / λ` of the gradient flow at `q`.
pub fn volume_rate(m: &Manifold, q: &Mat, p: &Mat, lambda_flow: f64) -> Result<f64> {
    Ok(-m.laplacian_half_sq_dist(q, p)? / lambda_flow)
}
