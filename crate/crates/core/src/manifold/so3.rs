//! SO(3) with the bi-invariant metric `⟨X, Y⟩ = tr(XᵀY)`.
//!
//! A tangent vector at `R` is `R X` with `X` skew. With this metric the
//! Levi-Civita connection on left-invariant fields is `½[X, Y]` and
//! `R(X,Y)Z = −¼ [[X,Y],Z]`; a unit-speed direction has Jacobi-operator
//! eigenvalue 1/8 on its orthogonal complement.

use crate::error::{GeoError, Result};
use crate::linalg::{self, commutator, skew_part, Mat};

pub(super) const SECTIONAL_CURVATURE: f64 = 0.125;

/// Rotation angles at or above `π − CUT_MARGIN` are treated as the cut locus.
pub(super) const CUT_MARGIN: f64 = 1e-8;

pub(super) fn constraint_residual(p: &Mat) -> f64 {
    let orth = (p.transpose() * p - Mat::identity(3, 3)).norm();
    let det = (p.determinant() - 1.0).abs();
    orth.max(det)
}

pub(super) fn project_tangent(p: &Mat, x: &Mat) -> Mat {
    p * skew_part(&(p.transpose() * x))
}

pub(super) fn exp(p: &Mat, v: &Mat) -> Result<Mat> {
    let x = skew_part(&(p.transpose() * v));
    let angle = linalg::vee(&x).iter().map(|c| c * c).sum::<f64>().sqrt();
    if angle >= std::f64::consts::PI {
        return Err(GeoError::InjectivityRadiusExceeded {
            norm: v.norm(),
            guard: std::f64::consts::PI * std::f64::consts::SQRT_2,
        });
    }
    Ok(p * linalg::so3_exp(&x))
}

fn relative_log(p: &Mat, q: &Mat) -> Result<Mat> {
    let rel = p.transpose() * q;
    if linalg::rotation_angle(&rel) >= std::f64::consts::PI - CUT_MARGIN {
        return Err(GeoError::AtCutLocus);
    }
    Ok(linalg::so3_log(&rel).0)
}

pub(super) fn log(p: &Mat, q: &Mat) -> Result<Mat> {
    Ok(p * relative_log(p, q)?)
}

pub(super) fn dist(p: &Mat, q: &Mat) -> f64 {
    std::f64::consts::SQRT_2 * linalg::rotation_angle(&(p.transpose() * q))
}

pub(super) fn transport(p: &Mat, q: &Mat, v: &Mat) -> Result<Mat> {
    let x = relative_log(p, q).map_err(|_| GeoError::InjectivityRadiusExceeded {
        norm: std::f64::consts::PI * std::f64::consts::SQRT_2,
        guard: std::f64::consts::PI * std::f64::consts::SQRT_2,
    })?;
    let half = linalg::so3_exp(&(&x * 0.5));
    let y = p.transpose() * v;
    Ok(p * &half * y * half)
}

pub(super) fn curvature(p: &Mat, x: &Mat, y: &Mat, z: &Mat) -> Mat {
    let pt = p.transpose();
    let (a, b, c) = (&pt * x, &pt * y, &pt * z);
    p * commutator(&commutator(&a, &b), &c) * (-0.25)
}

pub(super) fn connection_term(p: &Mat, u: &Mat, v: &Mat) -> Mat {
    let pt = p.transpose();
    let (a, b) = (&pt * u, &pt * v);
    p * (&a * &b + &b * &a) * 0.5
}

pub(super) fn basis(p: &Mat) -> Vec<Mat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]]
        .into_iter()
        .map(|w| p * linalg::hat(w))
        .collect()
}
