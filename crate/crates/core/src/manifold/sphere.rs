//! Round sphere of radius `r` embedded in `R^{n+1}`.

use crate::error::{GeoError, Result};
use crate::linalg::Mat;

/// `⟨p, q⟩ / r²` at or below this value is treated as antipodal.
pub(super) const ANTIPODAL_COSINE: f64 = -1.0 + 1e-10;

pub(super) fn project_tangent(r: f64, p: &Mat, x: &Mat) -> Mat {
    x - p * (p.dot(x) / (r * r))
}

pub(super) fn exp(r: f64, p: &Mat, v: &Mat) -> Result<Mat> {
    let nv = v.norm();
    if nv >= std::f64::consts::PI * r {
        return Err(GeoError::InjectivityRadiusExceeded {
            norm: nv,
            guard: std::f64::consts::PI * r,
        });
    }
    if nv == 0.0 {
        return Ok(p.clone());
    }
    let theta = nv / r;
    Ok(p * theta.cos() + v * (r * theta.sin() / nv))
}

/// Angle `θ = d/r` and the unit direction of `log_p q` (None when q == p).
fn angle_and_direction(r: f64, p: &Mat, q: &Mat) -> (f64, Option<Mat>) {
    let along = p.dot(q) / r;
    let perp = q - p * (along / r);
    let np = perp.norm();
    let theta = np.atan2(along);
    if np == 0.0 {
        (theta, None)
    } else {
        (theta, Some(perp / np))
    }
}

pub(super) fn log(r: f64, p: &Mat, q: &Mat) -> Result<Mat> {
    if p.dot(q) / (r * r) <= ANTIPODAL_COSINE {
        return Err(GeoError::AtCutLocus);
    }
    match angle_and_direction(r, p, q) {
        (_, None) => Ok(Mat::zeros(p.nrows(), 1)),
        (theta, Some(u)) => Ok(u * (r * theta)),
    }
}

pub(super) fn dist(r: f64, p: &Mat, q: &Mat) -> f64 {
    r * angle_and_direction(r, p, q).0
}

pub(super) fn transport(r: f64, p: &Mat, q: &Mat, v: &Mat) -> Result<Mat> {
    if p.dot(q) / (r * r) <= ANTIPODAL_COSINE {
        return Err(GeoError::InjectivityRadiusExceeded {
            norm: std::f64::consts::PI * r,
            guard: std::f64::consts::PI * r,
        });
    }
    match angle_and_direction(r, p, q) {
        (_, None) => Ok(v.clone()),
        (theta, Some(u)) => {
            // Only the component along the geodesic direction rotates.
            let a = v.dot(&u);
            let rotated = &u * theta.cos() - p * (theta.sin() / r);
            Ok(v - &u * a + rotated * a)
        }
    }
}

pub(super) fn curvature(r: f64, x: &Mat, y: &Mat, z: &Mat) -> Mat {
    (x * y.dot(z) - y * x.dot(z)) / (r * r)
}

pub(super) fn basis(r: f64, p: &Mat) -> Vec<Mat> {
    let m = p.nrows();
    let unit = p / r;
    // Drop the standard axis most aligned with p, Gram–Schmidt the rest.
    let mut skip = 0;
    for i in 1..m {
        if unit[(i, 0)].abs() > unit[(skip, 0)].abs() {
            skip = i;
        }
    }
    let mut out: Vec<Mat> = Vec::with_capacity(m - 1);
    for i in (0..m).filter(|&i| i != skip) {
        let mut w = Mat::zeros(m, 1);
        w[(i, 0)] = 1.0;
        w -= &unit * unit[(i, 0)];
        for e in &out {
            let c = w.dot(e);
            w -= e * c;
        }
        let n = w.norm();
        out.push(w / n);
    }
    out
}
