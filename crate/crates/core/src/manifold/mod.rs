//! Closed-form Riemannian geometry on four concrete manifolds.
//!
//! Points and tangent vectors are stored in ambient coordinates:
//!
//! | manifold          | point                      | tangent at `p`            |
//! |-------------------|----------------------------|---------------------------|
//! | `Euclidean(n)`    | `n × 1` column             | any `n × 1` column        |
//! | `Sphere(n, r)`    | `(n+1) × 1`, `|p| = r`     | `⟨p, v⟩ = 0`              |
//! | `SO3`             | `3 × 3` rotation           | `pᵀ v` skew-symmetric     |
//! | `SPD(n)`          | `n × n` symmetric, `p > 0` | symmetric `n × n`         |
//!
//! The SO(3) metric is `⟨X, Y⟩ = tr(XᵀY)` with no ½ factor; SPD carries the
//! affine-invariant metric `tr(X P⁻¹ Y P⁻¹)`.
//!
//! Curvature follows `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so the
//! sectional curvature is `⟨R(x,y)y, x⟩ / |x ∧ y|²` and is positive on the
//! sphere. The sign is locked against the finite-difference oracle in
//! [`crate::oracles`].
//!
//! The `Manifold` methods operate on raw ambient matrices and perform no
//! validation beyond what the closed forms need; the typed API
//! ([`Point`], [`Tangent`], [`Geometry`]) checks basepoints and constraints.

mod euclidean;
mod so3;
mod spd;
mod sphere;
mod typed;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::Mat;

pub use typed::{
    curvature, dist, exp_map, grad_half_sq_dist, hess_half_sq_dist, inner, laplacian_half_sq_dist,
    log_map, parallel_transport, BilinearReport, Geometry, Point, Tangent, Tolerances,
};

/// One of the supported manifolds together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Manifold {
    Euclidean { n: usize },
    Sphere { n: usize, radius: f64 },
    So3,
    Spd { n: usize },
}

impl Manifold {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GeoError::InvalidManifold(
                "Euclidean dimension must be ≥ 1".into(),
            ));
        }
        Ok(Manifold::Euclidean { n })
    }

    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(GeoError::InvalidManifold(
                "sphere dimension must be ≥ 1".into(),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeoError::InvalidManifold(format!(
                "sphere radius {radius} must be > 0"
            )));
        }
        Ok(Manifold::Sphere { n, radius })
    }

    pub fn so3() -> Self {
        Manifold::So3
    }

    pub fn spd(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GeoError::InvalidManifold("SPD size must be ≥ 1".into()));
        }
        Ok(Manifold::Spd { n })
    }

    /// Re-validate parameters of a value built by hand or deserialized.
    pub fn validated(self) -> Result<Self> {
        match self {
            Manifold::Euclidean { n } => Manifold::euclidean(n),
            Manifold::Sphere { n, radius } => Manifold::sphere(n, radius),
            Manifold::So3 => Ok(Manifold::So3),
            Manifold::Spd { n } => Manifold::spd(n),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Manifold::Euclidean { n } => format!("Euclidean({n})"),
            Manifold::Sphere { n, radius } => format!("Sphere({n}, r={radius})"),
            Manifold::So3 => "SO3".to_string(),
            Manifold::Spd { n } => format!("SPD({n})"),
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { n } => n,
            Manifold::Sphere { n, .. } => n,
            Manifold::So3 => 3,
            Manifold::Spd { n } => n * (n + 1) / 2,
        }
    }

    /// Shape of the ambient coordinate array.
    pub fn ambient_shape(&self) -> (usize, usize) {
        match *self {
            Manifold::Euclidean { n } => (n, 1),
            Manifold::Sphere { n, .. } => (n + 1, 1),
            Manifold::So3 => (3, 3),
            Manifold::Spd { n } => (n, n),
        }
    }

    /// Upper bound on sectional curvature.
    pub fn curvature_upper_bound(&self) -> f64 {
        match *self {
            Manifold::Euclidean { .. } | Manifold::Spd { .. } => 0.0,
            Manifold::Sphere { radius, .. } => 1.0 / (radius * radius),
            Manifold::So3 => so3::SECTIONAL_CURVATURE,
        }
    }

    /// Tangent-norm bound for `exp`, and distance bound for `log`.
    pub fn injectivity_guard(&self) -> f64 {
        match *self {
            Manifold::Euclidean { .. } | Manifold::Spd { .. } => f64::INFINITY,
            Manifold::Sphere { radius, .. } => PI * radius,
            Manifold::So3 => PI * std::f64::consts::SQRT_2,
        }
    }

    pub fn check_shape(&self, a: &Mat) -> Result<()> {
        let expected = self.ambient_shape();
        let got = a.shape();
        if expected != got {
            return Err(GeoError::ShapeMismatch { expected, got });
        }
        Ok(())
    }

    /// Size of the constraint violation of an ambient point (0 on the manifold).
    pub fn constraint_residual(&self, p: &Mat) -> f64 {
        if p.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        match *self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { radius, .. } => (p.norm() - radius).abs(),
            Manifold::So3 => so3::constraint_residual(p),
            Manifold::Spd { .. } => spd::constraint_residual(p),
        }
    }

    /// Size of the tangency violation of `v` at `p` (0 when tangent).
    pub fn tangency_residual(&self, p: &Mat, v: &Mat) -> f64 {
        match *self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { radius, .. } => p.dot(v).abs() / radius,
            Manifold::So3 => {
                let x = p.transpose() * v;
                (&x + x.transpose()).norm() * 0.5
            }
            Manifold::Spd { .. } => (v - v.transpose()).norm() * 0.5,
        }
    }

    /// Closest manifold point to an ambient array.
    pub fn project_point(&self, x: &Mat) -> Mat {
        match *self {
            Manifold::Euclidean { .. } => x.clone(),
            Manifold::Sphere { radius, .. } => x * (radius / x.norm()),
            Manifold::So3 => crate::linalg::polar_rotation(x),
            Manifold::Spd { .. } => spd::project_point(x),
        }
    }

    /// Metric-orthogonal projection of an ambient array onto `T_p M`.
    pub fn project_tangent(&self, p: &Mat, x: &Mat) -> Mat {
        match *self {
            Manifold::Euclidean { .. } => x.clone(),
            Manifold::Sphere { radius, .. } => sphere::project_tangent(radius, p, x),
            Manifold::So3 => so3::project_tangent(p, x),
            Manifold::Spd { .. } => crate::linalg::sym_part(x),
        }
    }

    pub fn inner(&self, p: &Mat, u: &Mat, v: &Mat) -> f64 {
        match *self {
            Manifold::Euclidean { .. } | Manifold::Sphere { .. } | Manifold::So3 => u.dot(v),
            Manifold::Spd { .. } => spd::inner(p, u, v),
        }
    }

    pub fn norm(&self, p: &Mat, v: &Mat) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    pub fn zero_tangent(&self) -> Mat {
        let (r, c) = self.ambient_shape();
        Mat::zeros(r, c)
    }

    /// Riemannian exponential. Errors when `|v|` reaches the injectivity guard.
    pub fn exp(&self, p: &Mat, v: &Mat) -> Result<Mat> {
        match *self {
            Manifold::Euclidean { .. } => Ok(p + v),
            Manifold::Sphere { radius, .. } => sphere::exp(radius, p, v),
            Manifold::So3 => so3::exp(p, v),
            Manifold::Spd { .. } => Ok(spd::exp(p, v)),
        }
    }

    /// Riemannian logarithm `log_p q`. Errors at the cut locus.
    pub fn log(&self, p: &Mat, q: &Mat) -> Result<Mat> {
        match *self {
            Manifold::Euclidean { .. } => Ok(q - p),
            Manifold::Sphere { radius, .. } => sphere::log(radius, p, q),
            Manifold::So3 => so3::log(p, q),
            Manifold::Spd { .. } => Ok(spd::log(p, q)),
        }
    }

    /// Geodesic distance; defined everywhere.
    pub fn dist(&self, p: &Mat, q: &Mat) -> f64 {
        match *self {
            Manifold::Euclidean { .. } => (q - p).norm(),
            Manifold::Sphere { radius, .. } => sphere::dist(radius, p, q),
            Manifold::So3 => so3::dist(p, q),
            Manifold::Spd { .. } => spd::dist(p, q),
        }
    }

    /// Parallel transport of `v ∈ T_p M` to `T_q M` along the minimizing geodesic.
    pub fn transport(&self, p: &Mat, q: &Mat, v: &Mat) -> Result<Mat> {
        match *self {
            Manifold::Euclidean { .. } => Ok(v.clone()),
            Manifold::Sphere { radius, .. } => sphere::transport(radius, p, q, v),
            Manifold::So3 => so3::transport(p, q, v),
            Manifold::Spd { .. } => Ok(spd::transport(p, q, v)),
        }
    }

    /// Curvature tensor `R(x, y) z` at `p`.
    pub fn curvature(&self, p: &Mat, x: &Mat, y: &Mat, z: &Mat) -> Mat {
        match *self {
            Manifold::Euclidean { .. } => self.zero_tangent(),
            Manifold::Sphere { radius, .. } => sphere::curvature(radius, x, y, z),
            Manifold::So3 => so3::curvature(p, x, y, z),
            Manifold::Spd { .. } => spd::curvature(p, x, y, z),
        }
    }

    /// Symmetric bilinear term `c(p; u, v)` of the Levi-Civita connection in
    /// ambient coordinates: a curve `x(t)` is a geodesic iff
    /// `ẍ = c(x; ẋ, ẋ)`, and `Dv/dt = v̇ − c(x; ẋ, v)` for a tangent field
    /// `v(t)` along `x(t)`.
    pub fn connection_term(&self, p: &Mat, u: &Mat, v: &Mat) -> Mat {
        match *self {
            Manifold::Euclidean { .. } => self.zero_tangent(),
            Manifold::Sphere { radius, .. } => p * (-u.dot(v) / (radius * radius)),
            Manifold::So3 => so3::connection_term(p, u, v),
            Manifold::Spd { .. } => spd::connection_term(p, u, v),
        }
    }

    /// Covariant derivative of a tangent field from its ambient time
    /// derivative `vdot` along a curve through `p` with velocity `pdot`.
    pub fn covariant_from_ambient(&self, p: &Mat, pdot: &Mat, v: &Mat, vdot: &Mat) -> Mat {
        let corrected = vdot - self.connection_term(p, pdot, v);
        self.project_tangent(p, &corrected)
    }

    /// Gradient of `F = ½ d(·, target)²` at `q`: `−log_q target`.
    pub fn grad_half_sq_dist(&self, q: &Mat, target: &Mat) -> Result<Mat> {
        Ok(-self.log(q, target)?)
    }

    /// `Hess F (v, w)` for `F = ½ d(·, target)²` at `q`.
    pub fn hess_half_sq_dist(&self, q: &Mat, target: &Mat, v: &Mat, w: &Mat) -> Result<f64> {
        match *self {
            Manifold::Euclidean { .. } => Ok(v.dot(w)),
            Manifold::Sphere { radius, .. } => {
                let toward = self.log(q, target)?;
                Ok(constant_curvature_hessian(
                    1.0 / (radius * radius),
                    &toward,
                    v,
                    w,
                    |a, b| a.dot(b),
                ))
            }
            Manifold::So3 => {
                let toward = self.log(q, target)?;
                Ok(constant_curvature_hessian(
                    so3::SECTIONAL_CURVATURE,
                    &toward,
                    v,
                    w,
                    |a, b| a.dot(b),
                ))
            }
            Manifold::Spd { .. } => Ok(spd::hess_half_sq_dist(q, target, v, w)),
        }
    }

    /// `ΔF = tr(G⁻¹ Hess F)` for `F = ½ d(·, target)²`.
    pub fn laplacian_half_sq_dist(&self, q: &Mat, target: &Mat) -> Result<f64> {
        let mut acc = 0.0;
        for e in self.tangent_basis(q) {
            acc += self.hess_half_sq_dist(q, target, &e, &e)?;
        }
        Ok(acc)
    }

    /// Orthonormal basis of `T_p M` under the metric.
    pub fn tangent_basis(&self, p: &Mat) -> Vec<Mat> {
        match *self {
            Manifold::Euclidean { n } => euclidean::basis(n),
            Manifold::Sphere { radius, .. } => sphere::basis(radius, p),
            Manifold::So3 => so3::basis(p),
            Manifold::Spd { n } => spd::basis(n, p),
        }
    }

    /// Gram–Schmidt a list of tangent vectors at `p` under the metric.
    pub fn orthonormalize(&self, p: &Mat, vectors: &[Mat]) -> Vec<Mat> {
        let mut out: Vec<Mat> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut w = v.clone();
            for e in &out {
                let c = self.inner(p, &w, e);
                w -= e * c;
            }
            let n = self.norm(p, &w);
            out.push(w / n);
        }
        out
    }

    /// Coordinates of `v` in an orthonormal frame at `p`.
    pub fn frame_coords(&self, p: &Mat, frame: &[Mat], v: &Mat) -> Vec<f64> {
        frame.iter().map(|e| self.inner(p, v, e)).collect()
    }

    /// Reassemble a tangent vector from frame coordinates.
    pub fn from_frame_coords(&self, frame: &[Mat], coords: &[f64]) -> Mat {
        let mut out = self.zero_tangent();
        for (e, c) in frame.iter().zip(coords) {
            out += e * *c;
        }
        out
    }

    /// A random point; `spread` scales the distance from a reference point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, spread: f64) -> Mat {
        let (r, c) = self.ambient_shape();
        match *self {
            Manifold::Euclidean { .. } => gaussian(rng, r, c) * spread,
            Manifold::Sphere { .. } => self.project_point(&gaussian(rng, r, c)),
            Manifold::So3 => {
                let x = crate::linalg::skew_part(&gaussian(rng, 3, 3));
                let x = &x * (spread.min(3.0) / x.norm().max(1e-12) * rng.random::<f64>());
                crate::linalg::so3_exp(&x)
            }
            Manifold::Spd { .. } => {
                let s = crate::linalg::sym_part(&gaussian(rng, r, c));
                crate::linalg::sym_exp(&(s * (spread / 2.0)))
            }
        }
    }

    /// A random tangent vector at `p` with metric norm `length`.
    pub fn random_tangent<R: Rng + ?Sized>(&self, rng: &mut R, p: &Mat, length: f64) -> Mat {
        let (r, c) = self.ambient_shape();
        let mut v = match *self {
            // Ambient gaussians projected are not isotropic for SPD; draw in an orthonormal frame.
            Manifold::Spd { .. } | Manifold::So3 => {
                let basis = self.tangent_basis(p);
                let coords: Vec<f64> = basis.iter().map(|_| rng.sample(StandardNormal)).collect();
                self.from_frame_coords(&basis, &coords)
            }
            _ => self.project_tangent(p, &gaussian(rng, r, c)),
        };
        let n = self.norm(p, &v);
        v *= length / n;
        v
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// `x cot x`, continuous at 0.
pub(crate) fn x_cot_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        x / x.tan()
    }
}

/// `x coth x`, continuous at 0.
pub(crate) fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// Hessian of `½ d²` on a space whose Jacobi operator along the radial
/// geodesic has eigenvalue 0 radially and `kappa` on the orthogonal
/// complement (constant curvature, or SO(3) with its bi-invariant metric).
fn constant_curvature_hessian(
    kappa: f64,
    toward: &Mat,
    v: &Mat,
    w: &Mat,
    inner: impl Fn(&Mat, &Mat) -> f64,
) -> f64 {
    let d = inner(toward, toward).sqrt();
    let vw = inner(v, w);
    if d == 0.0 {
        return vw;
    }
    let e = toward / d;
    let ve = inner(v, &e);
    let we = inner(w, &e);
    let s = x_cot_x(kappa.sqrt() * d);
    ve * we + s * (vw - ve * we)
}

#[cfg(test)]
mod tests;
