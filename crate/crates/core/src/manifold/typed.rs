use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::{self, Mat};

use super::{so3, sphere, Manifold};

/// Validation thresholds. All fields are overridable per call by building a
/// [`Geometry`] with custom values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Maximum ambient gap between two basepoints considered equal.
    pub basepoint: f64,
    /// Sphere radius / SO(3) orthogonality / tangency tolerance.
    pub constraint: f64,
    /// SPD symmetry tolerance.
    pub symmetry: f64,
    /// Sphere antipode detection: `⟨p,q⟩/r² ≤ −1 + antipode`.
    pub antipode: f64,
    /// SO(3) cut detection: rotation angle `≥ π − so3_cut`.
    pub so3_cut: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            basepoint: 1e-9,
            constraint: 1e-9,
            symmetry: 1e-12,
            antipode: 1.0 + sphere::ANTIPODAL_COSINE,
            so3_cut: so3::CUT_MARGIN,
        }
    }
}

/// A validated point on a manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    manifold: Manifold,
    coords: Mat,
}

/// A validated tangent vector with its basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    base: Point,
    coords: Mat,
}

impl Point {
    /// Build a point, checking shape and constraints with default tolerances.
    pub fn new(manifold: Manifold, coords: Mat) -> Result<Self> {
        Geometry::default().point(manifold, coords)
    }

    /// Build a point after projecting the coordinates onto the manifold.
    pub fn projected(manifold: Manifold, coords: &Mat) -> Result<Self> {
        manifold.check_shape(coords)?;
        if coords.iter().any(|x| !x.is_finite()) || coords.norm() == 0.0 {
            return Err(GeoError::ConstraintViolation(
                "coordinates cannot be projected onto the manifold".into(),
            ));
        }
        Point::new(manifold, manifold.project_point(coords))
    }

    /// Column-vector point from a slice (Euclidean and sphere).
    pub fn from_slice(manifold: Manifold, values: &[f64]) -> Result<Self> {
        let (r, c) = manifold.ambient_shape();
        if values.len() != r * c {
            return Err(GeoError::ShapeMismatch {
                expected: (r, c),
                got: (values.len(), 1),
            });
        }
        Point::new(manifold, Mat::from_row_slice(r, c, values))
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    pub fn into_coords(self) -> Mat {
        self.coords
    }

    pub fn zero_tangent(&self) -> Tangent {
        Tangent {
            base: self.clone(),
            coords: self.manifold.zero_tangent(),
        }
    }

    /// Tangent vector at this point, checked for tangency.
    pub fn tangent(&self, coords: Mat) -> Result<Tangent> {
        Tangent::new(self.clone(), coords)
    }
}

impl Tangent {
    pub fn new(base: Point, coords: Mat) -> Result<Self> {
        Geometry::default().tangent(&base, coords)
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    pub fn manifold(&self) -> Manifold {
        self.base.manifold
    }

    pub fn norm(&self) -> f64 {
        self.base.manifold.norm(&self.base.coords, &self.coords)
    }

    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            coords: &self.coords * s,
        }
    }
}

/// Value of a symmetric bilinear form, with comparison bounds when the
/// producing operation knows them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearReport {
    pub value: f64,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
}

/// Checked geometry operations under a fixed set of tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Geometry {
    pub tol: Tolerances,
}

impl Geometry {
    pub fn with_tolerances(tol: Tolerances) -> Self {
        Geometry { tol }
    }

    pub fn point(&self, manifold: Manifold, coords: Mat) -> Result<Point> {
        manifold.check_shape(&coords)?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::ConstraintViolation(
                "non-finite coordinates".into(),
            ));
        }
        match manifold {
            Manifold::Euclidean { .. } => {}
            Manifold::Sphere { radius, .. } => {
                let gap = (coords.norm() - radius).abs();
                if gap > self.tol.constraint {
                    return Err(GeoError::ConstraintViolation(format!(
                        "|p| differs from the radius by {gap:.3e}"
                    )));
                }
            }
            Manifold::So3 => {
                let gap = so3::constraint_residual(&coords);
                if gap > self.tol.constraint {
                    return Err(GeoError::ConstraintViolation(format!(
                        "not a rotation (residual {gap:.3e})"
                    )));
                }
            }
            Manifold::Spd { .. } => {
                let asym = (&coords - coords.transpose()).norm();
                if asym > self.tol.symmetry * coords.norm().max(1.0) {
                    return Err(GeoError::ConstraintViolation(format!(
                        "not symmetric (asymmetry {asym:.3e})"
                    )));
                }
                let min_eig = linalg::min_eigenvalue(&coords);
                if min_eig <= 0.0 {
                    return Err(GeoError::ConstraintViolation(format!(
                        "not positive definite (min eigenvalue {min_eig:.3e})"
                    )));
                }
            }
        }
        Ok(Point { manifold, coords })
    }

    pub fn tangent(&self, base: &Point, coords: Mat) -> Result<Tangent> {
        let m = base.manifold;
        m.check_shape(&coords)?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::NotTangent("non-finite coordinates".into()));
        }
        let scale = coords.norm().max(1.0);
        let (residual, tol) = match m {
            Manifold::Spd { .. } => (
                (&coords - coords.transpose()).norm(),
                self.tol.symmetry * scale,
            ),
            _ => (
                m.tangency_residual(&base.coords, &coords),
                self.tol.constraint * scale,
            ),
        };
        if residual > tol {
            return Err(GeoError::NotTangent(format!("residual {residual:.3e}")));
        }
        Ok(Tangent {
            base: base.clone(),
            coords,
        })
    }

    fn same_base(&self, a: &Point, b: &Point) -> Result<()> {
        if a.manifold != b.manifold {
            return Err(GeoError::BasepointMismatch { gap: f64::INFINITY });
        }
        let gap = (&a.coords - &b.coords).norm();
        if gap > self.tol.basepoint {
            return Err(GeoError::BasepointMismatch { gap });
        }
        Ok(())
    }

    fn cut_check(&self, p: &Point, q: &Point) -> Result<()> {
        match p.manifold {
            Manifold::Sphere { radius, .. } => {
                if p.coords.dot(&q.coords) / (radius * radius) <= -1.0 + self.tol.antipode {
                    return Err(GeoError::AtCutLocus);
                }
            }
            Manifold::So3 => {
                let angle = linalg::rotation_angle(&(p.coords.transpose() * &q.coords));
                if angle >= std::f64::consts::PI - self.tol.so3_cut {
                    return Err(GeoError::AtCutLocus);
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn inner(&self, v: &Tangent, w: &Tangent) -> Result<f64> {
        self.same_base(&v.base, &w.base)?;
        Ok(v.manifold().inner(&v.base.coords, &v.coords, &w.coords))
    }

    pub fn exp_map(&self, p: &Point, v: &Tangent) -> Result<Point> {
        self.same_base(p, &v.base)?;
        let coords = p.manifold.exp(&p.coords, &v.coords)?;
        Ok(Point {
            manifold: p.manifold,
            coords,
        })
    }

    pub fn log_map(&self, p: &Point, q: &Point) -> Result<Tangent> {
        if p.manifold != q.manifold {
            return Err(GeoError::BasepointMismatch { gap: f64::INFINITY });
        }
        self.cut_check(p, q)?;
        let coords = p.manifold.log(&p.coords, &q.coords)?;
        Ok(Tangent {
            base: p.clone(),
            coords,
        })
    }

    pub fn dist(&self, p: &Point, q: &Point) -> f64 {
        p.manifold.dist(&p.coords, &q.coords)
    }

    pub fn parallel_transport(&self, v: &Tangent, q: &Point) -> Result<Tangent> {
        if self.cut_check(&v.base, q).is_err() {
            let guard = v.manifold().injectivity_guard();
            return Err(GeoError::InjectivityRadiusExceeded { norm: guard, guard });
        }
        let coords = v
            .manifold()
            .transport(&v.base.coords, &q.coords, &v.coords)?;
        Ok(Tangent {
            base: q.clone(),
            coords,
        })
    }

    pub fn curvature(&self, p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent> {
        for t in [x, y, z] {
            self.same_base(p, &t.base)?;
        }
        let coords = p
            .manifold
            .curvature(&p.coords, &x.coords, &y.coords, &z.coords);
        Ok(Tangent {
            base: p.clone(),
            coords,
        })
    }

    pub fn grad_half_sq_dist(&self, q: &Point, target: &Point) -> Result<Tangent> {
        Ok(self.log_map(q, target)?.scaled(-1.0))
    }

    /// Hessian of `½ d(·, target)²` at `q`. On the diagonal (`v == w`) the
    /// report carries the curvature-comparison bounds.
    pub fn hess_half_sq_dist(
        &self,
        q: &Point,
        target: &Point,
        v: &Tangent,
        w: &Tangent,
    ) -> Result<BilinearReport> {
        self.same_base(q, &v.base)?;
        self.same_base(q, &w.base)?;
        self.cut_check(q, target)?;
        let m = q.manifold;
        let value = m.hess_half_sq_dist(&q.coords, &target.coords, &v.coords, &w.coords)?;
        let diagonal = (&v.coords - &w.coords).norm() == 0.0;
        let (lower_bound, upper_bound) = if diagonal {
            let vv = m.inner(&q.coords, &v.coords, &v.coords);
            let a = m.curvature_upper_bound();
            if a > 0.0 {
                let d = m.dist(&q.coords, &target.coords);
                (Some(super::x_cot_x(a.sqrt() * d) * vv), Some(vv))
            } else if matches!(m, Manifold::Euclidean { .. }) {
                (Some(vv), Some(vv))
            } else {
                (Some(vv), None)
            }
        } else {
            (None, None)
        };
        Ok(BilinearReport {
            value,
            lower_bound,
            upper_bound,
        })
    }

    pub fn laplacian_half_sq_dist(&self, q: &Point, target: &Point) -> Result<f64> {
        self.cut_check(q, target)?;
        q.manifold.laplacian_half_sq_dist(&q.coords, &target.coords)
    }
}

/// Riemannian inner product of two tangent vectors at the same point.
pub fn inner(v: &Tangent, w: &Tangent) -> Result<f64> {
    Geometry::default().inner(v, w)
}

/// Endpoint of the geodesic with initial velocity `v`.
pub fn exp_map(p: &Point, v: &Tangent) -> Result<Point> {
    Geometry::default().exp_map(p, v)
}

/// Initial velocity of the minimizing geodesic from `p` to `q`.
pub fn log_map(p: &Point, q: &Point) -> Result<Tangent> {
    Geometry::default().log_map(p, q)
}

pub fn dist(p: &Point, q: &Point) -> f64 {
    Geometry::default().dist(p, q)
}

/// Parallel transport along the minimizing geodesic from `v`'s basepoint to `q`.
pub fn parallel_transport(v: &Tangent, q: &Point) -> Result<Tangent> {
    Geometry::default().parallel_transport(v, q)
}

pub fn curvature(p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent> {
    Geometry::default().curvature(p, x, y, z)
}

pub fn grad_half_sq_dist(q: &Point, target: &Point) -> Result<Tangent> {
    Geometry::default().grad_half_sq_dist(q, target)
}

pub fn hess_half_sq_dist(
    q: &Point,
    target: &Point,
    v: &Tangent,
    w: &Tangent,
) -> Result<BilinearReport> {
    Geometry::default().hess_half_sq_dist(q, target, v, w)
}

pub fn laplacian_half_sq_dist(q: &Point, target: &Point) -> Result<f64> {
    Geometry::default().laplacian_half_sq_dist(q, target)
}
