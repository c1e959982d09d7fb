//! Controllers, observers and filters as vector-field constructors, plus
//! contraction certificates for gradient flows.

mod contraction;
mod killing;
mod so3;
mod tracking;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::Manifold;

pub use contraction::{
    contraction_certificate, contraction_rate_bound, gradient_flow_field, rate_at_distance,
    volume_rate,
};
pub use killing::{
    killing_filter_discrete_step, killing_filter_field, Congruence, Isometry, KillingField,
    LinearIsometry, KILLING_TOL,
};
pub use so3::{so3_filter_field, so3_tracking_field, So3FilterForm};
pub use tracking::{
    speed_observer_field, speed_observer_field_with, tracking_force, tracking_force_with,
    CurvatureTerm,
};

/// Controller, observer and filter gains. A law reads only the gains it
/// needs, and each of those must be present and positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<f64>,
    pub lambda_flow: Option<f64>,
}

impl Gains {
    fn pick(value: Option<f64>, name: &str) -> Result<f64> {
        match value {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(GeoError::GainOutOfRange(format!(
                "{name} must be positive, got {v}"
            ))),
            None => Err(GeoError::GainOutOfRange(format!("{name} is required"))),
        }
    }

    pub fn k1(&self) -> Result<f64> {
        Self::pick(self.k1, "k1")
    }
    pub fn k2(&self) -> Result<f64> {
        Self::pick(self.k2, "k2")
    }
    pub fn alpha(&self) -> Result<f64> {
        Self::pick(self.alpha, "alpha")
    }
    pub fn beta(&self) -> Result<f64> {
        Self::pick(self.beta, "beta")
    }
    pub fn k(&self) -> Result<f64> {
        Self::pick(self.k, "k")
    }
    pub fn lambda_flow(&self) -> Result<f64> {
        Self::pick(self.lambda_flow, "lambda_flow")
    }
}

/// Potential energy of an Euler–Lagrange system.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    #[default]
    Zero,
    /// `V(q) = g ⟨q, axis⟩` on a Euclidean space or a sphere.
    Height { g: f64, axis: Vec<f64> },
}

impl Potential {
    fn axis(&self, m: &Manifold) -> Result<Option<(f64, Mat)>> {
        match self {
            Potential::Zero => Ok(None),
            Potential::Height { g, axis } => {
                let (rows, cols) = m.ambient_shape();
                let ok = matches!(m, Manifold::Euclidean { .. } | Manifold::Sphere { .. });
                if !ok || cols != 1 || axis.len() != rows {
                    return Err(GeoError::ConfigInvalid(format!(
                        "height potential needs an axis of length {rows} on a Euclidean space or sphere, got {} on {}",
                        axis.len(),
                        m.name()
                    )));
                }
                Ok(Some((*g, Mat::from_column_slice(rows, 1, axis))))
            }
        }
    }

    pub fn validate(&self, m: &Manifold) -> Result<()> {
        self.axis(m).map(|_| ())
    }

    pub fn value(&self, m: &Manifold, q: &Mat) -> Result<f64> {
        Ok(self.axis(m)?.map_or(0.0, |(g, e)| g * q.dot(&e)))
    }

    pub fn gradient(&self, m: &Manifold, q: &Mat) -> Result<Mat> {
        Ok(match self.axis(m)? {
            None => m.zero_tangent(),
            Some((g, e)) => m.project_tangent(q, &(e * g)),
        })
    }

    /// `Hess V(u, w)` at `q`.
    pub fn hessian(&self, m: &Manifold, q: &Mat, u: &Mat, w: &Mat) -> Result<f64> {
        Ok(match (self.axis(m)?, m) {
            (Some((g, e)), Manifold::Sphere { radius, .. }) => {
                -g * q.dot(&e) * u.dot(w) / (radius * radius)
            }
            _ => 0.0,
        })
    }
}

/// A reference state `(q*(t), q̇*(t))`.
pub trait ReferenceSignal: Send + Sync {
    fn at(&self, t: f64) -> Result<(Mat, Mat)>;

    /// Whether the reference stays in a bounded set.
    fn bounded(&self) -> bool {
        true
    }
}

/// A reference sampled on a trajectory. Integrate it with half the plant
/// step so every RK4 stage time falls on a sample.
#[derive(Debug, Clone)]
pub struct SampledReference {
    pub trajectory: Trajectory,
    pub bounded: bool,
}

impl ReferenceSignal for SampledReference {
    fn at(&self, t: f64) -> Result<(Mat, Mat)> {
        let (q, v) = self.trajectory.state_at(t)?;
        let v = v.ok_or_else(|| {
            GeoError::DegenerateInput("reference trajectory carries no velocities".into())
        })?;
        Ok((q, v))
    }

    fn bounded(&self) -> bool {
        self.bounded
    }
}

/// `|∇_q̇* q̇* + ∇V(q*)|` at the reference samples, by finite differences.
pub fn feasibility_residual(reference: &SampledReference, potential: &Potential) -> Result<f64> {
    let traj = &reference.trajectory;
    let m = &traj.manifold;
    let velocities = traj
        .velocities
        .as_ref()
        .ok_or_else(|| GeoError::DegenerateInput("reference carries no velocities".into()))?;
    let accel = crate::oracles::fd_covariant_derivative(
        m,
        &traj.points,
        velocities,
        traj.h,
        &crate::oracles::OracleConfig::default(),
    )?;
    let mut worst = 0.0f64;
    for (q, a) in traj.points.iter().zip(&accel) {
        worst = worst.max(m.norm(q, &(a + potential.gradient(m, q)?)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
