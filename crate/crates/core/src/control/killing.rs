use std::fmt;
use std::sync::Arc;

use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::Manifold;
use crate::oracles::{check_killing, OracleConfig};

/// Largest `|⟨∇_Y f, Y⟩|` accepted when certifying a Killing field.
pub const KILLING_TOL: f64 = 1e-6;

type Field = Arc<dyn Fn(f64, &Mat) -> Mat + Send + Sync>;

/// A time-varying vector field together with its measured Killing residual.
#[derive(Clone)]
pub struct KillingField {
    manifold: Manifold,
    field: Field,
    residual: f64,
}

impl fmt::Debug for KillingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KillingField")
            .field("manifold", &self.manifold)
            .field("residual", &self.residual)
            .finish()
    }
}

impl KillingField {
    /// Measure the Killing residual of `field` at each of `times` over the
    /// sampled `(p, Y)` pairs. Never fails; see [`KillingField::certify`].
    pub fn measure(
        manifold: Manifold,
        field: Field,
        times: &[f64],
        samples: &[(Mat, Mat)],
    ) -> Self {
        let cfg = OracleConfig::default();
        let residual = times
            .iter()
            .map(|&t| check_killing(&manifold, &|q: &Mat| field(t, q), samples, &cfg))
            .fold(0.0, f64::max);
        KillingField {
            manifold,
            field,
            residual,
        }
    }

    /// Like [`KillingField::measure`], but fails with `NotKilling` when the
    /// residual exceeds [`KILLING_TOL`].
    pub fn certify(
        manifold: Manifold,
        field: Field,
        times: &[f64],
        samples: &[(Mat, Mat)],
    ) -> Result<Self> {
        let out = Self::measure(manifold, field, times, samples);
        out.ensure_certified()?;
        Ok(out)
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_certified(&self) -> bool {
        self.residual <= KILLING_TOL
    }

    fn ensure_certified(&self) -> Result<()> {
        if !self.is_certified() {
            return Err(GeoError::NotKilling {
                residual: self.residual,
            });
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, q: &Mat) -> Mat {
        (self.field)(t, q)
    }
}

/// Low-pass filter `dq̂/dt = f(t, q̂) + k log(q̂, q)` for a Killing system.
pub fn killing_filter_field(f: &KillingField, t: f64, q_hat: &Mat, q: &Mat, k: f64) -> Result<Mat> {
    f.ensure_certified()?;
    Ok(f.eval(t, q_hat) + f.manifold.log(q_hat, q)? * k)
}

/// An isometry `τ` together with its differential.
pub trait Isometry: Send + Sync {
    fn apply(&self, p: &Mat) -> Mat;
    /// `Dτ_p v`.
    fn push(&self, p: &Mat, v: &Mat) -> Mat;
}

/// `P ↦ G P Gᵀ` on SPD with `G` invertible.
#[derive(Debug, Clone)]
pub struct Congruence(pub Mat);

impl Isometry for Congruence {
    fn apply(&self, p: &Mat) -> Mat {
        let out = &self.0 * p * self.0.transpose();
        (&out + out.transpose()) * 0.5
    }

    fn push(&self, _p: &Mat, v: &Mat) -> Mat {
        &self.0 * v * self.0.transpose()
    }
}

/// `x ↦ G x` with `G` orthogonal; an isometry of Euclidean space, spheres
/// and (by left multiplication) SO(3).
#[derive(Debug, Clone)]
pub struct LinearIsometry(pub Mat);

impl Isometry for LinearIsometry {
    fn apply(&self, p: &Mat) -> Mat {
        &self.0 * p
    }

    fn push(&self, _p: &Mat, v: &Mat) -> Mat {
        &self.0 * v
    }
}

/// One sampling period of the discrete Killing filter: propagate `q̂` by `τ`
/// and apply the correction `kΔt log(q̂, q)`, pushed forward by `Dτ`, at
/// `τ·q̂`.
pub fn killing_filter_discrete_step(
    m: &Manifold,
    q_hat: &Mat,
    q: &Mat,
    tau: &dyn Isometry,
    k: f64,
    dt: f64,
) -> Result<Mat> {
    let gain = k * dt;
    if !(gain > 0.0 && gain < 1.0) {
        return Err(GeoError::GainOutOfRange(format!(
            "k·Δt must lie in (0, 1), got {gain}"
        )));
    }
    let correction = m.log(q_hat, q)? * gain;
    let moved = tau.apply(q_hat);
    let pushed = m.project_tangent(&moved, &tau.push(q_hat, &correction));
    m.exp(&moved, &pushed)
}
