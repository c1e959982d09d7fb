use crate::error::Result;
use crate::linalg::Mat;
use crate::manifold::Manifold;

use super::{Gains, Potential};

/// Which curvature term a tracking controller or observer applies, written
/// with the kernel's curvature tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureTerm {
    /// `R(∇F, v) v`: cancels the curvature term of the linearized
    /// closed loop.
    Compensating,
    /// `R(v, ∇F) v`: the opposite sign.
    Reversed,
    Off,
}

fn curvature_term(m: &Manifold, q: &Mat, grad: &Mat, v: &Mat, which: CurvatureTerm) -> Mat {
    match which {
        CurvatureTerm::Compensating => m.curvature(q, grad, v, v),
        CurvatureTerm::Reversed => m.curvature(q, v, grad, v),
        CurvatureTerm::Off => m.zero_tangent(),
    }
}

/// PD tracking force with curvature compensation:
/// `−k₂ ∇F(q, q*) − k₁ (q̇ − P q̇*) + R(∇F, q̇) q̇`.
pub fn tracking_force(
    m: &Manifold,
    q: &Mat,
    qdot: &Mat,
    reference: (&Mat, &Mat),
    gains: &Gains,
) -> Result<Mat> {
    tracking_force_with(m, q, qdot, reference, gains, CurvatureTerm::Compensating)
}

pub fn tracking_force_with(
    m: &Manifold,
    q: &Mat,
    qdot: &Mat,
    (q_ref, qdot_ref): (&Mat, &Mat),
    gains: &Gains,
    which: CurvatureTerm,
) -> Result<Mat> {
    let (k1, k2) = (gains.k1()?, gains.k2()?);
    let grad = m.grad_half_sq_dist(q, q_ref)?;
    let carried = m.transport(q_ref, q, qdot_ref)?;
    let u_p = &grad * -k2;
    let u_d = (qdot - carried) * -k1;
    let u_r = curvature_term(m, q, &grad, qdot, which);
    Ok(u_p + u_d + u_r)
}

/// Speed observer for `∇_q̇ q̇ = −∇V(q)` from position measurements.
/// Returns `(dq̂/dt, Dv̂/dt)`.
pub fn speed_observer_field(
    m: &Manifold,
    q_hat: &Mat,
    v_hat: &Mat,
    q: &Mat,
    potential: &Potential,
    gains: &Gains,
) -> Result<(Mat, Mat)> {
    speed_observer_field_with(
        m,
        q_hat,
        v_hat,
        q,
        potential,
        gains,
        CurvatureTerm::Compensating,
    )
}

pub fn speed_observer_field_with(
    m: &Manifold,
    q_hat: &Mat,
    v_hat: &Mat,
    q: &Mat,
    potential: &Potential,
    gains: &Gains,
    which: CurvatureTerm,
) -> Result<(Mat, Mat)> {
    let (alpha, beta) = (gains.alpha()?, gains.beta()?);
    let grad = m.grad_half_sq_dist(q_hat, q)?;
    let qhat_dot = v_hat - &grad * alpha;
    let pulled = m.transport(q, q_hat, &potential.gradient(m, q)?)?;
    let vhat_rate = &grad * -beta + curvature_term(m, q_hat, &grad, v_hat, which) - pulled;
    Ok((qhat_dot, vhat_rate))
}
