use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::{rotation_angle, so3_log, Mat};

/// `Ṙ = R u` with `u = −(k/2)(R*ᵀR − RᵀR*) + Ω`, the gradient controller for
/// `F = ½‖R − R*‖²`. `omega` is the skew-symmetric body rate.
pub fn so3_tracking_field(r: &Mat, r_star: &Mat, omega: &Mat, k: f64) -> Mat {
    let u = (r_star.transpose() * r - r.transpose() * r_star) * (-0.5 * k) + omega;
    r * u
}

/// Correction term of the SO(3) low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum So3FilterForm {
    /// `−(k/2) R̂ (RᵀR̂ − R̂ᵀR)`.
    #[default]
    Gradient,
    /// `k R̂ log(R̂ᵀR)`.
    Log,
}

/// Filter field `dR̂/dt` for a measured rotation `R` with `Ṙ = RΩ`.
pub fn so3_filter_field(
    r_hat: &Mat,
    r: &Mat,
    omega: &Mat,
    k: f64,
    form: So3FilterForm,
) -> Result<Mat> {
    let feedforward = r_hat * omega;
    let rel = r_hat.transpose() * r;
    if rotation_angle(&rel) >= std::f64::consts::PI - 1e-8 {
        return Err(GeoError::AtCutLocus);
    }
    let correction = match form {
        So3FilterForm::Gradient => r_hat * (r.transpose() * r_hat - &rel) * (-0.5 * k),
        So3FilterForm::Log => r_hat * so3_log(&rel).0 * k,
    };
    Ok(feedforward + correction)
}
