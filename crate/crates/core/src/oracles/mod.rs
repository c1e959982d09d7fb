//! Finite-difference ground truth for the closed-form geometry.
//!
//! Every check works on ambient samples: derivatives are taken with central
//! differences (optionally Richardson-extrapolated to fourth order) and then mapped to the
//! tangent space by removing the connection term and projecting. No chart is
//! ever built.

mod agreement;
mod patch;

use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::Manifold;

pub use agreement::{kernel_agreement, KernelAgreement};
pub use patch::{check_swap_cov, fd_curvature, SurfacePatch};

/// Step, extrapolation switch and acceptance tolerance for the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub fd_step: f64,
    pub richardson: bool,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            fd_step: 1e-5,
            richardson: true,
            tol: 1e-5,
        }
    }
}

impl OracleConfig {
    pub fn validated(self) -> Result<Self> {
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return Err(GeoError::ConfigInvalid(format!(
                "fd_step must lie in (0, 1e-2), got {}",
                self.fd_step
            )));
        }
        if !(self.tol > 0.0) {
            return Err(GeoError::ConfigInvalid(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(self)
    }
}

/// Consecutive grid points may be at most this fraction of the injectivity
/// guard apart.
const GRID_GAP_FRACTION: f64 = 0.1;

pub(crate) fn check_grid(m: &Manifold, points: &[Mat]) -> Result<()> {
    let guard = GRID_GAP_FRACTION * m.injectivity_guard();
    for pair in points.windows(2) {
        let gap = m.dist(&pair[0], &pair[1]);
        if !(gap <= guard) {
            return Err(GeoError::GridTooCoarse { gap, guard });
        }
    }
    Ok(())
}

/// Derivative of uniformly sampled ambient arrays at every sample.
///
/// Plain mode uses second-order central differences with one-sided
/// second-order ends. With Richardson extrapolation every sample, ends
/// included, gets a fourth-order stencil (needs at least 5 samples).
pub fn fd_series(samples: &[Mat], h: f64, richardson: bool) -> Result<Vec<Mat>> {
    let n = samples.len();
    if n < 3 {
        return Err(GeoError::DegenerateInput(format!(
            "need at least 3 samples for a derivative, got {n}"
        )));
    }
    let f = samples;
    let combo = |idx: [usize; 5], w: [f64; 5], sign: f64| -> Mat {
        let mut acc = &f[idx[0]] * w[0];
        for k in 1..5 {
            acc += &f[idx[k]] * w[k];
        }
        acc * (sign / (12.0 * h))
    };
    const EDGE: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const NEAR_EDGE: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = if richardson && n >= 5 {
            match i {
                0 => combo([0, 1, 2, 3, 4], EDGE, 1.0),
                1 => combo([0, 1, 2, 3, 4], NEAR_EDGE, 1.0),
                _ if i == n - 1 => combo([n - 1, n - 2, n - 3, n - 4, n - 5], EDGE, -1.0),
                _ if i == n - 2 => combo([n - 1, n - 2, n - 3, n - 4, n - 5], NEAR_EDGE, -1.0),
                _ => ((&f[i + 1] - &f[i - 1]) * 8.0 - (&f[i + 2] - &f[i - 2])) / (12.0 * h),
            }
        } else if i == 0 {
            (&f[1] * 4.0 - &f[0] * 3.0 - &f[2]) / (2.0 * h)
        } else if i == n - 1 {
            (&f[n - 3] + &f[n - 1] * 3.0 - &f[n - 2] * 4.0) / (2.0 * h)
        } else {
            (&f[i + 1] - &f[i - 1]) / (2.0 * h)
        };
        out.push(d);
    }
    Ok(out)
}

/// Scalar version of [`fd_series`].
pub fn fd_scalar_series(samples: &[f64], h: f64, richardson: bool) -> Result<Vec<f64>> {
    let mats: Vec<Mat> = samples
        .iter()
        .map(|&x| Mat::from_element(1, 1, x))
        .collect();
    Ok(fd_series(&mats, h, richardson)?
        .into_iter()
        .map(|m| m[(0, 0)])
        .collect())
}

/// Velocity of a sampled curve, projected onto the tangent spaces.
pub fn fd_velocity(m: &Manifold, curve: &[Mat], h: f64, cfg: &OracleConfig) -> Result<Vec<Mat>> {
    check_grid(m, curve)?;
    let raw = fd_series(curve, h, cfg.richardson)?;
    Ok(curve
        .iter()
        .zip(raw)
        .map(|(p, d)| m.project_tangent(p, &d))
        .collect())
}

/// Covariant derivative `Dv/dt` of a tangent field sampled along a curve.
pub fn fd_covariant_derivative(
    m: &Manifold,
    curve: &[Mat],
    field: &[Mat],
    h: f64,
    cfg: &OracleConfig,
) -> Result<Vec<Mat>> {
    if curve.len() != field.len() {
        return Err(GeoError::DegenerateInput(format!(
            "curve has {} samples but field has {}",
            curve.len(),
            field.len()
        )));
    }
    let velocity = fd_velocity(m, curve, h, cfg)?;
    let dfield = fd_series(field, h, cfg.richardson)?;
    Ok((0..curve.len())
        .map(|i| m.covariant_from_ambient(&curve[i], &velocity[i], &field[i], &dfield[i]))
        .collect())
}

/// Largest residual of `d/dt⟨V,W⟩ − ⟨DV/dt,W⟩ − ⟨V,DW/dt⟩` over the grid.
pub fn check_metric_compatibility(
    m: &Manifold,
    curve: &[Mat],
    v: &[Mat],
    w: &[Mat],
    h: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    let dv = fd_covariant_derivative(m, curve, v, h, cfg)?;
    let dw = fd_covariant_derivative(m, curve, w, h, cfg)?;
    let products: Vec<f64> = (0..curve.len())
        .map(|i| m.inner(&curve[i], &v[i], &w[i]))
        .collect();
    let dprod = fd_scalar_series(&products, h, cfg.richardson)?;
    Ok((0..curve.len())
        .map(|i| {
            let p = &curve[i];
            (dprod[i] - m.inner(p, &dv[i], &w[i]) - m.inner(p, &v[i], &dw[i])).abs()
        })
        .fold(0.0, f64::max))
}

/// A vector field given by an ambient extension, evaluated at points of `M`.
pub type AmbientField<'a> = &'a dyn Fn(&Mat) -> Mat;

/// Ambient derivative of `field` along the retraction curve `s ↦ P(p + s·y)`.
fn directional_ambient(
    m: &Manifold,
    p: &Mat,
    y: &Mat,
    field: AmbientField<'_>,
    cfg: &OracleConfig,
) -> Mat {
    let eps = cfg.fd_step;
    let at = |s: f64| field(&m.project_point(&(p + y * s)));
    let central = |e: f64| (at(e) - at(-e)) / (2.0 * e);
    if cfg.richardson {
        (central(eps) * 4.0 - central(2.0 * eps)) / 3.0
    } else {
        central(eps)
    }
}

/// Covariant derivative `∇_y f` at `p` for an ambient-extended field `f`.
pub fn fd_directional_covariant(
    m: &Manifold,
    p: &Mat,
    y: &Mat,
    field: AmbientField<'_>,
    cfg: &OracleConfig,
) -> Mat {
    let raw = directional_ambient(m, p, y, field, cfg);
    m.covariant_from_ambient(p, y, &field(p), &raw)
}

/// `|∇_X Y − ∇_Y X − [X,Y]|` at `p`.
///
/// Without a closed-form bracket the Lie bracket is itself differenced from
/// the ambient extensions.
pub fn check_torsion_free(
    m: &Manifold,
    p: &Mat,
    x: AmbientField<'_>,
    y: AmbientField<'_>,
    bracket: Option<AmbientField<'_>>,
    cfg: &OracleConfig,
) -> f64 {
    let (xp, yp) = (m.project_tangent(p, &x(p)), m.project_tangent(p, &y(p)));
    let nabla_x_y = fd_directional_covariant(m, p, &xp, y, cfg);
    let nabla_y_x = fd_directional_covariant(m, p, &yp, x, cfg);
    let lie = match bracket {
        Some(b) => b(p),
        None => directional_ambient(m, p, &xp, y, cfg) - directional_ambient(m, p, &yp, x, cfg),
    };
    m.norm(p, &(nabla_x_y - nabla_y_x - lie))
}

/// Largest `|⟨∇_Y f, Y⟩|` over the sampled `(p, Y)` pairs.
pub fn check_killing(
    m: &Manifold,
    field: AmbientField<'_>,
    samples: &[(Mat, Mat)],
    cfg: &OracleConfig,
) -> f64 {
    samples
        .iter()
        .map(|(p, y)| {
            m.inner(p, &fd_directional_covariant(m, p, y, field, cfg), y)
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Random `(p, Y)` pairs with unit `Y`, for [`check_killing`].
pub fn killing_samples<R: rand::Rng + ?Sized>(
    m: &Manifold,
    rng: &mut R,
    count: usize,
) -> Vec<(Mat, Mat)> {
    (0..count)
        .map(|_| {
            let p = m.random_point(rng, 1.0);
            let y = m.random_tangent(rng, &p, 1.0);
            (p, y)
        })
        .collect()
}

/// Fitted exponent of `d(γ₁(s), γ₂(s)) ∝ s^order` over `s ∈ [1e-4, 1e-2]`.
pub fn check_separation_order(
    m: &Manifold,
    gamma1: &dyn Fn(f64) -> Mat,
    gamma2: &dyn Fn(f64) -> Mat,
) -> Result<f64> {
    let start_gap = m.dist(&gamma1(0.0), &gamma2(0.0));
    if start_gap > 1e-9 {
        return Err(GeoError::DegenerateInput(format!(
            "curves start {start_gap:.3e} apart"
        )));
    }
    const SAMPLES: usize = 21;
    let mut xs = Vec::with_capacity(SAMPLES);
    let mut ys = Vec::with_capacity(SAMPLES);
    for k in 0..SAMPLES {
        let s = 10f64.powf(-4.0 + 2.0 * k as f64 / (SAMPLES - 1) as f64);
        let d = m.dist(&gamma1(s), &gamma2(s));
        if !(d > 0.0) {
            return Err(GeoError::DegenerateInput(format!(
                "curves coincide at s = {s:.3e}"
            )));
        }
        xs.push(s.ln());
        ys.push(d.ln());
    }
    Ok(least_squares(&xs, &ys).0)
}

/// Slope, intercept and RMS residual of a straight-line fit.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}
