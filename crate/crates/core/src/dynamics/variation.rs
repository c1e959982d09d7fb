use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::{Manifold, Tangent};
use crate::oracles::{fd_covariant_derivative, OracleConfig};

use super::integrate::{integrate_first_order, integrate_tangent_bundle, Scheme, Trajectory};

/// A variation `q′` along a base trajectory, with its covariant velocity for
/// second-order systems.
#[derive(Debug, Clone)]
pub struct VariationTrack {
    pub times: Vec<f64>,
    pub qprime: Vec<Mat>,
    pub dqprime: Option<Vec<Mat>>,
}

impl VariationTrack {
    /// `|q′|` at every sample.
    pub fn norms(&self, base: &Trajectory) -> Vec<f64> {
        let m = &base.manifold;
        self.qprime
            .iter()
            .zip(&base.points)
            .map(|(v, p)| m.norm(p, v))
            .collect()
    }

    /// Coordinates of `(q′, Dq′/dt)` in a frame along the base.
    pub fn frame_coords(&self, base: &Trajectory, frames: &[Vec<Mat>]) -> Vec<Vec<f64>> {
        let m = &base.manifold;
        (0..self.times.len())
            .map(|i| {
                let p = &base.points[i];
                let mut c = m.frame_coords(p, &frames[i], &self.qprime[i]);
                if let Some(d) = &self.dqprime {
                    c.extend(m.frame_coords(p, &frames[i], &d[i]));
                }
                c
            })
            .collect()
    }
}

/// Initial variation vectors must live at the first base sample.
fn check_on_start(base: &Trajectory, v: &Tangent) -> Result<()> {
    let gap = base.manifold.dist(&base.points[0], v.base().coords());
    if !(gap <= 1e-9) || v.manifold() != base.manifold {
        return Err(GeoError::NotOnTrajectory { gap });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(1e-6..=1e-3).contains(&eps) {
        return Err(GeoError::DegenerateInput(format!(
            "ε must lie in [1e-6, 1e-3], got {eps}"
        )));
    }
    Ok(())
}

fn neighbor_log(m: &Manifold, base: &Mat, neighbor: &Mat, time: f64) -> Result<Mat> {
    let guard = 0.5 * m.injectivity_guard();
    if !(m.dist(base, neighbor) < guard) {
        return Err(GeoError::NeighborLeftInjectivityGuard { time });
    }
    m.log(base, neighbor)
        .map_err(|_| GeoError::NeighborLeftInjectivityGuard { time })
}

/// Finite-difference variation of a first-order flow: integrate the
/// neighbor from `exp(q₀, ε v₀)` and return `log(q(t), q_ε(t)) / ε`.
pub fn propagate_variation_fd<F>(
    f: F,
    base: &Trajectory,
    v0: &Tangent,
    eps: f64,
    scheme: Scheme,
) -> Result<VariationTrack>
where
    F: Fn(f64, &Mat) -> Result<Mat>,
{
    check_on_start(base, v0)?;
    check_eps(eps)?;
    let m = &base.manifold;
    let start = m.exp(&base.points[0], &(v0.coords() * eps))?;
    let neighbor = integrate_first_order(m, f, &start, (base.start(), base.end()), base.h, scheme)
        .map_err(|e| neighbor_error(e, base.end()))?;
    let qprime = (0..base.len())
        .map(|i| Ok(neighbor_log(m, &base.points[i], &neighbor.points[i], base.times[i])? / eps))
        .collect::<Result<_>>()?;
    Ok(VariationTrack {
        times: base.times.clone(),
        qprime,
        dqprime: None,
    })
}

fn neighbor_error(e: GeoError, time: f64) -> GeoError {
    match e {
        GeoError::AtCutLocus | GeoError::InjectivityRadiusExceeded { .. } => {
            GeoError::NeighborLeftInjectivityGuard { time }
        }
        other => other,
    }
}

/// Finite-difference variation of a tangent-bundle system (see
/// [`integrate_tangent_bundle`]). The neighbor starts at `exp(q₀, ε v₀)`
/// with velocity `P(q̇₀ + ε w₀)`; the covariant velocity of the variation is
/// recovered as `(P v_ε − v) / ε`.
pub fn propagate_variation_fd_tb<G>(
    g: G,
    base: &Trajectory,
    v0: &Tangent,
    w0: &Tangent,
    eps: f64,
    scheme: Scheme,
) -> Result<VariationTrack>
where
    G: Fn(f64, &Mat, &Mat) -> Result<(Mat, Mat)>,
{
    check_on_start(base, v0)?;
    check_on_start(base, w0)?;
    check_eps(eps)?;
    let m = &base.manifold;
    let velocities = base
        .velocities
        .as_ref()
        .ok_or_else(|| GeoError::DegenerateInput("base trajectory carries no velocities".into()))?;
    let q0 = &base.points[0];
    let start = m.exp(q0, &(v0.coords() * eps))?;
    let start_v = m.transport(q0, &start, &(&velocities[0] + w0.coords() * eps))?;
    let neighbor = integrate_tangent_bundle(
        m,
        g,
        &start,
        &start_v,
        (base.start(), base.end()),
        base.h,
        scheme,
    )
    .map_err(|e| neighbor_error(e, base.end()))?;
    let nv = neighbor
        .velocities
        .as_ref()
        .expect("tangent-bundle trajectories carry velocities");
    let mut qprime = Vec::with_capacity(base.len());
    let mut dqprime = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let (p, pe) = (&base.points[i], &neighbor.points[i]);
        qprime.push(neighbor_log(m, p, pe, base.times[i])? / eps);
        let back = m.transport(pe, p, &nv[i])?;
        dqprime.push((back - &velocities[i]) / eps);
    }
    Ok(VariationTrack {
        times: base.times.clone(),
        qprime,
        dqprime: Some(dqprime),
    })
}

/// Orthonormal frames along the base, transported sample to sample along the
/// chords and re-orthonormalized. Starts from `initial` or the manifold's
/// standard basis.
pub fn parallel_frame(base: &Trajectory, initial: Option<Vec<Mat>>) -> Vec<Vec<Mat>> {
    let m = &base.manifold;
    let mut frame = initial.unwrap_or_else(|| m.tangent_basis(&base.points[0]));
    let mut out = Vec::with_capacity(base.len());
    out.push(frame.clone());
    for w in base.points.windows(2) {
        let moved: Vec<Mat> = frame
            .iter()
            .map(|e| {
                m.transport(&w[0], &w[1], e)
                    .expect("consecutive samples are close")
            })
            .collect();
        frame = m.orthonormalize(&w[1], &moved);
        out.push(frame.clone());
    }
    out
}

/// Solve `a'' = −k₁ a' − k(t) a` in frame coordinates with RK4, where the
/// coefficient matrix is known at the samples and averaged at midpoints.
fn solve_frame_system(
    coeffs: &[Mat],
    damping: f64,
    h: f64,
    a0: Vec<f64>,
    b0: Vec<f64>,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = a0.len();
    let rhs = |k: &Mat, a: &[f64], b: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut db = vec![0.0; n];
        for i in 0..n {
            let mut acc = -damping * b[i];
            for j in 0..n {
                acc -= k[(i, j)] * a[j];
            }
            db[i] = acc;
        }
        (b.to_vec(), db)
    };
    let axpy = |x: &[f64], y: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| a + s * b).collect()
    };
    let mut out = Vec::with_capacity(coeffs.len());
    let (mut a, mut b) = (a0, b0);
    out.push((a.clone(), b.clone()));
    for w in coeffs.windows(2) {
        let mid = (&w[0] + &w[1]) * 0.5;
        let (ka1, kb1) = rhs(&w[0], &a, &b);
        let (ka2, kb2) = rhs(&mid, &axpy(&a, &ka1, 0.5 * h), &axpy(&b, &kb1, 0.5 * h));
        let (ka3, kb3) = rhs(&mid, &axpy(&a, &ka2, 0.5 * h), &axpy(&b, &kb2, 0.5 * h));
        let (ka4, kb4) = rhs(&w[1], &axpy(&a, &ka3, h), &axpy(&b, &kb3, h));
        for i in 0..n {
            a[i] += h / 6.0 * (ka1[i] + 2.0 * ka2[i] + 2.0 * ka3[i] + ka4[i]);
            b[i] += h / 6.0 * (kb1[i] + 2.0 * kb2[i] + 2.0 * kb3[i] + kb4[i]);
        }
        out.push((a.clone(), b.clone()));
    }
    out
}

fn assemble(
    m: &Manifold,
    base: &Trajectory,
    frames: &[Vec<Mat>],
    states: Vec<(Vec<f64>, Vec<f64>)>,
) -> VariationTrack {
    let (qprime, dqprime) = states
        .into_iter()
        .zip(frames)
        .map(|((a, b), frame)| {
            (
                m.from_frame_coords(frame, &a),
                m.from_frame_coords(frame, &b),
            )
        })
        .unzip();
    VariationTrack {
        times: base.times.clone(),
        qprime,
        dqprime: Some(dqprime),
    }
}

/// Largest covariant acceleration along a second-order trajectory.
pub fn geodesic_residual(base: &Trajectory) -> Result<f64> {
    let velocities = base
        .velocities
        .as_ref()
        .ok_or_else(|| GeoError::DegenerateInput("base trajectory carries no velocities".into()))?;
    let m = &base.manifold;
    let accel = fd_covariant_derivative(
        m,
        &base.points,
        velocities,
        base.h,
        &OracleConfig::default(),
    )?;
    Ok(accel
        .iter()
        .zip(&base.points)
        .map(|(a, p)| m.norm(p, a))
        .fold(0.0, f64::max))
}

/// Jacobi field along a geodesic: `D²J/dt² = −R(J, q̇) q̇` with `J(0) = v₀`,
/// `DJ/dt(0) = w₀`, solved in a parallel orthonormal frame.
pub fn propagate_jacobi(base: &Trajectory, v0: &Tangent, w0: &Tangent) -> Result<VariationTrack> {
    check_on_start(base, v0)?;
    check_on_start(base, w0)?;
    let residual = geodesic_residual(base)?;
    if residual > 1e-6 {
        return Err(GeoError::NotAGeodesic { residual });
    }
    let m = &base.manifold;
    let velocities = base
        .velocities
        .as_ref()
        .expect("checked by geodesic_residual");
    let frames = parallel_frame(base, None);
    let coeffs: Vec<Mat> = (0..base.len())
        .map(|i| {
            let (p, qd, e) = (&base.points[i], &velocities[i], &frames[i]);
            Mat::from_fn(e.len(), e.len(), |r, c| {
                m.inner(p, &e[r], &m.curvature(p, &e[c], qd, qd))
            })
        })
        .collect();
    let p0 = &base.points[0];
    let a0 = m.frame_coords(p0, &frames[0], v0.coords());
    let b0 = m.frame_coords(p0, &frames[0], w0.coords());
    Ok(assemble(
        m,
        base,
        &frames,
        solve_frame_system(&coeffs, 0.0, base.h, a0, b0),
    ))
}

/// Variation of the closed-loop tracking system along its reference:
/// `D²q′/dt² = −k₁ Dq′/dt − k₂ q′ − Hess V (q′)`, solved in a parallel
/// frame. `hess_v(q, u, w)` evaluates `Hess V(u, w)` at `q`.
pub fn propagate_linearized_el<H>(
    base: &Trajectory,
    k1: f64,
    k2: f64,
    hess_v: H,
    v0: &Tangent,
    w0: &Tangent,
) -> Result<VariationTrack>
where
    H: Fn(&Mat, &Mat, &Mat) -> f64,
{
    check_on_start(base, v0)?;
    check_on_start(base, w0)?;
    let m = &base.manifold;
    let frames = parallel_frame(base, None);
    let coeffs: Vec<Mat> = (0..base.len())
        .map(|i| {
            let (p, e) = (&base.points[i], &frames[i]);
            let mut k = Mat::from_fn(e.len(), e.len(), |r, c| hess_v(p, &e[r], &e[c]));
            for d in 0..e.len() {
                k[(d, d)] += k2;
            }
            k
        })
        .collect();
    let p0 = &base.points[0];
    let a0 = m.frame_coords(p0, &frames[0], v0.coords());
    let b0 = m.frame_coords(p0, &frames[0], w0.coords());
    Ok(assemble(
        m,
        base,
        &frames,
        solve_frame_system(&coeffs, k1, base.h, a0, b0),
    ))
}
