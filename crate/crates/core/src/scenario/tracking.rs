use nalgebra::Matrix2;
use rand::Rng;

use crate::control::{
    feasibility_residual, speed_observer_field, tracking_force, Gains, Potential, ReferenceSignal,
    SampledReference,
};
use crate::dynamics::{
    fit_decay, integrate_second_order, integrate_tangent_bundle, propagate_linearized_el,
    sasaki_distance, Scheme, Trajectory, DEFAULT_WINDOW_FRAC,
};
use crate::error::Result;
use crate::linalg::Mat;
use crate::manifold::{Manifold, Point};

use super::config::ScenarioConfig;
use super::report::{Check, Table};
use super::Outcome;

/// Free motion `∇_q̇ q̇ = −∇V` from the configured `q`, `v`, sampled at half
/// the plant step so every RK4 stage reads an exact sample.
pub(super) fn free_motion(cfg: &ScenarioConfig) -> Result<SampledReference> {
    let m = cfg.manifold;
    let q0 = cfg.require_point("q", &cfg.initial.q)?;
    let v0 = cfg.velocity_at(&q0)?;
    let potential = cfg.potential.clone();
    let trajectory = integrate_second_order(
        &m,
        move |_, q, _| Ok(-potential.gradient(&m, q)?),
        &q0,
        &v0,
        cfg.span(),
        cfg.h / 2.0,
        Scheme::ProjectedRk4,
    )?;
    Ok(SampledReference {
        trajectory,
        bounded: true,
    })
}

/// Closed-loop tracking dynamics `(q̇, Dq̇/dt)` for the given reference.
pub(super) fn closed_loop<'a>(
    m: Manifold,
    reference: &'a SampledReference,
    potential: &'a Potential,
    gains: Gains,
) -> impl Fn(f64, &Mat, &Mat) -> Result<(Mat, Mat)> + 'a {
    move |t, q, v| {
        let (qs, vs) = reference.at(t)?;
        let u = tracking_force(&m, q, v, (&qs, &vs), &gains)?;
        Ok((v.clone(), u - potential.gradient(&m, q)?))
    }
}

/// Start displaced from `(q, v)` by `offset` along a random direction, with
/// the velocity carried along.
pub(super) fn displaced_start<R: Rng>(
    cfg: &ScenarioConfig,
    rng: &mut R,
    q: &Mat,
    v: &Mat,
) -> Result<(Mat, Mat)> {
    let m = cfg.manifold;
    if let Some(values) = &cfg.initial.q_hat {
        let start = cfg.require_point("q_hat", &Some(values.clone()))?;
        let carried = m.transport(q, &start, v)?;
        return Ok((start, carried));
    }
    let offset = cfg.positive("offset", cfg.initial.offset)?;
    let dir = m.random_tangent(rng, q, offset);
    let start = m.exp(q, &dir)?;
    let carried = m.transport(q, &start, v)?;
    Ok((start, carried))
}

/// Error of `e'' + c₁e' + c₀e = 0` and of its velocity, from `e(0) = 1`,
/// `e'(0) = de0`.
fn damped_response(c1: f64, c0: f64, de0: f64, t: f64) -> (f64, f64) {
    let a = Matrix2::new(0.0, 1.0, -c0, -c1) * t;
    let s = a.exp() * nalgebra::Vector2::new(1.0, de0);
    (s[0], s[1])
}

fn sasaki_series(m: &Manifold, plant: &Trajectory, reference: &Trajectory) -> Result<Vec<f64>> {
    let (pv, rv) = (
        plant.velocities.as_ref().unwrap(),
        reference.velocities.as_ref().unwrap(),
    );
    (0..plant.len())
        .map(|i| {
            sasaki_distance(
                m,
                (&plant.points[i], &pv[i]),
                (&reference.points[i], &rv[i]),
            )
        })
        .collect()
}

pub(super) fn tracking_sphere<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let gains = cfg.gains;
    let (k1, k2) = (gains.k1()?, gains.k2()?);
    let potential = cfg.potential.clone();
    let reference = free_motion(cfg)?;
    let aligned = reference.trajectory.subsampled(2);
    let (q_ref0, v_ref0) = reference.at(cfg.t_span[0])?;
    let (q0, v0) = displaced_start(cfg, rng, &q_ref0, &v_ref0)?;
    let g = closed_loop(m, &reference, &potential, gains);
    let plant =
        integrate_tangent_bundle(&m, &g, &q0, &v0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;

    let error = sasaki_series(&m, &plant, &aligned)?;
    let distance: Vec<f64> = plant
        .points
        .iter()
        .zip(&aligned.points)
        .map(|(a, b)| m.dist(a, b))
        .collect();

    let p0 = Point::new(m, q_ref0.clone())?;
    let dq = p0.tangent(m.log(&q_ref0, &q0)?)?;
    let dv = p0.zero_tangent();
    let hess = |q: &Mat, u: &Mat, w: &Mat| potential.hessian(&m, q, u, w).unwrap_or(f64::NAN);
    let lin = propagate_linearized_el(&aligned, k1, k2, hess, &dq, &dv)?;
    let lin_dv = lin.dqprime.as_ref().expect("second-order variation");
    let predicted_norm: Vec<f64> = (0..aligned.len())
        .map(|i| {
            let p = &aligned.points[i];
            let (a, b) = (m.norm(p, &lin.qprime[i]), m.norm(p, &lin_dv[i]));
            (a * a + b * b).sqrt()
        })
        .collect();

    let mut out = Outcome::new(Table::new(&["sasaki_error", "predicted_norm"]));
    for i in 0..plant.len() {
        out.table.push(vec![
            plant.times[i],
            distance[i],
            error[i],
            predicted_norm[i],
        ]);
    }
    let fitted = fit_decay(&plant.times, &error, DEFAULT_WINDOW_FRAC)?;
    let frame = fit_decay(&aligned.times, &predicted_norm, DEFAULT_WINDOW_FRAC)?;
    out.fit("sasaki_error", fitted);
    out.fit("frame_prediction", frame);
    out.predict(
        "frame_prediction",
        frame.lambda,
        "linearized closed loop D²q′ + k₁Dq′ + (k₂ + Hess V)q′ = 0 solved in a parallel frame",
    );
    out.check(
        "sasaki_error_rate",
        Check::Relative,
        fitted.lambda,
        frame.lambda,
        0.25,
        "fitted decay of the Sasaki-proxy tracking error against the frame-coordinate prediction",
    );
    if matches!(potential, Potential::Zero) {
        let critical = k1 / 2.0;
        if (k1 * k1 - 4.0 * k2).abs() < 1e-12 {
            out.predict(
                "critical_damping",
                critical,
                "double root −k₁/2 of s² + k₁s + k₂",
            );
            out.check(
                "sasaki_error_rate_critical",
                Check::Relative,
                fitted.lambda,
                critical,
                0.25,
                "fitted decay against the critically damped rate k₁/2",
            );
        }
    }
    out.diag(
        "reference_feasibility",
        feasibility_residual(&reference, &potential)?,
    );
    out.diag("initial_error", error[0]);
    out.diag("final_error", *error.last().unwrap());
    Ok(out)
}

pub(super) fn observer_sphere_pendulum<R: Rng>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Outcome> {
    let m = cfg.manifold;
    let gains = cfg.gains;
    let (alpha, beta) = (gains.alpha()?, gains.beta()?);
    let potential = cfg.potential.clone();
    let truth = free_motion(cfg)?;
    let aligned = truth.trajectory.subsampled(2);
    let (q0, v0) = truth.at(cfg.t_span[0])?;
    let (qh0, vh0) = displaced_start(cfg, rng, &q0, &v0)?;
    let field = |t: f64, qh: &Mat, vh: &Mat| {
        let (q, _) = truth.at(t)?;
        speed_observer_field(&m, qh, vh, &q, &potential, &gains)
    };
    let estimate = integrate_tangent_bundle(
        &m,
        field,
        &qh0,
        &vh0,
        cfg.span(),
        cfg.h,
        Scheme::ProjectedRk4,
    )?;

    let error = sasaki_series(&m, &estimate, &aligned)?;
    let e0 = m.dist(&qh0, &q0);
    // e(0) = e0 with v̂ − q̇ = 0, so e′(0) = −α e(0)
    let predicted_norm: Vec<f64> = estimate
        .times
        .iter()
        .map(|&t| {
            let (e, de) = damped_response(alpha, beta, -alpha, t - cfg.t_span[0]);
            e0 * (e * e + (de + alpha * e).powi(2)).sqrt()
        })
        .collect();

    let mut out = Outcome::new(Table::new(&["sasaki_error", "predicted_norm"]));
    for i in 0..estimate.len() {
        let d = m.dist(&estimate.points[i], &aligned.points[i]);
        out.table
            .push(vec![estimate.times[i], d, error[i], predicted_norm[i]]);
    }
    let fitted = fit_decay(&estimate.times, &error, DEFAULT_WINDOW_FRAC)?;
    let frame = fit_decay(&estimate.times, &predicted_norm, DEFAULT_WINDOW_FRAC)?;
    out.fit("sasaki_error", fitted);
    out.fit("error_equation", frame);
    let disc = alpha * alpha - 4.0 * beta;
    let slowest = if disc >= 0.0 {
        (alpha - disc.sqrt()) / 2.0
    } else {
        alpha / 2.0
    };
    out.predict(
        "slowest_root",
        slowest,
        "slowest root of s² + αs + β of the observer error equation",
    );
    out.predict(
        "error_equation",
        frame.lambda,
        "fit of the error-equation solution on the same window",
    );
    out.check(
        "observer_error_rate",
        Check::Relative,
        fitted.lambda,
        slowest,
        0.25,
        "fitted decay of the Sasaki-proxy estimation error",
    );
    out.diag("initial_error", error[0]);
    out.diag("final_error", *error.last().unwrap());
    Ok(out)
}
