use nalgebra::DMatrix;
use rand::Rng;

use crate::control::{contraction_certificate, gradient_flow_field, rate_at_distance, volume_rate};
use crate::dynamics::{
    fit_decay, integrate_first_order, integrate_tangent_bundle, lift_frame_analysis,
    lift_frame_analysis_tb, propagate_variation_fd, sasaki_distance, Scheme, DEFAULT_WINDOW_FRAC,
};
use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::{Manifold, Point, Tangent};
use crate::oracles::fd_scalar_series;

use super::config::ScenarioConfig;
use super::report::{Check, Table};
use super::tracking::{closed_loop, free_motion};
use super::Outcome;

fn flow_of(m: Manifold, target: &Mat, lambda: f64) -> impl Fn(f64, &Mat) -> Result<Mat> + '_ {
    move |_, q| gradient_flow_field(&m, q, target, lambda)
}

/// Point at distance `d` from `target` in direction `cos φ e₁ + sin φ e₂`.
fn polar(m: &Manifold, target: &Mat, basis: &[Mat], d: f64, phi: f64) -> Result<Mat> {
    let dir = &basis[0] * phi.cos() + &basis[1] * phi.sin();
    m.exp(target, &(dir * d))
}

pub(super) fn gradient_flow_contraction<R: Rng>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Outcome> {
    let m = cfg.manifold;
    let lambda = cfg.gains.lambda_flow()?;
    let target = cfg.require_point("target", &cfg.initial.target)?;
    let d0 = cfg.positive("offset", cfg.initial.offset)?;
    let sep = cfg.positive("separation", cfg.initial.separation)?;
    let pairs = cfg.count()?;
    let a = m.curvature_upper_bound();
    let basis = m.tangent_basis(&target);
    if basis.len() < 2 {
        return Err(GeoError::ConfigInvalid(
            "pairs need a manifold of dimension ≥ 2".into(),
        ));
    }
    let radius = match m {
        Manifold::Sphere { radius, .. } => radius,
        _ => 1.0,
    };
    let flow = flow_of(m, &target, lambda);
    let dphi = sep / (radius * (d0 / radius).sin());

    let mut out = Outcome::new(Table::new(&[
        "distance_to_target",
        "log_rate",
        "rate_bound",
    ]));
    let (mut excess, mut far_rate, mut initial_rate, mut final_rate) =
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY, 0.0);
    let mut pair_fits = Vec::with_capacity(pairs);
    let mut certificate = f64::INFINITY;
    for pair in 0..pairs {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let a0 = polar(&m, &target, &basis, d0, phi)?;
        let b0 = polar(&m, &target, &basis, d0, phi + dphi)?;
        let ta = integrate_first_order(&m, &flow, &a0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;
        let tb = integrate_first_order(&m, &flow, &b0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;
        let dist: Vec<f64> = ta
            .points
            .iter()
            .zip(&tb.points)
            .map(|(p, q)| m.dist(p, q))
            .collect();
        let log_sq: Vec<f64> = dist.iter().map(|d| 2.0 * d.ln()).collect();
        let rate = fd_scalar_series(&log_sq, cfg.h, true)?;
        for i in 0..ta.len() {
            let da = m.dist(&ta.points[i], &target);
            let db = m.dist(&tb.points[i], &target);
            let bound = rate_at_distance(da.max(db), lambda, a)?;
            excess = excess.max(rate[i] + bound);
            if da.min(db) >= 0.5 {
                far_rate = far_rate.max(-rate[i]);
            }
            if pair == 0 {
                out.table
                    .push(vec![ta.times[i], dist[i], da, rate[i], bound]);
            }
        }
        initial_rate = initial_rate.min(-rate[0]);
        final_rate += -rate[rate.len() - 1] / pairs as f64;
        pair_fits.push(fit_decay(&ta.times, &dist, DEFAULT_WINDOW_FRAC)?);
        if pair == 0 {
            certificate = contraction_certificate(&flow, &ta.subsampled(100), 10)?;
        }
    }
    let gamma0 = rate_at_distance(d0, lambda, a)?;
    let at_target = 2.0 / lambda;
    out.fit("pair_distance", pair_fits[0]);
    out.predict(
        "rate_at_start",
        gamma0,
        "γ(d) = 2√A d / (λ tan(√A d)) at the starting distance",
    );
    out.predict("rate_at_target", at_target, "γ(0) = 2/λ");
    out.check(
        "log_rate_within_bound",
        Check::AtMost,
        excess,
        0.0,
        0.05,
        "largest d/dt ln d² + γ(d_max) over all pairs and samples",
    );
    out.check(
        "rate_at_target",
        Check::Relative,
        final_rate,
        at_target,
        0.10,
        "mean −d/dt ln d² at the end of the run against 2/λ",
    );
    out.check(
        "rate_below_limit_away_from_target",
        Check::Below,
        far_rate,
        at_target,
        0.0,
        "largest −d/dt ln d² while both trajectories are at distance ≥ 0.5 from the target",
    );
    out.check(
        "initial_rate",
        Check::AtLeast,
        initial_rate,
        gamma0,
        0.05 * gamma0,
        "smallest initial −d/dt ln d² against γ(d₀)",
    );
    out.diag("certificate_margin", certificate);
    out.diag(
        "mean_pair_lambda",
        pair_fits.iter().map(|f| f.lambda).sum::<f64>() / pair_fits.len() as f64,
    );
    Ok(out)
}

fn log_volume(m: &Manifold, p: &Mat, vectors: &[&Mat]) -> f64 {
    let n = vectors.len();
    let gram = DMatrix::from_fn(n, n, |r, c| m.inner(p, vectors[r], vectors[c]));
    0.5 * gram.determinant().ln()
}

pub(super) fn volume_contraction<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let lambda = cfg.gains.lambda_flow()?;
    let target = cfg.require_point("target", &cfg.initial.target)?;
    let max_d = cfg.positive("offset", cfg.initial.offset)?;
    let starts = cfg.count()?;
    let flow = flow_of(m, &target, lambda);

    let mut out = Outcome::new(Table::new(&["log_volume", "fd_rate", "predicted_rate"]));
    let mut worst = 0.0f64;
    for s in 0..starts {
        let d = rng.random_range(0.2 * max_d..=max_d);
        let dir = m.random_tangent(rng, &target, d);
        let q0 = m.exp(&target, &dir)?;
        let base = integrate_first_order(&m, &flow, &q0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;
        let p0 = Point::new(m, q0.clone())?;
        let tracks = m
            .tangent_basis(&q0)
            .into_iter()
            .map(|e| {
                propagate_variation_fd(
                    &flow,
                    &base,
                    &Tangent::new(p0.clone(), e)?,
                    cfg.eps,
                    Scheme::ProjectedRk4,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let logs: Vec<f64> = (0..base.len())
            .map(|i| {
                let vs: Vec<&Mat> = tracks.iter().map(|t| &t.qprime[i]).collect();
                log_volume(&m, &base.points[i], &vs)
            })
            .collect();
        let rate = fd_scalar_series(&logs, cfg.h, true)?;
        for i in 0..base.len() {
            let predicted = volume_rate(&m, &base.points[i], &target, lambda)?;
            worst = worst.max((rate[i] - predicted).abs());
            if s == 0 {
                let dist = m.dist(&base.points[i], &target);
                out.table
                    .push(vec![base.times[i], dist, logs[i], rate[i], predicted]);
            }
        }
    }
    out.predict(
        "volume_rate",
        -(m.dim() as f64) / lambda,
        "−ΔF/λ at the attractor",
    );
    out.check(
        "log_volume_rate",
        Check::AtMost,
        worst,
        0.0,
        1e-3,
        "largest |FD log-volume rate + ΔF/λ| along all trajectories",
    );
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(super) fn lift_equivalence<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let lambda = cfg.gains.lambda_flow()?;
    let target = cfg.require_point("target", &cfg.initial.target)?;
    let q0 = cfg.require_point("q", &cfg.initial.q)?;
    let sep = cfg.positive("separation", cfg.initial.separation)?;
    let count = cfg.count()?;
    let eps = cfg.eps;
    let scheme = Scheme::ProjectedRk4;

    // gradient flow
    let flow = flow_of(m, &target, lambda);
    let base = integrate_first_order(&m, &flow, &q0, cfg.span(), cfg.h, scheme)?;
    let lift = lift_frame_analysis(&flow, &base, eps, scheme, DEFAULT_WINDOW_FRAC)?;
    let mut flow_lambdas = Vec::with_capacity(count);
    let mut flow_first = Vec::new();
    for i in 0..count {
        let dir = m.random_tangent(rng, &q0, sep);
        let start = m.exp(&q0, &dir)?;
        let nb = integrate_first_order(&m, &flow, &start, cfg.span(), cfg.h, scheme)?;
        let d: Vec<f64> = base
            .points
            .iter()
            .zip(&nb.points)
            .map(|(a, b)| m.dist(a, b))
            .collect();
        flow_lambdas.push(fit_decay(&base.times, &d, DEFAULT_WINDOW_FRAC)?.lambda);
        if i == 0 {
            flow_first = d;
        }
    }

    // tracking closed loop about its own reference
    let reference = free_motion(cfg)?;
    let potential = cfg.potential.clone();
    let g = closed_loop(m, &reference, &potential, cfg.gains);
    let v0 = cfg.velocity_at(&q0)?;
    let tb = integrate_tangent_bundle(&m, &g, &q0, &v0, cfg.span(), cfg.h, scheme)?;
    let lift_tb = lift_frame_analysis_tb(&g, &tb, eps, scheme, DEFAULT_WINDOW_FRAC)?;
    let tb_v = tb.velocities.as_ref().expect("tangent-bundle trajectory");
    let mut tracking_lambdas = Vec::with_capacity(count);
    let mut tracking_first = Vec::new();
    for i in 0..count {
        let (du, dw) = (
            m.random_tangent(rng, &q0, sep),
            m.random_tangent(rng, &q0, sep),
        );
        let start = m.exp(&q0, &du)?;
        let start_v = m.transport(&q0, &start, &(&v0 + dw))?;
        let nb = integrate_tangent_bundle(&m, &g, &start, &start_v, cfg.span(), cfg.h, scheme)?;
        let nv = nb.velocities.as_ref().expect("tangent-bundle trajectory");
        let d = (0..tb.len())
            .map(|j| sasaki_distance(&m, (&tb.points[j], &tb_v[j]), (&nb.points[j], &nv[j])))
            .collect::<Result<Vec<f64>>>()?;
        tracking_lambdas.push(fit_decay(&tb.times, &d, DEFAULT_WINDOW_FRAC)?.lambda);
        if i == 0 {
            tracking_first = d;
        }
    }

    let mut out = Outcome::new(Table::new(&[
        "flow_lift_growth",
        "tracking_distance",
        "tracking_lift_growth",
    ]));
    for i in 0..base.len() {
        out.table.push(vec![
            base.times[i],
            flow_first[i] / sep,
            lift.growth[i],
            tracking_first[i] / sep,
            lift_tb.growth[i],
        ]);
    }
    let (flow_direct, tracking_direct) = (mean(&flow_lambdas), mean(&tracking_lambdas));
    out.fit("flow_lift", lift.fit);
    out.fit("tracking_lift", lift_tb.fit);
    out.predict(
        "flow_lift",
        lift.fit.lambda,
        "decay of the complete lift in parallel frame coordinates",
    );
    out.predict(
        "tracking_lift",
        lift_tb.fit.lambda,
        "decay of the tangent-bundle lift in parallel frame coordinates",
    );
    out.check(
        "flow_direct_vs_lift",
        Check::Relative,
        flow_direct,
        lift.fit.lambda,
        0.15,
        "mean fitted decay of nearby gradient-flow trajectories against the lift",
    );
    out.check(
        "tracking_direct_vs_lift",
        Check::Relative,
        tracking_direct,
        lift_tb.fit.lambda,
        0.15,
        "mean fitted decay of nearby closed-loop trajectories against the lift",
    );
    out.diag("flow_direct_lambda", flow_direct);
    out.diag("tracking_direct_lambda", tracking_direct);
    Ok(out)
}
