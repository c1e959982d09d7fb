use std::sync::Arc;

use rand::Rng;

use crate::control::{
    killing_filter_discrete_step, killing_filter_field, Congruence, Isometry, KillingField,
};
use crate::dynamics::{fit_decay, integrate_first_order, Scheme, DEFAULT_WINDOW_FRAC};
use crate::error::Result;
use crate::linalg::{sym_part, Mat};
use crate::oracles::killing_samples;

use super::config::ScenarioConfig;
use super::report::{Check, Table};
use super::Outcome;

fn expm(a: &Mat) -> Mat {
    a.clone().exp()
}

pub(super) fn killing_spd_continuous<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let k = cfg.gains.k()?;
    let q0 = cfg.require_point("q", &cfg.initial.q)?;
    let qh0 = cfg.require_point("q_hat", &cfg.initial.q_hat)?;
    let b = cfg.rate_matrix()?;
    let t0 = cfg.t_span[0];
    let generator = b.clone();
    let field = Arc::new(move |_: f64, q: &Mat| &generator * q + q * generator.transpose());
    let samples = killing_samples(&m, rng, 20);
    let (t_a, t_b) = cfg.span();
    let f = KillingField::certify(m, field, &[t_a, 0.5 * (t_a + t_b), t_b], &samples)?;
    let measured = |t: f64| {
        let g = expm(&(&b * (t - t0)));
        sym_part(&(&g * &q0 * g.transpose()))
    };
    let filter = |t: f64, qh: &Mat| killing_filter_field(&f, t, qh, &measured(t), k);
    let traj = integrate_first_order(&m, filter, &qh0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;
    let dist: Vec<f64> = traj
        .points
        .iter()
        .zip(&traj.times)
        .map(|(p, &t)| m.dist(p, &measured(t)))
        .collect();

    let mut out = Outcome::new(Table::new(&[]));
    for (&t, &d) in traj.times.iter().zip(&dist) {
        out.table.push(vec![t, d]);
    }
    let fit = fit_decay(&traj.times, &dist, DEFAULT_WINDOW_FRAC)?;
    out.fit("distance", fit);
    out.predict(
        "gain",
        k,
        "global rate bound k for a Killing system on a manifold of nonpositive curvature",
    );
    out.check(
        "distance_rate_at_least_k",
        Check::AtLeast,
        fit.lambda,
        k,
        1e-6,
        "fitted decay of d(q̂, q) against the lower bound k",
    );
    let worst = traj
        .times
        .iter()
        .zip(&dist)
        .map(|(&t, &d)| d - dist[0] * (-k * (t - t0)).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    out.check(
        "distance_below_envelope",
        Check::AtMost,
        worst,
        0.0,
        1e-8,
        "largest excess of d(q̂, q) over d₀e^{−kt}",
    );
    out.diag("killing_residual", f.residual());
    out.diag("initial_distance", dist[0]);
    Ok(out)
}

pub(super) fn killing_spd_discrete<R: Rng>(cfg: &ScenarioConfig, _rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let k = cfg.gains.k()?;
    let dt = cfg.h;
    let mut q = cfg.require_point("q", &cfg.initial.q)?;
    let mut qh = cfg.require_point("q_hat", &cfg.initial.q_hat)?;
    let tau = Congruence(expm(&(cfg.rate_matrix()? * dt)));
    let steps = ((cfg.t_span[1] - cfg.t_span[0]) / dt).round() as usize;

    let mut out = Outcome::new(Table::new(&["ratio"]));
    let mut prev = m.dist(&qh, &q);
    let (mut times, mut dist) = (vec![cfg.t_span[0]], vec![prev]);
    out.table.push(vec![cfg.t_span[0], prev, f64::NAN]);
    let mut ratios = Vec::with_capacity(steps);
    for i in 1..=steps {
        qh = killing_filter_discrete_step(&m, &qh, &q, &tau, k, dt)?;
        q = tau.apply(&q);
        let d = m.dist(&qh, &q);
        let t = cfg.t_span[0] + i as f64 * dt;
        ratios.push(d / prev);
        out.table.push(vec![t, d, d / prev]);
        times.push(t);
        dist.push(d);
        prev = d;
    }
    let worst = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_decay(&times, &dist, DEFAULT_WINDOW_FRAC)?;
    out.fit("distance", fit);
    out.predict(
        "per_step_factor",
        1.0 - k * dt,
        "contraction factor 1 − kΔt of the correction step",
    );
    out.check(
        "per_step_ratio",
        Check::AtMost,
        worst,
        0.95,
        0.0,
        "largest per-step ratio d(q̂ₙ₊₁, qₙ₊₁) / d(q̂ₙ, qₙ)",
    );
    out.diag("steps", steps as f64);
    out.diag(
        "mean_ratio",
        ratios.iter().sum::<f64>() / ratios.len() as f64,
    );
    out.diag(
        "isometry_offset",
        (&tau.0 - Mat::identity(tau.0.nrows(), tau.0.ncols())).norm(),
    );
    Ok(out)
}
