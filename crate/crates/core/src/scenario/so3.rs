use rand::Rng;

use crate::control::{so3_filter_field, so3_tracking_field, So3FilterForm};
use crate::dynamics::{fit_decay, integrate_first_order, Scheme, DEFAULT_WINDOW_FRAC};
use crate::error::Result;
use crate::linalg::{so3_exp, Mat};
use crate::manifold::Manifold;
use crate::oracles::least_squares;

use super::config::ScenarioConfig;
use super::report::{Check, Table};
use super::Outcome;

fn start_with_offset<R: Rng>(cfg: &ScenarioConfig, rng: &mut R, r: &Mat) -> Result<Mat> {
    if cfg.initial.q_hat.is_some() {
        return cfg.require_point("q_hat", &cfg.initial.q_hat);
    }
    let offset = cfg.positive("offset", cfg.initial.offset)?;
    let dir = Manifold::So3.random_tangent(rng, r, offset * std::f64::consts::SQRT_2);
    Manifold::So3.exp(r, &dir)
}

pub(super) fn so3_filter<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = Manifold::So3;
    let k = cfg.gains.k()?;
    let r0 = cfg.require_point("q", &cfg.initial.q)?;
    let omega = cfg.rate_matrix()?;
    let t0 = cfg.t_span[0];
    let measured = |t: f64| &r0 * so3_exp(&(&omega * (t - t0)));
    let rh0 = start_with_offset(cfg, rng, &r0)?;

    let run = |form: So3FilterForm| {
        let f = |t: f64, rh: &Mat| so3_filter_field(rh, &measured(t), &omega, k, form);
        integrate_first_order(&m, f, &rh0, cfg.span(), cfg.h, Scheme::ProjectedRk4)
    };
    let grad = run(So3FilterForm::Gradient)?;
    let log = run(So3FilterForm::Log)?;
    let angle = |rh: &Mat, t: f64| m.dist(rh, &measured(t)) / std::f64::consts::SQRT_2;
    let grad_err: Vec<f64> = grad
        .points
        .iter()
        .zip(&grad.times)
        .map(|(p, &t)| angle(p, t))
        .collect();
    let log_err: Vec<f64> = log
        .points
        .iter()
        .zip(&log.times)
        .map(|(p, &t)| angle(p, t))
        .collect();

    let mut out = Outcome::new(Table::new(&["distance_log_form"]));
    for i in 0..grad.len() {
        out.table.push(vec![grad.times[i], grad_err[i], log_err[i]]);
    }
    let fit_grad = fit_decay(&grad.times, &grad_err, DEFAULT_WINDOW_FRAC)?;
    let fit_log = fit_decay(&log.times, &log_err, DEFAULT_WINDOW_FRAC)?;
    out.fit("angle_gradient_form", fit_grad);
    out.fit("angle_log_form", fit_log);
    out.predict(
        "filter_gain",
        k,
        "linearized error angle obeys θ̇ = −kθ for both forms",
    );

    // gap between the two correction terms under error halving
    let axis = m.random_tangent(rng, &r0, 1.0);
    let unit = &r0.transpose() * &axis;
    let thetas: Vec<f64> = (0..6).map(|i| 0.2 / 2f64.powi(i)).collect();
    let gaps = thetas
        .iter()
        .map(|&th| {
            let rh = &r0 * so3_exp(&(&unit * th));
            let a = so3_filter_field(&rh, &r0, &omega, k, So3FilterForm::Gradient)?;
            let b = so3_filter_field(&rh, &r0, &omega, k, So3FilterForm::Log)?;
            Ok((a - b).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst_order = gaps
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let (slope, _, _) = least_squares(&xs, &ys);
    out.diag("form_gap_order_fit", slope);
    out.check(
        "form_agreement_order",
        Check::AtLeast,
        worst_order,
        2.0,
        0.0,
        "smallest halving order of |gradient form − log form| as the error angle shrinks",
    );
    out.check(
        "log_form_rate",
        Check::Relative,
        fit_log.lambda,
        k,
        0.25,
        "fitted decay of the log-form filter error angle",
    );
    out.check(
        "gradient_form_rate",
        Check::Relative,
        fit_grad.lambda,
        k,
        0.25,
        "fitted decay of the gradient-form filter error angle near convergence",
    );
    Ok(out)
}

pub(super) fn so3_tracking<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = Manifold::So3;
    let k = cfg.gains.k()?;
    let r_star0 = cfg.require_point("q", &cfg.initial.q)?;
    let omega_star = cfg.rate_matrix()?;
    let t0 = cfg.t_span[0];
    let target = |t: f64| &r_star0 * so3_exp(&(&omega_star * (t - t0)));
    let r0 = start_with_offset(cfg, rng, &r_star0)?;
    let field = |t: f64, r: &Mat| {
        let rs = target(t);
        let e = rs.transpose() * r;
        let omega = e.transpose() * &omega_star * &e;
        Ok(so3_tracking_field(r, &rs, &omega, k))
    };
    let traj = integrate_first_order(&m, field, &r0, cfg.span(), cfg.h, Scheme::ProjectedRk4)?;
    let frob: Vec<f64> = traj
        .points
        .iter()
        .zip(&traj.times)
        .map(|(r, &t)| (r - target(t)).norm())
        .collect();

    let mut out = Outcome::new(Table::new(&["frobenius_error"]));
    for ((&t, r), &f) in traj.times.iter().zip(&traj.points).zip(&frob) {
        out.table.push(vec![t, m.dist(r, &target(t)), f]);
    }
    let fit = fit_decay(&traj.times, &frob, DEFAULT_WINDOW_FRAC)?;
    out.fit("frobenius_error", fit);

    // Hess F at R* along a unit direction, F = ½‖R − R*‖²
    let dir = m.random_tangent(rng, &r_star0, 1.0);
    let f_along = |s: f64| 0.5 * (m.exp(&r_star0, &(&dir * s)).unwrap() - &r_star0).norm_squared();
    let e = 1e-3;
    let hess_scale = (f_along(e) - 2.0 * f_along(0.0) + f_along(-e)) / (e * e);
    out.diag("hessian_scale_measured", hess_scale);

    out.predict(
        "quarter_gain",
        k / 4.0,
        "Hess F = ¼ g at the target, giving rate k/4",
    );
    out.predict(
        "measured_hessian",
        k * hess_scale,
        "rate k·s with s the measured Hessian scale of F at the target",
    );
    out.check(
        "frobenius_rate",
        Check::Relative,
        fit.lambda,
        k / 4.0,
        0.25,
        "fitted Frobenius-error decay against k/4",
    );
    out.check(
        "frobenius_rate_measured_hessian",
        Check::Relative,
        fit.lambda,
        k * hess_scale,
        0.25,
        "fitted Frobenius-error decay against k times the measured Hessian scale",
    );
    Ok(out)
}
