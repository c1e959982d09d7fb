use rand::Rng;

use crate::dynamics::{integrate_second_order, propagate_jacobi, Scheme};
use crate::error::{GeoError, Result};
use crate::manifold::{Manifold, Point};

use super::config::ScenarioConfig;
use super::report::{Check, Table};
use super::Outcome;

/// `sin(√K t)/√K`, the Jacobi field norm for unit speed and unit initial
/// derivative at constant curvature `K`.
fn sn(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * t).sin() / k.sqrt()
    } else if k < 0.0 {
        ((-k).sqrt() * t).sinh() / (-k).sqrt()
    } else {
        t
    }
}

pub(super) fn jacobi_demo<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Outcome> {
    let m = cfg.manifold;
    let q0 = cfg.require_point("q", &cfg.initial.q)?;
    let v = cfg.velocity_at(&q0)?;
    let speed = m.norm(&q0, &v);
    if !(speed > 0.0) {
        return Err(GeoError::ConfigInvalid(
            "initial.v must be a nonzero tangent vector".into(),
        ));
    }
    let v0 = v / speed;
    let k = m.curvature_upper_bound();
    let base = integrate_second_order(
        &m,
        |_, _, _| Ok(m.zero_tangent()),
        &q0,
        &v0,
        cfg.span(),
        cfg.h,
        Scheme::ProjectedRk4,
    )?;
    let w = m.random_tangent(rng, &q0, 1.0);
    let w = &w - &v0 * m.inner(&q0, &w, &v0);
    let w = &w / m.norm(&q0, &w);
    let p0 = Point::new(m, q0.clone())?;
    let jac = propagate_jacobi(&base, &p0.zero_tangent(), &p0.tangent(w)?)?;
    let dj = jac
        .dqprime
        .as_ref()
        .expect("Jacobi fields carry their derivative");
    let norms = jac.norms(&base);
    let t0 = cfg.t_span[0];

    let mut out = Outcome::new(Table::new(&["expected", "conserved"]));
    let (mut shape_err, mut v_min, mut v_max) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..base.len() {
        let t = base.times[i] - t0;
        let expected = sn(k, t).abs();
        shape_err = shape_err.max((norms[i] - expected).abs());
        let p = &base.points[i];
        let conserved = m.norm(p, &dj[i]).powi(2) + k * norms[i].powi(2);
        v_min = v_min.min(conserved);
        v_max = v_max.max(conserved);
        out.table
            .push(vec![base.times[i], norms[i], expected, conserved]);
    }
    out.check(
        "jacobi_norm_matches_closed_form",
        Check::AtMost,
        shape_err,
        0.0,
        1e-4,
        "largest | |J(t)| − |sin(√K t)/√K| |",
    );
    out.check(
        "conserved_quantity_drift",
        Check::AtMost,
        v_max - v_min,
        0.0,
        1e-5,
        "spread of |DJ/dt|² + K|J|² along the geodesic",
    );
    let affine = flat_jacobi_affinity(rng, cfg)?;
    out.check(
        "euclidean_jacobi_affine",
        Check::AtMost,
        affine,
        0.0,
        1e-8,
        "largest |J(t) − (J₀ + t J₀′)| in Euclidean space",
    );
    Ok(out)
}

fn flat_jacobi_affinity<R: Rng>(rng: &mut R, cfg: &ScenarioConfig) -> Result<f64> {
    let e = Manifold::euclidean(3)?;
    let q0 = e.random_point(rng, 1.0);
    let v0 = e.random_tangent(rng, &q0, 1.0);
    let base = integrate_second_order(
        &e,
        |_, _, _| Ok(e.zero_tangent()),
        &q0,
        &v0,
        cfg.span(),
        cfg.h,
        Scheme::ProjectedRk4,
    )?;
    let p0 = Point::new(e, q0.clone())?;
    let a = e.random_tangent(rng, &q0, 1.0);
    let b = e.random_tangent(rng, &q0, 1.0);
    let jac = propagate_jacobi(&base, &p0.tangent(a.clone())?, &p0.tangent(b.clone())?)?;
    Ok(jac
        .qprime
        .iter()
        .zip(&base.times)
        .map(|(j, &t)| (j - (&a + &b * (t - cfg.t_span[0]))).norm())
        .fold(0.0, f64::max))
}
