use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dynamics::{
    integrate_first_order, integrate_second_order, integrate_tangent_bundle, parallel_frame,
    propagate_linearized_el, propagate_variation_fd_tb, Scheme,
};
use crate::linalg::{hat, rotation, rotation_angle};
use crate::manifold::Point;
use crate::oracles::killing_samples;

fn col(v: &[f64]) -> Mat {
    Mat::from_column_slice(v.len(), 1, v)
}

fn sphere() -> Manifold {
    Manifold::sphere(2, 1.0).unwrap()
}

fn pd(k1: f64, k2: f64) -> Gains {
    Gains {
        k1: Some(k1),
        k2: Some(k2),
        ..Default::default()
    }
}

fn height(g: f64) -> Potential {
    Potential::Height {
        g,
        axis: vec![0.0, 0.0, 1.0],
    }
}

#[test]
fn gains_must_be_present_and_positive() {
    let g = Gains {
        k1: Some(1.0),
        k2: Some(-1.0),
        ..Default::default()
    };
    assert_eq!(g.k1(), Ok(1.0));
    assert!(matches!(g.k2(), Err(GeoError::GainOutOfRange(_))));
    assert!(matches!(g.alpha(), Err(GeoError::GainOutOfRange(_))));
}

#[test]
fn potential_gradient_and_hessian_match_differences() {
    let m = Manifold::sphere(2, 1.5).unwrap();
    let v = Potential::Height {
        g: 2.0,
        axis: vec![0.3, 0.0, 1.0],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let q = m.random_point(&mut rng, 1.0);
        let u = m.random_tangent(&mut rng, &q, 1.0);
        let eps = 1e-5;
        let along = |s: f64| v.value(&m, &m.exp(&q, &(&u * s)).unwrap()).unwrap();
        let slope = (along(eps) - along(-eps)) / (2.0 * eps);
        assert!((slope - m.inner(&q, &v.gradient(&m, &q).unwrap(), &u)).abs() < 1e-8);
        let e = 1e-3;
        let second = (along(e) - 2.0 * along(0.0) + along(-e)) / (e * e);
        assert!((second - v.hessian(&m, &q, &u, &u).unwrap()).abs() < 1e-5);
    }
    assert!(v.validate(&Manifold::so3()).is_err());
    assert!(Potential::Zero.validate(&Manifold::so3()).is_ok());
}

#[test]
fn tracking_force_examples() {
    let e = Manifold::euclidean(2).unwrap();
    let (q, qd, qs, qsd) = (
        col(&[1.0, 2.0]),
        col(&[0.5, 0.0]),
        col(&[0.0, 1.0]),
        col(&[0.0, -1.0]),
    );
    let u = tracking_force(&e, &q, &qd, (&qs, &qsd), &pd(3.0, 2.0)).unwrap();
    let expected = (&q - &qs) * -2.0 - (&qd - &qsd) * 3.0;
    assert!((u - expected).norm() < 1e-14);

    let m = sphere();
    let q = col(&[1.0, 0.0, 0.0]);
    let qs = m.exp(&q, &col(&[0.0, 0.3, 0.1])).unwrap();
    let qsd = m.project_tangent(&qs, &col(&[0.2, -0.4, 0.9]));
    let zero = Mat::zeros(3, 1);
    let gains = pd(4.0, 4.0);
    let u = tracking_force(&m, &q, &zero, (&qs, &qsd), &gains).unwrap();
    let grad = m.grad_half_sq_dist(&q, &qs).unwrap();
    let expected = &grad * -4.0 + m.transport(&qs, &q, &qsd).unwrap() * 4.0;
    assert!((u - expected).norm() < 1e-14);
}

#[test]
fn laws_reproduce_the_plant_at_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let gains = Gains {
        k1: Some(2.0),
        k2: Some(3.0),
        alpha: Some(4.0),
        beta: Some(4.0),
        k: Some(1.5),
        lambda_flow: Some(1.0),
    };
    let manifolds = [
        Manifold::euclidean(3).unwrap(),
        sphere(),
        Manifold::so3(),
        Manifold::spd(3).unwrap(),
    ];
    for m in manifolds {
        let potential = match m {
            Manifold::Sphere { .. } | Manifold::Euclidean { .. } => height(1.0),
            _ => Potential::Zero,
        };
        for _ in 0..100 {
            let q = m.random_point(&mut rng, 1.0);
            let speed = rng.random_range(0.0..2.0);
            let v = m.random_tangent(&mut rng, &q, speed);
            let u = tracking_force(&m, &q, &v, (&q, &v), &gains).unwrap();
            assert!(m.norm(&q, &u) < 1e-12, "{}", m.name());
            let (a, b) = speed_observer_field(&m, &q, &v, &q, &potential, &gains).unwrap();
            assert!((a - &v).norm() < 1e-12);
            assert!((b + potential.gradient(&m, &q).unwrap()).norm() < 1e-12);
            assert!(m.norm(&q, &gradient_flow_field(&m, &q, &q, 2.0).unwrap()) < 1e-12);
        }
    }
    let r = rotation([0.3, -0.2, 1.0], 0.8);
    let omega = hat([0.1, 0.5, -0.3]);
    assert!((so3_tracking_field(&r, &r, &omega, 4.0) - &r * &omega).norm() < 1e-15);
    for form in [So3FilterForm::Gradient, So3FilterForm::Log] {
        assert!(
            (so3_filter_field(&r, &r, &omega, 4.0, form).unwrap() - &r * &omega).norm() < 1e-15
        );
    }
}

#[test]
fn flat_observer_is_classical() {
    let e = Manifold::euclidean(2).unwrap();
    let gains = Gains {
        alpha: Some(2.0),
        beta: Some(5.0),
        ..Default::default()
    };
    let (qh, vh, q) = (col(&[1.0, 0.0]), col(&[0.0, 1.0]), col(&[0.5, 0.5]));
    let (a, b) = speed_observer_field(&e, &qh, &vh, &q, &Potential::Zero, &gains).unwrap();
    assert!((a - (&vh - (&qh - &q) * 2.0)).norm() < 1e-15);
    assert!((b + (&qh - &q) * 5.0).norm() < 1e-15);
}

#[allow(clippy::type_complexity)]
/// Closed-loop tracking system on the unit sphere and a reference sampled
/// at half the plant step.
fn closed_loop(
    potential: Potential,
    which: CurvatureTerm,
    t_end: f64,
    h: f64,
) -> (
    SampledReference,
    impl Fn(f64, &Mat, &Mat) -> crate::Result<(Mat, Mat)>,
) {
    let m = sphere();
    let q0 = m.project_point(&col(&[1.0, 0.2, 0.3]));
    let v0 = m.project_tangent(&q0, &col(&[0.1, 1.0, 0.4]));
    let pot = potential.clone();
    let reference = integrate_second_order(
        &m,
        move |_, q, _| Ok(-pot.gradient(&m, q)?),
        &q0,
        &v0,
        (0.0, t_end),
        h / 2.0,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let reference = SampledReference {
        trajectory: reference,
        bounded: true,
    };
    let r2 = reference.clone();
    let gains = pd(4.0, 4.0);
    let g = move |t: f64, q: &Mat, v: &Mat| {
        let (qs, vs) = r2.at(t)?;
        let u = tracking_force_with(&m, q, v, (&qs, &vs), &gains, which)?;
        Ok((v.clone(), -potential.gradient(&m, q)? + u))
    };
    (reference, g)
}

fn linearization_gap(which: CurvatureTerm) -> f64 {
    let m = sphere();
    let h = 1e-3;
    let potential = height(1.0);
    let (reference, g) = closed_loop(potential.clone(), which, 3.0, h);
    let q0 = reference.trajectory.points[0].clone();
    let v0 = reference.trajectory.velocities.as_ref().unwrap()[0].clone();
    let base =
        integrate_tangent_bundle(&m, &g, &q0, &v0, (0.0, 3.0), h, Scheme::ProjectedRk4).unwrap();
    let p0 = Point::new(m, q0.clone()).unwrap();
    let dq = p0
        .tangent(m.project_tangent(&q0, &col(&[0.0, -0.3, 1.0])))
        .unwrap();
    let dv = p0
        .tangent(m.project_tangent(&q0, &col(&[0.5, 0.2, 0.0])))
        .unwrap();
    let eps = 1e-5;
    let fd = propagate_variation_fd_tb(&g, &base, &dq, &dv, eps, Scheme::ProjectedRk4).unwrap();
    let hess = |q: &Mat, u: &Mat, w: &Mat| potential.hessian(&m, q, u, w).unwrap();
    let lin = propagate_linearized_el(&base, 4.0, 4.0, hess, &dq, &dv).unwrap();
    let frames = parallel_frame(&base, None);
    fd.frame_coords(&base, &frames)
        .iter()
        .zip(lin.frame_coords(&base, &frames))
        .flat_map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn closed_loop_linearization_matches_frame_equation() {
    let gap = linearization_gap(CurvatureTerm::Compensating);
    assert!(gap <= 1e-3, "{gap}");
    let reversed = linearization_gap(CurvatureTerm::Reversed);
    assert!(reversed > 1e-2, "{reversed}");
}

#[test]
fn reference_is_feasible() {
    let (reference, _) = closed_loop(height(1.0), CurvatureTerm::Compensating, 2.0, 1e-3);
    assert!(feasibility_residual(&reference, &height(1.0)).unwrap() <= 1e-6);
}

#[test]
fn so3_tracking_examples() {
    let theta = 0.4;
    let r = rotation([0.0, 0.0, 1.0], theta);
    let zero = Mat::zeros(3, 3);
    let rdot = so3_tracking_field(&r, &Mat::identity(3, 3), &zero, 4.0);
    let u = r.transpose() * rdot;
    assert!((u - hat([0.0, 0.0, -4.0 * theta.sin()])).norm() < 1e-14);
}

#[test]
fn log_filter_decays_at_rate_k() {
    let m = Manifold::so3();
    let (k, theta0) = (2.0, 0.8);
    let target = Mat::identity(3, 3);
    let zero = Mat::zeros(3, 3);
    let f = |_: f64, rh: &Mat| so3_filter_field(rh, &target, &zero, k, So3FilterForm::Log);
    let traj = integrate_first_order(
        &m,
        f,
        &rotation([1.0, 1.0, 0.0], theta0),
        (0.0, 2.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    for (t, r) in traj.times.iter().zip(&traj.points) {
        assert!((rotation_angle(r) - theta0 * (-k * t).exp()).abs() < 1e-9);
    }
}

#[test]
fn filter_forms_agree_to_second_order() {
    let r = rotation([0.2, 1.0, -0.5], 0.7);
    let omega = hat([0.0, 0.3, 1.0]);
    let gap = |theta: f64| {
        let rh = &r * rotation([1.0, -1.0, 0.4], theta);
        let a = so3_filter_field(&rh, &r, &omega, 3.0, So3FilterForm::Gradient).unwrap();
        let b = so3_filter_field(&rh, &r, &omega, 3.0, So3FilterForm::Log).unwrap();
        (a - b).norm()
    };
    let order = (gap(0.1) / gap(0.05)).log2();
    assert!(order >= 2.0, "{order}");
    let half_turn = &r * rotation([0.0, 0.0, 1.0], PI);
    assert_eq!(
        so3_filter_field(&half_turn, &r, &omega, 1.0, So3FilterForm::Log),
        Err(GeoError::AtCutLocus)
    );
}

#[test]
fn killing_certification_gate() {
    let m = sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = killing_samples(&m, &mut rng, 30);
    let w = hat([0.0, 0.2, 1.0]);
    let rot =
        KillingField::certify(m, Arc::new(move |_, q: &Mat| &w * q), &[0.0], &samples).unwrap();
    assert!(rot.residual() <= KILLING_TOL);
    let q = col(&[1.0, 0.0, 0.0]);
    assert_eq!(
        killing_filter_field(&rot, 0.0, &q, &q, 1.0).unwrap(),
        rot.eval(0.0, &q)
    );

    let pole = col(&[0.0, 0.0, 1.0]);
    let radial = Arc::new(move |_: f64, q: &Mat| {
        -sphere().log(q, &pole).unwrap_or_else(|_| Mat::zeros(3, 1))
    });
    let near: Vec<(Mat, Mat)> = samples.into_iter().filter(|(q, _)| q[2] > -0.5).collect();
    assert!(matches!(
        KillingField::certify(m, radial.clone(), &[0.0], &near),
        Err(GeoError::NotKilling { .. })
    ));
    let uncertified = KillingField::measure(m, radial, &[0.0], &near);
    assert!(matches!(
        killing_filter_field(&uncertified, 0.0, &q, &q, 1.0),
        Err(GeoError::NotKilling { .. })
    ));
}

#[test]
fn discrete_killing_step_examples() {
    let e = Manifold::euclidean(2).unwrap();
    let id = LinearIsometry(Mat::identity(2, 2));
    let (qh, q) = (col(&[1.0, 1.0]), col(&[3.0, -1.0]));
    let next = killing_filter_discrete_step(&e, &qh, &q, &id, 2.0, 0.05).unwrap();
    assert!((next - (&qh + (&q - &qh) * 0.1)).norm() < 1e-15);
    assert!(matches!(
        killing_filter_discrete_step(&e, &qh, &q, &id, 10.0, 0.1),
        Err(GeoError::GainOutOfRange(_))
    ));

    let spd = Manifold::spd(2).unwrap();
    let g = rotation([0.0, 0.0, 1.0], 0.05)
        .view((0, 0), (2, 2))
        .into_owned();
    let tau = Congruence(g);
    let p = Mat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let same = killing_filter_discrete_step(&spd, &p, &p, &tau, 1.0, 0.1).unwrap();
    assert!((same - tau.apply(&p)).norm() < 1e-14);

    let (mut qh, mut q) = (Mat::identity(2, 2), p.clone());
    let mut prev = spd.dist(&qh, &q);
    for step in 0..200 {
        qh = killing_filter_discrete_step(&spd, &qh, &q, &tau, 1.0, 0.1).unwrap();
        q = tau.apply(&q);
        let d = spd.dist(&qh, &q);
        if step > 5 {
            assert!(d / prev <= 0.95, "step {step}: {}", d / prev);
        }
        prev = d;
    }
}

#[test]
fn gradient_flow_examples() {
    let e = Manifold::euclidean(2).unwrap();
    let (q, p) = (col(&[1.0, 2.0]), col(&[-1.0, 0.0]));
    assert!((gradient_flow_field(&e, &q, &p, 2.0).unwrap() - (&p - &q) / 2.0).norm() < 1e-15);
    let m = sphere();
    let q = col(&[1.0, 0.0, 0.0]);
    let p = col(&[0.0, 0.6, 0.8]);
    let f = gradient_flow_field(&m, &q, &p, 0.5).unwrap();
    assert!((f.norm() - m.dist(&q, &p) / 0.5).abs() < 1e-14);
}

#[test]
fn rate_bound_examples() {
    assert_eq!(rate_at_distance(0.0, 1.0, 1.0).unwrap(), 2.0);
    assert_eq!(rate_at_distance(5.0, 2.0, 0.0).unwrap(), 1.0);
    assert!((rate_at_distance(FRAC_PI_4, 1.0, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert!(matches!(
        rate_at_distance(FRAC_PI_2, 1.0, 1.0),
        Err(GeoError::BeyondValidityRange { .. })
    ));
    let mut last = f64::INFINITY;
    for i in 0..100 {
        let g = rate_at_distance(i as f64 * 0.0157, 1.0, 1.0).unwrap();
        assert!(g <= last);
        last = g;
    }
    let m = sphere();
    let q = col(&[1.0, 0.0, 0.0]);
    assert_eq!(contraction_rate_bound(&m, &q, &q, 1.0, 1.0).unwrap(), 2.0);
}

#[test]
fn contraction_certificate_examples() {
    let e = Manifold::euclidean(3).unwrap();
    let x0 = col(&[1.0, -1.0, 0.5]);
    let shrink = |_: f64, x: &Mat| Ok(-x);
    let base =
        integrate_first_order(&e, shrink, &x0, (0.0, 1.0), 1e-2, Scheme::ProjectedRk4).unwrap();
    assert!((contraction_certificate(shrink, &base, 5).unwrap() - 1.0).abs() < 1e-6);
    let still = |_: f64, x: &Mat| Ok(x * 0.0);
    assert!(contraction_certificate(still, &base, 5).unwrap().abs() < 1e-6);

    let m = sphere();
    let p = col(&[0.0, 0.0, 1.0]);
    let flow = |_: f64, q: &Mat| gradient_flow_field(&m, q, &p, 1.0);
    let start = col(&[FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos()]);
    let base =
        integrate_first_order(&m, flow, &start, (0.0, 2.0), 1e-2, Scheme::ProjectedRk4).unwrap();
    let margin = contraction_certificate(flow, &base, 10).unwrap();
    assert!(margin >= FRAC_PI_4 * 0.95, "{margin}");
    assert!((margin - FRAC_PI_4).abs() < 0.05 * FRAC_PI_4);
}

#[test]
fn volume_rate_examples() {
    let m = sphere();
    let p = col(&[0.0, 0.0, 1.0]);
    assert!((volume_rate(&m, &p, &p, 1.0).unwrap() + 2.0).abs() < 1e-14);
    let q = col(&[1f64.sin(), 0.0, 1f64.cos()]);
    assert!((volume_rate(&m, &q, &p, 1.0).unwrap() + 1.6421).abs() < 1e-4);
    let e = Manifold::euclidean(4).unwrap();
    assert!(
        (volume_rate(&e, &col(&[1.0, 2.0, 3.0, 4.0]), &col(&[0.0; 4]), 1.0).unwrap() + 4.0).abs()
            < 1e-14
    );
    let _ = FRAC_PI_3;
}
