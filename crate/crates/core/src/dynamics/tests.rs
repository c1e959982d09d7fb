use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::GeoError;
use crate::linalg::hat;
use crate::manifold::{Point, Tangent};
use crate::oracles::{fd_covariant_derivative, fd_directional_covariant, OracleConfig};

fn col(v: &[f64]) -> Mat {
    Mat::from_column_slice(v.len(), 1, v)
}

fn sphere() -> Manifold {
    Manifold::sphere(2, 1.0).unwrap()
}

fn tangent(m: Manifold, p: &Mat, v: Mat) -> Tangent {
    Point::new(m, p.clone()).unwrap().tangent(v).unwrap()
}

/// Matrix exponential by scaling and squaring of a truncated series.
fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    let scaled = a / 1024.0;
    let mut sum = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..10 {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn zero_field_gives_constant_trajectory() {
    let m = sphere();
    let x0 = col(&[0.0, 0.6, 0.8]);
    let traj = integrate_first_order(
        &m,
        |_, _| Ok(Mat::zeros(3, 1)),
        &x0,
        (0.0, 1.0),
        0.01,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert_eq!(traj.len(), 101);
    assert!(traj.points.iter().all(|p| (p - &x0).norm() < 1e-15));
}

#[test]
fn rigid_rotation_on_sphere() {
    let m = sphere();
    let w = hat([0.0, 0.0, 1.0]);
    let traj = integrate_first_order(
        &m,
        |_, q| Ok(&w * q),
        &col(&[1.0, 0.0, 0.0]),
        (0.0, FRAC_PI_2),
        FRAC_PI_2 / 1000.0,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert!((traj.points.last().unwrap() - col(&[0.0, 1.0, 0.0])).norm() < 1e-6);
    let euler = integrate_first_order(
        &m,
        |_, q| Ok(&w * q),
        &col(&[1.0, 0.0, 0.0]),
        (0.0, FRAC_PI_2),
        FRAC_PI_2 / 1000.0,
        Scheme::GeodesicEuler,
    )
    .unwrap();
    assert!((euler.points.last().unwrap() - col(&[0.0, 1.0, 0.0])).norm() < 1e-6);
}

#[test]
fn linear_flow_matches_matrix_exponential() {
    let m = Manifold::euclidean(3).unwrap();
    let a = Mat::from_row_slice(3, 3, &[-0.5, 1.0, 0.0, -1.0, -0.2, 0.3, 0.0, 0.4, -1.0]);
    let x0 = col(&[1.0, -1.0, 0.5]);
    let traj = integrate_first_order(
        &m,
        |_, x| Ok(&a * x),
        &x0,
        (0.0, 1.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert!((traj.points.last().unwrap() - expm(&a) * &x0).norm() < 1e-6);
}

#[test]
fn rk4_step_halving() {
    let m = sphere();
    let f = |t: f64, q: &Mat| Ok(hat([0.3 * t.sin(), 0.5, 1.0]) * q);
    let x0 = col(&[1.0, 0.0, 0.0]);
    let reference =
        integrate_first_order(&m, f, &x0, (0.0, 2.0), 1e-3, Scheme::ProjectedRk4).unwrap();
    let end = reference.points.last().unwrap();
    let err = |h: f64| {
        let t = integrate_first_order(&m, f, &x0, (0.0, 2.0), h, Scheme::ProjectedRk4).unwrap();
        (t.points.last().unwrap() - end).norm()
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    assert!(coarse / fine >= 8.0, "{coarse} / {fine}");

    let euler = |h: f64| {
        let t = integrate_first_order(&m, f, &x0, (0.0, 2.0), h, Scheme::GeodesicEuler).unwrap();
        (t.points.last().unwrap() - end).norm()
    };
    let ratio = euler(0.01) / euler(0.005);
    assert!((1.7..2.3).contains(&ratio), "{ratio}");
}

#[test]
fn integrator_errors() {
    let m = sphere();
    let x0 = col(&[1.0, 0.0, 0.0]);
    let fast = |_: f64, q: &Mat| Ok(hat([0.0, 0.0, 100.0]) * q);
    assert!(matches!(
        integrate_first_order(&m, fast, &x0, (0.0, 1.0), 0.1, Scheme::ProjectedRk4),
        Err(GeoError::StepTooLarge { .. })
    ));
    assert!(integrate_first_order(
        &m,
        fast,
        &col(&[2.0, 0.0, 0.0]),
        (0.0, 1.0),
        0.1,
        Scheme::ProjectedRk4
    )
    .is_err());
    assert!(integrate_first_order(&m, fast, &x0, (0.0, 1.0), 0.3, Scheme::ProjectedRk4).is_err());
    let nan = |_: f64, q: &Mat| Ok(q * f64::NAN);
    assert!(integrate_first_order(&m, nan, &x0, (0.0, 1.0), 0.1, Scheme::GeodesicEuler).is_err());
}

fn all_manifolds() -> Vec<Manifold> {
    vec![
        Manifold::euclidean(3).unwrap(),
        sphere(),
        Manifold::so3(),
        Manifold::spd(2).unwrap(),
    ]
}

#[test]
fn free_motion_follows_geodesics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zero = |_: f64, _: &Mat, v: &Mat| Ok(v * 0.0);
    for m in all_manifolds() {
        let q0 = m.random_point(&mut rng, 1.0);
        let v0 = m.random_tangent(&mut rng, &q0, 1.0);
        let traj =
            integrate_second_order(&m, zero, &q0, &v0, (0.0, 1.0), 1e-3, Scheme::ProjectedRk4)
                .unwrap();
        let speed0 = m.norm(&q0, &v0);
        for (i, (q, v)) in traj
            .points
            .iter()
            .zip(traj.velocities.as_ref().unwrap())
            .enumerate()
        {
            let t = traj.times[i];
            let exact = m.exp(&q0, &(&v0 * t)).unwrap();
            assert!(m.dist(q, &exact) <= 1e-6, "{} at t={t}", m.name());
            assert!((m.norm(q, v) - speed0).abs() <= 1e-8, "{}", m.name());
        }
        let euler =
            integrate_second_order(&m, zero, &q0, &v0, (0.0, 1.0), 1e-3, Scheme::GeodesicEuler)
                .unwrap();
        let exact = m.exp(&q0, &v0).unwrap();
        assert!(
            m.dist(euler.points.last().unwrap(), &exact) <= 1e-6,
            "{}",
            m.name()
        );
    }
    let e = Manifold::euclidean(2).unwrap();
    let traj = integrate_second_order(
        &e,
        zero,
        &col(&[1.0, 2.0]),
        &col(&[0.5, -1.0]),
        (0.0, 2.0),
        0.01,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert!((traj.points.last().unwrap() - col(&[2.0, 0.0])).norm() < 1e-12);
}

fn pendulum_force(g: f64) -> impl Fn(f64, &Mat, &Mat) -> crate::Result<Mat> {
    move |_, q, _| {
        let e3 = col(&[0.0, 0.0, 1.0]);
        Ok(-sphere().project_tangent(q, &(e3 * g)))
    }
}

#[test]
fn spherical_pendulum_conserves_energy() {
    let m = sphere();
    let q0 = m.project_point(&col(&[1.0, 0.2, 0.4]));
    let v0 = m.project_tangent(&q0, &col(&[0.0, 0.8, 0.3]));
    let traj = integrate_second_order(
        &m,
        pendulum_force(1.0),
        &q0,
        &v0,
        (0.0, 10.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let energy = |q: &Mat, v: &Mat| 0.5 * v.norm_squared() + q[2];
    let e0 = energy(&q0, &v0);
    for (q, v) in traj.points.iter().zip(traj.velocities.as_ref().unwrap()) {
        assert!((energy(q, v) - e0).abs() < 1e-5);
    }
}

#[test]
fn hermite_lookup_between_samples() {
    let m = sphere();
    let q0 = col(&[1.0, 0.0, 0.0]);
    let v0 = col(&[0.0, 1.0, 0.0]);
    let traj = integrate_second_order(
        &m,
        |_, _, v| Ok(v * 0.0),
        &q0,
        &v0,
        (0.0, 1.0),
        0.01,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let (q, v) = traj.state_at(0.505).unwrap();
    assert!((q - col(&[0.505f64.cos(), 0.505f64.sin(), 0.0])).norm() < 1e-8);
    assert!((v.unwrap() - col(&[-0.505f64.sin(), 0.505f64.cos(), 0.0])).norm() < 1e-6);
    assert_eq!(traj.state_at(0.5).unwrap().0, traj.points[50]);
    assert!(traj.state_at(1.5).is_err());
}

#[test]
fn fd_variation_examples() {
    let e = Manifold::euclidean(2).unwrap();
    let a = Mat::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
    let f = |_: f64, x: &Mat| Ok(&a * x);
    let x0 = col(&[1.0, 1.0]);
    let base = integrate_first_order(&e, f, &x0, (0.0, 1.0), 1e-3, Scheme::ProjectedRk4).unwrap();
    let zero = propagate_variation_fd(
        f,
        &base,
        &tangent(e, &x0, col(&[0.0, 0.0])),
        1e-5,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert!(zero.qprime.iter().all(|v| v.norm() == 0.0));
    let v0 = col(&[0.3, -0.7]);
    let track = propagate_variation_fd(
        f,
        &base,
        &tangent(e, &x0, v0.clone()),
        1e-5,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    assert!((track.qprime.last().unwrap() - expm(&a) * v0).norm() < 1e-6);

    let other = Point::new(e, col(&[0.0, 0.0]))
        .unwrap()
        .tangent(col(&[1.0, 0.0]))
        .unwrap();
    assert!(matches!(
        propagate_variation_fd(f, &base, &other, 1e-5, Scheme::ProjectedRk4),
        Err(GeoError::NotOnTrajectory { .. })
    ));
    assert!(propagate_variation_fd(
        f,
        &base,
        &tangent(e, &x0, col(&[1.0, 0.0])),
        1e-2,
        Scheme::ProjectedRk4
    )
    .is_err());
}

fn great_circle(t_end: f64) -> Trajectory {
    let m = sphere();
    integrate_second_order(
        &m,
        |_, _, v| Ok(v * 0.0),
        &col(&[1.0, 0.0, 0.0]),
        &col(&[0.0, 1.0, 0.0]),
        (0.0, t_end),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap()
}

#[test]
fn jacobi_on_unit_sphere() {
    let m = sphere();
    let base = great_circle(10.0);
    let p0 = &base.points[0];
    let normal = tangent(m, p0, col(&[0.0, 0.0, 1.0]));
    let zero = tangent(m, p0, Mat::zeros(3, 1));
    let track = propagate_jacobi(&base, &zero, &normal).unwrap();
    let dq = track.dqprime.as_ref().unwrap();
    for (i, n) in track.norms(&base).into_iter().enumerate() {
        let t = base.times[i];
        assert!((n - t.sin().abs()).abs() < 1e-5, "t={t}");
        let conserved = m.norm(&base.points[i], &dq[i]).powi(2) + n * n;
        assert!((conserved - 1.0).abs() < 1e-5);
    }

    let along = tangent(m, p0, col(&[0.0, 1.0, 0.0]));
    let track = propagate_jacobi(&base, &along, &zero).unwrap();
    for (j, v) in track.qprime.iter().zip(base.velocities.as_ref().unwrap()) {
        assert!((j - v).norm() < 1e-6);
    }

    // finite-difference cross-check of the cosine field
    let g = |_: f64, _: &Mat, v: &Mat| Ok((v.clone(), v * 0.0));
    let short = great_circle(3.0);
    let fd =
        propagate_variation_fd_tb(g, &short, &normal, &zero, 1e-5, Scheme::ProjectedRk4).unwrap();
    for (i, n) in fd.norms(&short).into_iter().enumerate() {
        assert!((n - short.times[i].cos().abs()).abs() < 2e-3);
    }
}

#[test]
fn jacobi_on_flat_space_is_affine() {
    let e = Manifold::euclidean(3).unwrap();
    let (q0, v) = (col(&[0.0, 1.0, 0.0]), col(&[1.0, 0.5, 0.0]));
    let base = integrate_second_order(
        &e,
        |_, _, v| Ok(v * 0.0),
        &q0,
        &v,
        (0.0, 5.0),
        1e-2,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let (v0, w0) = (col(&[0.2, 0.0, -1.0]), col(&[0.0, 1.0, 3.0]));
    let track = propagate_jacobi(
        &base,
        &tangent(e, &q0, v0.clone()),
        &tangent(e, &q0, w0.clone()),
    )
    .unwrap();
    for (i, j) in track.qprime.iter().enumerate() {
        assert!((j - (&v0 + &w0 * base.times[i])).norm() < 1e-8);
    }
}

#[test]
fn jacobi_rejects_non_geodesic() {
    let m = sphere();
    let q0 = col(&[1.0, 0.0, 0.0]);
    let base = integrate_second_order(
        &m,
        pendulum_force(1.0),
        &q0,
        &col(&[0.0, 1.0, 0.0]),
        (0.0, 1.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let v = tangent(m, &q0, col(&[0.0, 0.0, 1.0]));
    assert!(matches!(
        propagate_jacobi(&base, &v, &v),
        Err(GeoError::NotAGeodesic { .. })
    ));
}

#[test]
fn jacobi_matches_fd_variation_on_all_manifolds() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eps = 1e-5;
    let g = |_: f64, _: &Mat, v: &Mat| Ok((v.clone(), v * 0.0));
    for m in all_manifolds() {
        let q0 = m.random_point(&mut rng, 1.0);
        let v = m.random_tangent(&mut rng, &q0, 1.0);
        let base = integrate_second_order(
            &m,
            |_, _, v| Ok(v * 0.0),
            &q0,
            &v,
            (0.0, 2.0),
            1e-3,
            Scheme::ProjectedRk4,
        )
        .unwrap();
        let v0 = tangent(m, &q0, m.random_tangent(&mut rng, &q0, 1.0));
        let w0 = tangent(m, &q0, m.random_tangent(&mut rng, &q0, 1.0));
        let jac = propagate_jacobi(&base, &v0, &w0).unwrap();
        let fd = propagate_variation_fd_tb(g, &base, &v0, &w0, eps, Scheme::ProjectedRk4).unwrap();
        let frames = parallel_frame(&base, None);
        let (a, b) = (
            jac.frame_coords(&base, &frames),
            fd.frame_coords(&base, &frames),
        );
        let worst = a
            .iter()
            .zip(&b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        assert!(worst <= (1e-4f64).max(10.0 * eps), "{}: {worst}", m.name());
    }
}

#[test]
fn linearized_el_examples() {
    let m = sphere();
    let base = great_circle(10.0);
    let p0 = &base.points[0];
    let flat = |_: &Mat, _: &Mat, _: &Mat| 0.0;
    let zero = tangent(m, p0, Mat::zeros(3, 1));
    let track = propagate_linearized_el(&base, 4.0, 4.0, flat, &zero, &zero).unwrap();
    assert!(track.qprime.iter().all(|v| v.norm() == 0.0));

    // slow mode of s² + 4s + 4
    let v0 = tangent(m, p0, col(&[0.0, 0.0, 1.0]));
    let w0 = tangent(m, p0, col(&[0.0, 0.0, -2.0]));
    let track = propagate_linearized_el(&base, 4.0, 4.0, flat, &v0, &w0).unwrap();
    let frames = parallel_frame(&base, None);
    let norms: Vec<f64> = track
        .frame_coords(&base, &frames)
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let fit = fit_decay(&base.times, &norms, DEFAULT_WINDOW_FRAC).unwrap();
    assert!((fit.lambda - 2.0).abs() < 0.1, "{fit:?}");

    let undamped = propagate_linearized_el(&base, 0.0, 1.0, flat, &v0, &zero).unwrap();
    let coords = undamped.frame_coords(&base, &frames);
    for c in coords {
        let energy: f64 = c.iter().map(|x| x * x).sum();
        assert!((energy - 1.0).abs() < 1e-8);
    }
}

#[test]
fn variation_commutes_with_the_flow() {
    let m = sphere();
    let f = |t: f64, q: &Mat| {
        Ok(hat([0.2, 0.3 * t.cos(), 1.0]) * q + m.project_tangent(q, &col(&[0.0, 0.0, 0.5])))
    };
    let x0 = m.project_point(&col(&[1.0, 0.3, 0.2]));
    let base = integrate_first_order(&m, f, &x0, (0.0, 2.0), 1e-3, Scheme::ProjectedRk4).unwrap();
    let eps = 1e-5;
    let track = propagate_variation_fd(
        f,
        &base,
        &tangent(m, &x0, m.project_tangent(&x0, &col(&[0.0, 1.0, 1.0]))),
        eps,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let cfg = OracleConfig::default();
    let dq = fd_covariant_derivative(&m, &base.points, &track.qprime, base.h, &cfg).unwrap();
    for i in (0..base.len()).step_by(50) {
        let t = base.times[i];
        let field = |q: &Mat| f(t, q).unwrap();
        let nabla = fd_directional_covariant(&m, &base.points[i], &track.qprime[i], &field, &cfg);
        assert!(
            (&dq[i] - nabla).norm() <= (1e-4f64).max(10.0 * eps),
            "t={t}"
        );
    }
}

#[test]
fn lift_analysis_examples() {
    let e = Manifold::euclidean(2).unwrap();
    let a = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    let f = |_: f64, x: &Mat| Ok(&a * x);
    let base = integrate_first_order(
        &e,
        f,
        &col(&[1.0, 1.0]),
        (0.0, 5.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let lift =
        lift_frame_analysis(f, &base, 1e-5, Scheme::ProjectedRk4, DEFAULT_WINDOW_FRAC).unwrap();
    assert!((lift.fit.lambda - 1.0).abs() < 0.05);

    // the velocity of an autonomous flow is itself a lift solution
    let speeds: Vec<f64> = base.points.iter().map(|x| (&a * x).norm()).collect();
    assert!(
        fit_decay(&base.times, &speeds, DEFAULT_WINDOW_FRAC)
            .unwrap()
            .lambda
            > 0.0
    );

    let s = sphere();
    let still = |_: f64, q: &Mat| Ok(q * 0.0);
    let base = integrate_first_order(
        &s,
        still,
        &col(&[0.0, 1.0, 0.0]),
        (0.0, 1.0),
        1e-2,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let lift = lift_frame_analysis(
        still,
        &base,
        1e-5,
        Scheme::ProjectedRk4,
        DEFAULT_WINDOW_FRAC,
    )
    .unwrap();
    assert!(lift.growth.iter().all(|g| (g - 1.0).abs() < 1e-9));
    assert!(lift.fit.lambda.abs() < 1e-3);
}

#[test]
fn tangent_bundle_lift_of_damped_oscillator() {
    let e = Manifold::euclidean(1).unwrap();
    let g = |_: f64, q: &Mat, v: &Mat| Ok((v.clone(), -(q * 4.0) - v * 5.0));
    let base = integrate_tangent_bundle(
        &e,
        g,
        &col(&[1.0]),
        &col(&[0.0]),
        (0.0, 8.0),
        1e-3,
        Scheme::ProjectedRk4,
    )
    .unwrap();
    let lift = lift_frame_analysis_tb(g, &base, 1e-5, Scheme::ProjectedRk4, 0.3).unwrap();
    // roots −1 and −4
    assert!((lift.fit.lambda - 1.0).abs() < 0.05, "{:?}", lift.fit);
}

#[test]
fn sasaki_examples() {
    let m = sphere();
    let p = col(&[1.0, 0.0, 0.0]);
    let v = col(&[0.0, 1.0, 0.0]);
    let w = col(&[0.0, 0.0, 2.0]);
    assert_eq!(sasaki_distance(&m, (&p, &v), (&p, &v)).unwrap(), 0.0);
    assert!((sasaki_distance(&m, (&p, &v), (&p, &w)).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    let antipode = col(&[-1.0, 0.0, 0.0]);
    assert!(sasaki_distance(&m, (&p, &v), (&antipode, &w)).is_err());

    let e = Manifold::euclidean(2).unwrap();
    let d = sasaki_distance(
        &e,
        (&col(&[0.0, 0.0]), &col(&[1.0, 0.0])),
        (&col(&[3.0, 4.0]), &col(&[1.0, 1.0])),
    )
    .unwrap();
    assert!((d - 26f64.sqrt()).abs() < 1e-14);
    let _ = PI;
}
