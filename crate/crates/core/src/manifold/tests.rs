use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{hat, rotation};

fn col(v: &[f64]) -> Mat {
    Mat::from_column_slice(v.len(), 1, v)
}

fn unit_sphere() -> Manifold {
    Manifold::sphere(2, 1.0).unwrap()
}

fn all_manifolds() -> Vec<Manifold> {
    vec![
        Manifold::euclidean(3).unwrap(),
        Manifold::sphere(2, 1.0).unwrap(),
        Manifold::sphere(3, 2.5).unwrap(),
        Manifold::so3(),
        Manifold::spd(2).unwrap(),
        Manifold::spd(3).unwrap(),
    ]
}

#[test]
fn rejects_bad_parameters() {
    assert!(Manifold::sphere(2, 0.0).is_err());
    assert!(Manifold::sphere(0, 1.0).is_err());
    assert!(Manifold::euclidean(0).is_err());
    assert!(Manifold::spd(0).is_err());
}

#[test]
fn so3_inner_of_z_generator() {
    let m = Manifold::so3();
    let theta = 0.7;
    let p = Point::new(m, Mat::identity(3, 3)).unwrap();
    let v = p.tangent(hat([0.0, 0.0, theta])).unwrap();
    assert!((inner(&v, &v).unwrap() - 2.0 * theta * theta).abs() < 1e-15);
    assert_eq!(inner(&v, &p.zero_tangent()).unwrap(), 0.0);
}

#[test]
fn spd_inner_at_identity() {
    let m = Manifold::spd(2).unwrap();
    let p = Point::new(m, Mat::identity(2, 2)).unwrap();
    let v = p.tangent(Mat::identity(2, 2)).unwrap();
    assert!((inner(&v, &v).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn inner_rejects_mismatched_bases() {
    let m = unit_sphere();
    let p = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let q = Point::from_slice(m, &[0.0, 1.0, 0.0]).unwrap();
    let v = p.tangent(col(&[0.0, 0.0, 1.0])).unwrap();
    let w = q.tangent(col(&[0.0, 0.0, 1.0])).unwrap();
    assert!(matches!(
        inner(&v, &w),
        Err(GeoError::BasepointMismatch { .. })
    ));
}

#[test]
fn sphere_quarter_circle() {
    let m = unit_sphere();
    let p = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let v = p.tangent(col(&[0.0, FRAC_PI_2, 0.0])).unwrap();
    let q = exp_map(&p, &v).unwrap();
    assert!((q.coords() - col(&[0.0, 1.0, 0.0])).norm() < 1e-15);
    let back = log_map(&p, &q).unwrap();
    assert!((back.coords() - v.coords()).norm() < 1e-15);
    assert_eq!(exp_map(&p, &p.zero_tangent()).unwrap(), p);
    assert!(log_map(&p, &p).unwrap().coords().norm() == 0.0);
}

#[test]
fn sphere_exp_guard_and_antipode() {
    let m = unit_sphere();
    let p = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let v = p.tangent(col(&[0.0, PI, 0.0])).unwrap();
    assert!(matches!(
        exp_map(&p, &v),
        Err(GeoError::InjectivityRadiusExceeded { .. })
    ));
    let antipode = Point::from_slice(m, &[-1.0, 0.0, 0.0]).unwrap();
    assert_eq!(log_map(&p, &antipode), Err(GeoError::AtCutLocus));
    assert!((dist(&p, &antipode) - PI).abs() < 1e-15);
}

#[test]
fn spd_exp_of_diagonal() {
    let m = Manifold::spd(2).unwrap();
    let p = Point::new(m, Mat::identity(2, 2)).unwrap();
    let (a, b) = (0.4, -1.3);
    let v = p
        .tangent(Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b])))
        .unwrap();
    let q = exp_map(&p, &v).unwrap();
    assert!((q.coords()[(0, 0)] - a.exp()).abs() < 1e-14);
    assert!((q.coords()[(1, 1)] - b.exp()).abs() < 1e-14);
    assert!(q.coords()[(0, 1)].abs() < 1e-15);
}

#[test]
fn so3_log_of_z_rotation() {
    let m = Manifold::so3();
    let p = Point::new(m, Mat::identity(3, 3)).unwrap();
    for &theta in &[0.1, 1.0, 2.5, 3.1] {
        let q = Point::new(m, rotation([0.0, 0.0, 1.0], theta)).unwrap();
        let v = log_map(&p, &q).unwrap();
        assert!((v.coords() - hat([0.0, 0.0, theta])).norm() < 1e-12);
        assert!((dist(&p, &q) - SQRT_2 * theta).abs() < 1e-12);
        assert!((v.norm() - dist(&p, &q)).abs() < 1e-12);
        assert!((exp_map(&p, &v).unwrap().coords() - q.coords()).norm() < 1e-12);
    }
    let half_turn = Point::new(m, rotation([0.0, 0.0, 1.0], PI)).unwrap();
    assert_eq!(log_map(&p, &half_turn), Err(GeoError::AtCutLocus));
}

#[test]
fn spd_scalar_distance() {
    let m = Manifold::spd(1).unwrap();
    let p = Point::new(m, Mat::from_element(1, 1, 1.0)).unwrap();
    let q = Point::new(m, Mat::from_element(1, 1, 2f64.exp())).unwrap();
    assert!((dist(&p, &q) - 2.0).abs() < 1e-14);
    assert_eq!(dist(&p, &p), 0.0);
}

#[test]
fn sphere_transport_off_plane_vector_is_fixed() {
    let m = unit_sphere();
    let p = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let q = Point::from_slice(m, &[0.0, 1.0, 0.0]).unwrap();
    let v = p.tangent(col(&[0.0, 0.0, 1.0])).unwrap();
    let moved = parallel_transport(&v, &q).unwrap();
    assert!((moved.coords() - col(&[0.0, 0.0, 1.0])).norm() < 1e-15);
    // the in-plane direction turns with the geodesic
    let u = p.tangent(col(&[0.0, 1.0, 0.0])).unwrap();
    let turned = parallel_transport(&u, &q).unwrap();
    assert!((turned.coords() - col(&[-1.0, 0.0, 0.0])).norm() < 1e-15);
    assert_eq!(parallel_transport(&v, &p).unwrap(), v);
}

#[test]
fn sphere_curvature_example() {
    let m = unit_sphere();
    let p = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let x = p.tangent(col(&[0.0, 1.0, 0.0])).unwrap();
    let y = p.tangent(col(&[0.0, 0.0, 1.0])).unwrap();
    let r = curvature(&p, &x, &y, &x).unwrap();
    assert!((r.coords() - col(&[0.0, 0.0, -1.0])).norm() < 1e-15);
    let rxx = curvature(&p, &x, &x, &y).unwrap();
    assert_eq!(rxx.coords().norm(), 0.0);
}

#[test]
fn euclidean_is_flat() {
    let m = Manifold::euclidean(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = m.random_point(&mut rng, 1.0);
    let (x, y, z) = (
        m.random_tangent(&mut rng, &p, 1.0),
        m.random_tangent(&mut rng, &p, 1.0),
        m.random_tangent(&mut rng, &p, 1.0),
    );
    assert_eq!(m.curvature(&p, &x, &y, &z).norm(), 0.0);
}

#[test]
fn gradient_examples() {
    let m = unit_sphere();
    let q = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let target = Point::from_slice(m, &[0.0, 1.0, 0.0]).unwrap();
    let g = grad_half_sq_dist(&q, &target).unwrap();
    assert!((g.coords() - col(&[0.0, -FRAC_PI_2, 0.0])).norm() < 1e-15);
    assert_eq!(grad_half_sq_dist(&q, &q).unwrap().coords().norm(), 0.0);

    let e = Manifold::euclidean(2).unwrap();
    let a = Point::from_slice(e, &[1.0, 2.0]).unwrap();
    let b = Point::from_slice(e, &[-0.5, 4.0]).unwrap();
    let g = grad_half_sq_dist(&a, &b).unwrap();
    assert!((g.coords() - (a.coords() - b.coords())).norm() < 1e-15);
}

#[test]
fn hessian_examples() {
    let m = unit_sphere();
    let q = Point::from_slice(m, &[1.0, 0.0, 0.0]).unwrap();
    let v = q.tangent(col(&[0.0, 0.0, 1.0])).unwrap();
    assert!((hess_half_sq_dist(&q, &q, &v, &v).unwrap().value - 1.0).abs() < 1e-15);

    // d(q, target) = 1 along the equator; v is orthogonal to the radial direction
    let target = Point::from_slice(m, &[1f64.cos(), 1f64.sin(), 0.0]).unwrap();
    let rep = hess_half_sq_dist(&q, &target, &v, &v).unwrap();
    assert!((rep.value - 1.0 / 1f64.tan()).abs() < 1e-12);
    assert!((rep.value - 0.6421).abs() < 1e-4);
    let lap = laplacian_half_sq_dist(&q, &target).unwrap();
    assert!((lap - (1.0 + 1.0 / 1f64.tan())).abs() < 1e-12);
    assert!((laplacian_half_sq_dist(&q, &q).unwrap() - 2.0).abs() < 1e-15);

    let e = Manifold::euclidean(4).unwrap();
    let a = Point::from_slice(e, &[1.0, 2.0, 0.0, 0.0]).unwrap();
    let b = Point::from_slice(e, &[0.0, 0.0, 3.0, 0.0]).unwrap();
    let u = a.tangent(col(&[0.0, 1.0, 0.0, 0.0])).unwrap();
    assert_eq!(hess_half_sq_dist(&a, &b, &u, &u).unwrap().value, 1.0);
    assert!((laplacian_half_sq_dist(&a, &b).unwrap() - 4.0).abs() < 1e-15);
}

#[test]
fn typed_constructors_validate() {
    let m = unit_sphere();
    assert!(matches!(
        Point::from_slice(m, &[1.0, 1.0, 0.0]),
        Err(GeoError::ConstraintViolation(_))
    ));
    assert!(Point::projected(m, &col(&[0.0, 0.0, 0.0])).is_err());
    let p = Point::projected(m, &col(&[2.0, 0.0, 0.0])).unwrap();
    assert!(matches!(
        p.tangent(col(&[1.0, 0.0, 0.0])),
        Err(GeoError::NotTangent(_))
    ));
    let spd = Manifold::spd(2).unwrap();
    let bad = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(Point::new(spd, bad).is_err());
    assert!(matches!(
        Point::new(Manifold::so3(), Mat::identity(2, 2)),
        Err(GeoError::ShapeMismatch { .. })
    ));
}

#[test]
fn tangent_bases_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in all_manifolds() {
        let p = m.random_point(&mut rng, 1.0);
        let basis = m.tangent_basis(&p);
        assert_eq!(basis.len(), m.dim());
        for (i, a) in basis.iter().enumerate() {
            assert!(m.tangency_residual(&p, a) < 1e-12);
            for (j, b) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((m.inner(&p, a, b) - expected).abs() < 1e-10, "{}", m.name());
            }
        }
    }
}

/// Random tangent length within 0.9 of the injectivity guard.
fn draw_length(m: &Manifold, u: f64) -> f64 {
    let guard = m.injectivity_guard();
    if guard.is_finite() {
        0.9 * guard * u
    } else {
        2.0 * u
    }
}

#[test]
fn exp_log_roundtrip_100_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for m in all_manifolds() {
        for _ in 0..100 {
            let p = m.random_point(&mut rng, 1.0);
            let len = draw_length(&m, rand::Rng::random::<f64>(&mut rng));
            let v = m.random_tangent(&mut rng, &p, len);
            let q = m.exp(&p, &v).unwrap();
            assert!(m.constraint_residual(&q) < 1e-9);
            assert!((m.dist(&p, &q) - len).abs() < 1e-8, "{}: {len}", m.name());
            let back = m.log(&p, &q).unwrap();
            assert!(
                m.norm(&p, &(&back - &v)) < 1e-8,
                "{}: len {len}, err {}",
                m.name(),
                m.norm(&p, &(&back - &v))
            );
        }
    }
}

#[test]
fn dist_is_a_symmetric_premetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in all_manifolds() {
        for _ in 0..20 {
            let p = m.random_point(&mut rng, 1.0);
            let q = m.random_point(&mut rng, 1.0);
            let (a, b) = (m.dist(&p, &q), m.dist(&q, &p));
            assert!(a >= 0.0);
            assert!((a - b).abs() < 1e-9 * (1.0 + a), "{}", m.name());
            assert!(m.dist(&p, &p) < 1e-7);
        }
    }
}

#[test]
fn sphere_sectional_curvature_is_inverse_radius_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for &r in &[0.5, 1.0, 3.0] {
        let m = Manifold::sphere(3, r).unwrap();
        for _ in 0..20 {
            let p = m.random_point(&mut rng, 1.0);
            let frame = m.orthonormalize(
                &p,
                &[
                    m.random_tangent(&mut rng, &p, 1.0),
                    m.random_tangent(&mut rng, &p, 1.0),
                ],
            );
            let (x, y) = (&frame[0], &frame[1]);
            let k = m.inner(&p, &m.curvature(&p, x, y, y), x);
            assert!((k - 1.0 / (r * r)).abs() < 1e-8);
        }
    }
}

#[test]
fn curvature_signs_match_comparison_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let so3 = Manifold::so3();
    let spd = Manifold::spd(3).unwrap();
    for _ in 0..20 {
        let p = so3.random_point(&mut rng, 2.0);
        let x = so3.random_tangent(&mut rng, &p, 1.0);
        let y = so3.random_tangent(&mut rng, &p, 1.0);
        let k = so3.inner(&p, &so3.curvature(&p, &x, &y, &y), &x);
        let area2 = so3.inner(&p, &x, &x) * so3.inner(&p, &y, &y) - so3.inner(&p, &x, &y).powi(2);
        assert!(k >= -1e-12 && k <= 0.125 * area2 + 1e-12);

        let p = spd.random_point(&mut rng, 1.0);
        let x = spd.random_tangent(&mut rng, &p, 1.0);
        let y = spd.random_tangent(&mut rng, &p, 1.0);
        assert!(spd.inner(&p, &spd.curvature(&p, &x, &y, &y), &x) <= 1e-12);
    }
}

#[test]
fn transport_zero_length_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in all_manifolds() {
        let p = m.random_point(&mut rng, 1.0);
        let v = m.random_tangent(&mut rng, &p, 1.0);
        assert!((m.transport(&p, &p, &v).unwrap() - &v).norm() < 1e-12);
    }
}

#[test]
fn hessian_lower_bounds_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sphere = Manifold::sphere(2, 2.0).unwrap();
    let spd = Manifold::spd(3).unwrap();
    for _ in 0..50 {
        let q = sphere.random_point(&mut rng, 1.0);
        let target = sphere
            .exp(&q, &sphere.random_tangent(&mut rng, &q, 2.5))
            .unwrap();
        let d = sphere.dist(&q, &target);
        let bound = x_cot_x(d / 2.0);
        let v = sphere.random_tangent(&mut rng, &q, 1.0);
        let h = sphere.hess_half_sq_dist(&q, &target, &v, &v).unwrap();
        assert!(h >= bound - 1e-6);

        let q = spd.random_point(&mut rng, 1.0);
        let target = spd.random_point(&mut rng, 2.0);
        let v = spd.random_tangent(&mut rng, &q, 1.0);
        let h = spd.hess_half_sq_dist(&q, &target, &v, &v).unwrap();
        assert!(h >= spd.inner(&q, &v, &v) - 1e-6);
    }
}

#[test]
fn hessian_report_bounds() {
    let m = Manifold::spd(2).unwrap();
    let q = Point::new(m, Mat::identity(2, 2)).unwrap();
    let target = Point::new(m, Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0])).unwrap();
    let v = q
        .tangent(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
        .unwrap();
    let rep = hess_half_sq_dist(&q, &target, &v, &v).unwrap();
    let lower = rep.lower_bound.unwrap();
    assert!(rep.value >= lower);
    assert!(rep.upper_bound.is_none());
}

proptest! {
    #[test]
    fn transport_is_an_isometry(seed in 0u64..10_000, which in 0usize..6) {
        let m = all_manifolds()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.random_point(&mut rng, 1.0);
        let len = draw_length(&m, 0.95);
        let q = m.exp(&p, &m.random_tangent(&mut rng, &p, len)).unwrap();
        let v = m.random_tangent(&mut rng, &p, 1.0);
        let w = m.random_tangent(&mut rng, &p, 0.7);
        let (pv, pw) = (m.transport(&p, &q, &v).unwrap(), m.transport(&p, &q, &w).unwrap());
        prop_assert!(m.tangency_residual(&q, &pv) < 1e-9);
        prop_assert!((m.inner(&q, &pv, &pw) - m.inner(&p, &v, &w)).abs() < 1e-9);
    }

    #[test]
    fn curvature_symmetries(seed in 0u64..10_000, which in 0usize..6) {
        let m = all_manifolds()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.random_point(&mut rng, 1.0);
        let x = m.random_tangent(&mut rng, &p, 1.0);
        let y = m.random_tangent(&mut rng, &p, 1.0);
        let z = m.random_tangent(&mut rng, &p, 1.0);
        let rxy = m.curvature(&p, &x, &y, &z);
        let ryx = m.curvature(&p, &y, &x, &z);
        prop_assert!((&rxy + &ryx).norm() < 1e-9);
        let bianchi = &rxy + m.curvature(&p, &y, &z, &x) + m.curvature(&p, &z, &x, &y);
        prop_assert!(bianchi.norm() < 1e-9);
    }
}
