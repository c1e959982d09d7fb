use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::Mat;
use crate::manifold::Manifold;

use super::{
    fd_covariant_derivative, fd_curvature, fd_series, fd_velocity, OracleConfig, SurfacePatch,
};

/// Worst absolute disagreement between a closed form and its oracle, over
/// all sampled configurations.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct KernelAgreement {
    pub configurations: usize,
    /// Initial velocity and covariant acceleration of `t ↦ exp(p, t v)`.
    pub exp: f64,
    /// `log_q p` against the differenced gradient of `½ d(·, p)²`.
    pub log: f64,
    /// Covariant derivative of a transported field along its geodesic.
    pub transport: f64,
    /// Closed-form `R(∂_s q, ∂_t q) X` against mixed covariant differences.
    pub curvature: f64,
    /// `Hess F (v, v)` against a second difference along a geodesic.
    pub hessian: f64,
}

const GRID_STEP: f64 = 1e-3;
const HALF_WIDTH: usize = 4;

fn grid() -> impl Iterator<Item = f64> {
    (0..=2 * HALF_WIDTH).map(|k| (k as f64 - HALF_WIDTH as f64) * GRID_STEP)
}

/// Compare every closed form of `m` with its finite-difference oracle at
/// `configurations` random configurations drawn from `seed`.
pub fn kernel_agreement(m: &Manifold, configurations: usize, seed: u64) -> Result<KernelAgreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = OracleConfig::default();
    let guard = m.injectivity_guard().min(4.0);
    let mut out = KernelAgreement {
        configurations,
        ..Default::default()
    };

    for _ in 0..configurations {
        let p = m.random_point(&mut rng, 1.0);
        let speed = rng.random_range(0.2..1.0);
        let v = m.random_tangent(&mut rng, &p, speed);

        // geodesic through p
        let geodesic: Vec<Mat> = grid()
            .map(|t| m.exp(&p, &(&v * t)))
            .collect::<Result<_>>()?;
        let velocity = fd_velocity(m, &geodesic, GRID_STEP, &cfg)?;
        let accel = fd_covariant_derivative(m, &geodesic, &velocity, GRID_STEP, &cfg)?;
        out.exp = out.exp.max(m.norm(&p, &(&velocity[HALF_WIDTH] - &v)));
        // nested differences are only clean away from the one-sided ends
        for k in 2..accel.len() - 2 {
            out.exp = out.exp.max(m.norm(&geodesic[k], &accel[k]));
        }

        // transported field along a longer geodesic
        let w = m.random_tangent(&mut rng, &p, 1.0);
        let far = rng.random_range(0.1..0.4) * guard / m.norm(&p, &v);
        let path: Vec<Mat> = grid()
            .map(|t| m.exp(&p, &(&v * (far + t))))
            .collect::<Result<_>>()?;
        let field: Vec<Mat> = path
            .iter()
            .map(|q| m.transport(&p, q, &w))
            .collect::<Result<_>>()?;
        for (q, d) in path
            .iter()
            .zip(fd_covariant_derivative(m, &path, &field, GRID_STEP, &cfg)?)
        {
            out.transport = out.transport.max(m.norm(q, &d));
        }

        // gradient of half squared distance
        let reach = rng.random_range(0.1..0.5) * guard;
        let target = m.exp(&p, &m.random_tangent(&mut rng, &p, reach))?;
        let grad = -m.log(&p, &target)?;
        let half_sq = |q: &Mat| 0.5 * m.dist(q, &target).powi(2);
        for e in m.tangent_basis(&p) {
            let line: Vec<Mat> = grid().map(|s| m.project_point(&(&p + &e * s))).collect();
            let values: Vec<Mat> = line
                .iter()
                .map(|q| Mat::from_element(1, 1, half_sq(q)))
                .collect();
            let slope = fd_series(&values, GRID_STEP, true)?[HALF_WIDTH][(0, 0)];
            out.log = out.log.max((slope - m.inner(&p, &grad, &e)).abs());
        }

        // Hessian along the geodesic through p with velocity v
        let f = |t: f64| -> Result<f64> { Ok(half_sq(&m.exp(&p, &(&v * t))?)) };
        let second = |h: f64| -> Result<f64> { Ok((f(h)? - 2.0 * f(0.0)? + f(-h)?) / (h * h)) };
        let fd_hess = (16.0 * second(GRID_STEP)? - second(2.0 * GRID_STEP)?) / 15.0;
        out.hessian = out
            .hessian
            .max((fd_hess - m.hess_half_sq_dist(&p, &target, &v, &v)?).abs());

        // curvature on the exponential patch (s, t) ↦ exp(p, s x + t y)
        let x = m.random_tangent(&mut rng, &p, 1.0);
        let y = m.random_tangent(&mut rng, &p, 1.0);
        let z = m.random_tangent(&mut rng, &p, 1.0);
        let n = 2 * HALF_WIDTH + 1;
        let lo = -(HALF_WIDTH as f64) * GRID_STEP;
        let patch = SurfacePatch::sample(
            *m,
            |s, t| {
                m.exp(&p, &(&x * s + &y * t))
                    .expect("patch stays inside the guard")
            },
            (lo, lo),
            (GRID_STEP, GRID_STEP),
            (n, n),
        )?;
        let (ns, nt) = patch.shape();
        let field: Vec<Vec<Mat>> = (0..ns)
            .map(|i| {
                (0..nt)
                    .map(|j| m.project_tangent(patch.point(i, j), &z))
                    .collect()
            })
            .collect();
        let fd = fd_curvature(&patch, &field, &cfg)?;
        let c = HALF_WIDTH;
        let closed = m.curvature(&p, &x, &y, &field[c][c]);
        out.curvature = out.curvature.max(m.norm(&p, &(&fd[c][c] - closed)));
    }
    Ok(out)
}
