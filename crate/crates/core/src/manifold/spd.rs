//! Symmetric positive definite matrices with the affine-invariant metric
//! `⟨X, Y⟩_P = tr(X P⁻¹ Y P⁻¹)`.
//!
//! Every closed form is computed in the whitened frame `P^{-1/2} · P^{-1/2}`
//! where the basepoint becomes the identity.

use crate::linalg::{self, commutator, sym_part, Mat};

use super::x_coth_x;

/// Eigenvalue floor used when projecting onto the cone.
const EIGEN_FLOOR: f64 = 1e-12;

pub(super) fn constraint_residual(p: &Mat) -> f64 {
    let asym = (p - p.transpose()).norm();
    let min_eig = linalg::min_eigenvalue(p);
    if min_eig <= 0.0 {
        return f64::INFINITY;
    }
    asym
}

pub(super) fn project_point(x: &Mat) -> Mat {
    linalg::sym_fn(x, |l| l.max(EIGEN_FLOOR))
}

struct Whitening {
    half: Mat,
    inv_half: Mat,
}

impl Whitening {
    fn at(p: &Mat) -> Self {
        Whitening {
            half: linalg::sym_sqrt(p),
            inv_half: linalg::sym_inv_sqrt(p),
        }
    }

    fn whiten(&self, a: &Mat) -> Mat {
        sym_part(&(&self.inv_half * a * &self.inv_half))
    }

    fn color(&self, a: &Mat) -> Mat {
        sym_part(&(&self.half * a * &self.half))
    }
}

pub(super) fn inner(p: &Mat, u: &Mat, v: &Mat) -> f64 {
    let pinv = linalg::sym_inv(p);
    (u * &pinv * v * &pinv).trace()
}

pub(super) fn exp(p: &Mat, v: &Mat) -> Mat {
    let w = Whitening::at(p);
    w.color(&linalg::sym_exp(&w.whiten(v)))
}

pub(super) fn log(p: &Mat, q: &Mat) -> Mat {
    let w = Whitening::at(p);
    w.color(&linalg::sym_log(&w.whiten(q)))
}

pub(super) fn dist(p: &Mat, q: &Mat) -> f64 {
    let w = Whitening::at(p);
    linalg::sym_log(&w.whiten(q)).norm()
}

pub(super) fn transport(p: &Mat, q: &Mat, v: &Mat) -> Mat {
    let w = Whitening::at(p);
    let e = &w.half * linalg::sym_sqrt(&w.whiten(q)) * &w.inv_half;
    sym_part(&(&e * v * e.transpose()))
}

pub(super) fn curvature(p: &Mat, x: &Mat, y: &Mat, z: &Mat) -> Mat {
    let w = Whitening::at(p);
    let (a, b, c) = (w.whiten(x), w.whiten(y), w.whiten(z));
    w.color(&(commutator(&commutator(&a, &b), &c) * (-0.25)))
}

pub(super) fn connection_term(p: &Mat, u: &Mat, v: &Mat) -> Mat {
    let pinv = linalg::sym_inv(p);
    sym_part(&((u * &pinv * v + v * &pinv * u) * 0.5))
}

/// In the whitened frame at `q`, with `log = U diag(μ) Uᵀ`, the Jacobi
/// operator along the geodesic to the target is diagonal on the basis
/// `U E_ij Uᵀ` with eigenvalue `−¼(μ_i − μ_j)²/d²`; the Hessian of `½d²`
/// acts there as `x coth x`, `x = |μ_i − μ_j| / 2`.
pub(super) fn hess_half_sq_dist(q: &Mat, target: &Mat, v: &Mat, w: &Mat) -> f64 {
    let wh = Whitening::at(q);
    let toward = linalg::sym_log(&wh.whiten(target));
    let (mu, u) = linalg::sym_eigen(&toward);
    let vt = u.transpose() * wh.whiten(v) * &u;
    let wt = u.transpose() * wh.whiten(w) * &u;
    let n = mu.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let h = x_coth_x(0.5 * (mu[i] - mu[j]).abs());
            acc += h * vt[(i, j)] * wt[(i, j)];
        }
    }
    acc
}

pub(super) fn basis(n: usize, p: &Mat) -> Vec<Mat> {
    let half = linalg::sym_sqrt(p);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut e = Mat::zeros(n, n);
            if i == j {
                e[(i, i)] = 1.0;
            } else {
                e[(i, j)] = s;
                e[(j, i)] = s;
            }
            out.push(sym_part(&(&half * e * &half)));
        }
    }
    out
}
