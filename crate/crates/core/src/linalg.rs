//! Dense matrix helpers shared by the manifold kernels.
//!
//! Symmetric matrix functions go through a symmetric eigendecomposition of
//! the symmetrized input; rotations use Rodrigues' formula and a log that
//! stays accurate up to (but excluding) angle π.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Mat = DMatrix<f64>;

pub fn frob_inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

pub fn sym_part(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn skew_part(a: &Mat) -> Mat {
    (a - a.transpose()) * 0.5
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// Eigendecomposition of the symmetric part of `a`.
pub fn sym_eigen(a: &Mat) -> (DVector<f64>, Mat) {
    let eig = SymmetricEigen::new(sym_part(a));
    (eig.eigenvalues, eig.eigenvectors)
}

/// Apply a scalar function to a symmetric matrix through its spectrum.
pub fn sym_fn(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = sym_eigen(a);
    let mapped = DVector::from_iterator(vals.len(), vals.iter().map(|&x| f(x)));
    let out = &vecs * DMatrix::from_diagonal(&mapped) * vecs.transpose();
    sym_part(&out)
}

pub fn sym_sqrt(a: &Mat) -> Mat {
    sym_fn(a, f64::sqrt)
}

pub fn sym_inv_sqrt(a: &Mat) -> Mat {
    sym_fn(a, |x| 1.0 / x.sqrt())
}

pub fn sym_inv(a: &Mat) -> Mat {
    sym_fn(a, |x| 1.0 / x)
}

pub fn sym_exp(a: &Mat) -> Mat {
    sym_fn(a, f64::exp)
}

pub fn sym_log(a: &Mat) -> Mat {
    sym_fn(a, f64::ln)
}

pub fn min_eigenvalue(a: &Mat) -> f64 {
    sym_eigen(a).0.min()
}

/// Skew-symmetric 3×3 matrix of `w`, so that `hat(w) x = w × x`.
pub fn hat(w: [f64; 3]) -> Mat {
    Mat::from_row_slice(
        3,
        3,
        &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0],
    )
}

/// Inverse of [`hat`] applied to the skew part of `m`.
pub fn vee(m: &Mat) -> [f64; 3] {
    [
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ]
}

fn norm3(w: [f64; 3]) -> f64 {
    (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
}

/// Matrix exponential of a 3×3 skew-symmetric matrix.
pub fn so3_exp(x: &Mat) -> Mat {
    let w = vee(x);
    let theta = norm3(w);
    let k = hat(w);
    let k2 = &k * &k;
    let (a, b) = if theta < 1e-6 {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Mat::identity(3, 3) + k * a + k2 * b
}

/// Rotation angle in [0, π] of a rotation matrix.
pub fn rotation_angle(r: &Mat) -> f64 {
    let c = 0.5 * (r.trace() - 1.0);
    let s = norm3(vee(r));
    s.atan2(c)
}

/// Principal logarithm of a rotation matrix with angle strictly below π.
/// Returns the skew generator and the angle.
pub fn so3_log(r: &Mat) -> (Mat, f64) {
    let theta = rotation_angle(r);
    let w = vee(r);
    if theta < 1e-6 {
        let t2 = theta * theta;
        let scale = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
        return (hat([w[0] * scale, w[1] * scale, w[2] * scale]), theta);
    }
    if theta < std::f64::consts::PI - 1e-2 {
        let scale = theta / theta.sin();
        return (hat([w[0] * scale, w[1] * scale, w[2] * scale]), theta);
    }
    // Near π the skew part vanishes; read the axis off the symmetric part.
    let c = theta.cos();
    let b = sym_part(r) - Mat::identity(3, 3) * c;
    let mut best = 0;
    for i in 1..3 {
        if b[(i, i)] > b[(best, best)] {
            best = i;
        }
    }
    let col = b.column(best).into_owned();
    let mut axis = [col[0], col[1], col[2]];
    let n = norm3(axis);
    for a in axis.iter_mut() {
        *a /= n;
    }
    let dot = axis[0] * w[0] + axis[1] * w[1] + axis[2] * w[2];
    if dot < 0.0 {
        for a in axis.iter_mut() {
            *a = -*a;
        }
    }
    (
        hat([axis[0] * theta, axis[1] * theta, axis[2] * theta]),
        theta,
    )
}

/// Nearest rotation (polar factor) of a 3×3 matrix.
pub fn polar_rotation(m: &Mat) -> Mat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut r = &u * &vt;
    if r.determinant() < 0.0 {
        let mut u2 = u.clone();
        let last = u2.ncols() - 1;
        u2.column_mut(last).neg_mut();
        r = u2 * vt;
    }
    r
}

/// Rotation about a coordinate-free axis by `angle`.
pub fn rotation(axis: [f64; 3], angle: f64) -> Mat {
    let n = norm3(axis);
    so3_exp(&hat([
        axis[0] / n * angle,
        axis[1] / n * angle,
        axis[2] / n * angle,
    ]))
}
