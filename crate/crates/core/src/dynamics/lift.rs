use nalgebra::DMatrix;

use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::{Point, Tangent};

use super::decay::{fit_decay, DecayFit};
use super::integrate::{Scheme, Trajectory};
use super::variation::{parallel_frame, propagate_variation_fd, propagate_variation_fd_tb};

/// Growth of the complete lift along a base trajectory.
#[derive(Debug, Clone)]
pub struct LiftAnalysis {
    pub times: Vec<f64>,
    /// Largest singular value of the propagated frame in parallel coordinates.
    pub growth: Vec<f64>,
    pub fit: DecayFit,
}

fn start_vectors(base: &Trajectory) -> Result<(Point, Vec<Mat>)> {
    let m = base.manifold;
    let p0 = Point::new(m, base.points[0].clone())?;
    let basis = m.tangent_basis(&base.points[0]);
    Ok((p0, basis))
}

fn analyse(times: Vec<f64>, columns: Vec<Vec<Vec<f64>>>, window_frac: f64) -> Result<LiftAnalysis> {
    let rows = columns[0][0].len();
    let growth: Vec<f64> = (0..times.len())
        .map(|i| {
            let mat = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][i][r]);
            mat.singular_values().max()
        })
        .collect();
    let fit = fit_decay(&times, &growth, window_frac)?;
    Ok(LiftAnalysis { times, growth, fit })
}

/// Propagate every vector of an orthonormal basis at the start of a
/// first-order trajectory through the finite-difference lift.
pub fn lift_frame_analysis<F>(
    f: F,
    base: &Trajectory,
    eps: f64,
    scheme: Scheme,
    window_frac: f64,
) -> Result<LiftAnalysis>
where
    F: Fn(f64, &Mat) -> Result<Mat>,
{
    if base.velocities.is_some() {
        return Err(GeoError::DegenerateInput(
            "use lift_frame_analysis_tb for second-order trajectories".into(),
        ));
    }
    let (p0, basis) = start_vectors(base)?;
    let frames = parallel_frame(base, None);
    let columns = basis
        .into_iter()
        .map(|e| {
            let track =
                propagate_variation_fd(&f, base, &Tangent::new(p0.clone(), e)?, eps, scheme)?;
            Ok(track.frame_coords(base, &frames))
        })
        .collect::<Result<Vec<_>>>()?;
    analyse(base.times.clone(), columns, window_frac)
}

/// Tangent-bundle version: the lift acts on `(q′, Dq′/dt)` and the frame
/// matrix is `2n × 2n`.
pub fn lift_frame_analysis_tb<G>(
    g: G,
    base: &Trajectory,
    eps: f64,
    scheme: Scheme,
    window_frac: f64,
) -> Result<LiftAnalysis>
where
    G: Fn(f64, &Mat, &Mat) -> Result<(Mat, Mat)>,
{
    let (p0, basis) = start_vectors(base)?;
    let frames = parallel_frame(base, None);
    let zero = p0.zero_tangent();
    let mut columns = Vec::with_capacity(2 * basis.len());
    for e in &basis {
        let e = Tangent::new(p0.clone(), e.clone())?;
        for (v, w) in [(&e, &zero), (&zero, &e)] {
            let track = propagate_variation_fd_tb(&g, base, v, w, eps, scheme)?;
            columns.push(track.frame_coords(base, &frames));
        }
    }
    analyse(base.times.clone(), columns, window_frac)
}
