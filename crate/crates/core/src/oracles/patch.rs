use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::Manifold;

use super::{fd_covariant_derivative, fd_velocity, OracleConfig};

/// A two-parameter family `(s, t) ↦ q(s, t)` sampled on a rectangular grid.
/// `points[i][j]` sits at `(s0 + i·hs, t0 + j·ht)`.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    manifold: Manifold,
    points: Vec<Vec<Mat>>,
    hs: f64,
    ht: f64,
}

impl SurfacePatch {
    pub fn new(manifold: Manifold, points: Vec<Vec<Mat>>, hs: f64, ht: f64) -> Result<Self> {
        if !(hs > 0.0 && ht > 0.0) {
            return Err(GeoError::DegenerateInput(
                "grid steps must be positive".into(),
            ));
        }
        let cols = points.first().map_or(0, Vec::len);
        if points.len() < 3 || cols < 3 || points.iter().any(|row| row.len() != cols) {
            return Err(GeoError::DegenerateInput(
                "patch grid must be rectangular with at least 3×3 samples".into(),
            ));
        }
        for p in points.iter().flatten() {
            manifold.check_shape(p)?;
            let residual = manifold.constraint_residual(p);
            if residual > 1e-9 {
                return Err(GeoError::ConstraintViolation(format!(
                    "patch sample off the manifold by {residual:.3e}"
                )));
            }
        }
        Ok(SurfacePatch {
            manifold,
            points,
            hs,
            ht,
        })
    }

    /// Sample `map` on `ns × nt` points starting at `(s0, t0)`.
    pub fn sample(
        manifold: Manifold,
        map: impl Fn(f64, f64) -> Mat,
        (s0, t0): (f64, f64),
        (hs, ht): (f64, f64),
        (ns, nt): (usize, usize),
    ) -> Result<Self> {
        let points = (0..ns)
            .map(|i| {
                (0..nt)
                    .map(|j| map(s0 + i as f64 * hs, t0 + j as f64 * ht))
                    .collect()
            })
            .collect();
        Self::new(manifold, points, hs, ht)
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.points.len(), self.points[0].len())
    }

    pub fn point(&self, i: usize, j: usize) -> &Mat {
        &self.points[i][j]
    }

    pub fn steps(&self) -> (f64, f64) {
        (self.hs, self.ht)
    }

    fn s_line(&self, j: usize) -> Vec<Mat> {
        self.points.iter().map(|row| row[j].clone()).collect()
    }

    /// `∂q/∂s` at every grid point.
    pub fn ds(&self, cfg: &OracleConfig) -> Result<Vec<Vec<Mat>>> {
        let (ns, nt) = self.shape();
        let columns = (0..nt)
            .map(|j| fd_velocity(&self.manifold, &self.s_line(j), self.hs, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(transpose(columns, ns))
    }

    /// `∂q/∂t` at every grid point.
    pub fn dt(&self, cfg: &OracleConfig) -> Result<Vec<Vec<Mat>>> {
        self.points
            .iter()
            .map(|row| fd_velocity(&self.manifold, row, self.ht, cfg))
            .collect()
    }

    /// Covariant derivative along the `s` lines of a field on the patch.
    pub fn cov_s(&self, field: &[Vec<Mat>], cfg: &OracleConfig) -> Result<Vec<Vec<Mat>>> {
        let (ns, nt) = self.shape();
        let columns = (0..nt)
            .map(|j| {
                let f: Vec<Mat> = field.iter().map(|row| row[j].clone()).collect();
                fd_covariant_derivative(&self.manifold, &self.s_line(j), &f, self.hs, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(transpose(columns, ns))
    }

    /// Covariant derivative along the `t` lines of a field on the patch.
    pub fn cov_t(&self, field: &[Vec<Mat>], cfg: &OracleConfig) -> Result<Vec<Vec<Mat>>> {
        self.points
            .iter()
            .zip(field)
            .map(|(row, f)| fd_covariant_derivative(&self.manifold, row, f, self.ht, cfg))
            .collect()
    }
}

fn transpose(columns: Vec<Vec<Mat>>, rows: usize) -> Vec<Vec<Mat>> {
    let mut out: Vec<Vec<Mat>> = (0..rows)
        .map(|_| Vec::with_capacity(columns.len()))
        .collect();
    for column in columns {
        for (i, value) in column.into_iter().enumerate() {
            out[i].push(value);
        }
    }
    out
}

/// `D_s D_t X − D_t D_s X` at every grid point; equals `R(∂_s q, ∂_t q) X`.
pub fn fd_curvature(
    patch: &SurfacePatch,
    field: &[Vec<Mat>],
    cfg: &OracleConfig,
) -> Result<Vec<Vec<Mat>>> {
    let (ns, nt) = patch.shape();
    if field.len() != ns || field.iter().any(|row| row.len() != nt) {
        return Err(GeoError::DegenerateInput(
            "field grid does not match the patch".into(),
        ));
    }
    let dsdt = patch.cov_s(&patch.cov_t(field, cfg)?, cfg)?;
    let dtds = patch.cov_t(&patch.cov_s(field, cfg)?, cfg)?;
    Ok(dsdt
        .into_iter()
        .zip(dtds)
        .map(|(a, b)| a.into_iter().zip(b).map(|(x, y)| x - y).collect())
        .collect())
}

/// Largest `|D_s ∂_t q − D_t ∂_s q|` over the patch.
pub fn check_swap_cov(patch: &SurfacePatch, cfg: &OracleConfig) -> Result<f64> {
    let ds_dt = patch.cov_s(&patch.dt(cfg)?, cfg)?;
    let dt_ds = patch.cov_t(&patch.ds(cfg)?, cfg)?;
    let (ns, nt) = patch.shape();
    let mut worst = 0.0f64;
    for i in 0..ns {
        for j in 0..nt {
            let p = patch.point(i, j);
            worst = worst.max(patch.manifold().norm(p, &(&ds_dt[i][j] - &dt_ds[i][j])));
        }
    }
    Ok(worst)
}
