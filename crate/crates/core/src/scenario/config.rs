use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{Gains, Potential};
use crate::dynamics::{DEFAULT_EPS, DEFAULT_H};
use crate::error::{GeoError, Result};
use crate::linalg::Mat;
use crate::manifold::{Manifold, Point};

/// The experiments the runner knows how to wire up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    TrackingSphere,
    ObserverSpherePendulum,
    So3Filter,
    So3Tracking,
    KillingSpdContinuous,
    KillingSpdDiscrete,
    GradientFlowContraction,
    JacobiDemo,
    LiftEquivalence,
    VolumeContraction,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 10] = [
        ScenarioId::TrackingSphere,
        ScenarioId::ObserverSpherePendulum,
        ScenarioId::So3Filter,
        ScenarioId::So3Tracking,
        ScenarioId::KillingSpdContinuous,
        ScenarioId::KillingSpdDiscrete,
        ScenarioId::GradientFlowContraction,
        ScenarioId::JacobiDemo,
        ScenarioId::LiftEquivalence,
        ScenarioId::VolumeContraction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::TrackingSphere => "tracking_sphere",
            ScenarioId::ObserverSpherePendulum => "observer_sphere_pendulum",
            ScenarioId::So3Filter => "so3_filter",
            ScenarioId::So3Tracking => "so3_tracking",
            ScenarioId::KillingSpdContinuous => "killing_spd_continuous",
            ScenarioId::KillingSpdDiscrete => "killing_spd_discrete",
            ScenarioId::GradientFlowContraction => "gradient_flow_contraction",
            ScenarioId::JacobiDemo => "jacobi_demo",
            ScenarioId::LiftEquivalence => "lift_equivalence",
            ScenarioId::VolumeContraction => "volume_contraction",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Initial conditions and scenario geometry, as flat row-major coordinate
/// arrays. Each scenario reads the entries it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    /// Plant, reference or measured start point.
    pub q: Option<Vec<f64>>,
    /// Velocity at `q`.
    pub v: Option<Vec<f64>>,
    /// Estimator start; when absent it is drawn at distance `offset` from `q`.
    pub q_hat: Option<Vec<f64>>,
    /// Attractor or fixed target.
    pub target: Option<Vec<f64>>,
    /// Angular rate (3-vector on SO(3)) or skew generator (`n × n` on SPD).
    pub rate: Option<Vec<f64>>,
    /// Initial error or distance from the target.
    pub offset: Option<f64>,
    /// Initial separation of trajectory pairs.
    pub separation: Option<f64>,
    /// Number of random trajectories or pairs.
    pub count: Option<usize>,
}

/// One experiment, loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    /// Label used for output files; defaults to the scenario id.
    pub name: Option<String>,
    pub manifold: Manifold,
    #[serde(default)]
    pub gains: Gains,
    #[serde(default)]
    pub potential: Potential,
    #[serde(default)]
    pub initial: InitialConditions,
    pub t_span: [f64; 2],
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving `<name>.csv` and `<name>.json`.
    pub output: Option<PathBuf>,
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GeoError::ConfigInvalid(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeoError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
            .map_err(|e| GeoError::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GeoError::ConfigInvalid(e.to_string()))
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.scenario.to_string())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t_span[0], self.t_span[1])
    }

    pub(crate) fn require_point(&self, key: &str, values: &Option<Vec<f64>>) -> Result<Mat> {
        let values = values
            .as_ref()
            .ok_or_else(|| GeoError::ConfigInvalid(format!("initial.{key} is required")))?;
        let m = self.manifold;
        let (r, c) = m.ambient_shape();
        if values.len() != r * c {
            return Err(GeoError::ShapeMismatch {
                expected: (r, c),
                got: (values.len(), 1),
            });
        }
        Point::projected(m, &Mat::from_row_slice(r, c, values))
            .map(Point::into_coords)
            .map_err(|e| match e {
                GeoError::ConstraintViolation(msg) => {
                    GeoError::ConstraintViolation(format!("initial.{key}: {msg}"))
                }
                other => other,
            })
    }

    /// Tangent vector at `q` from `initial.v`, projected; zero when absent.
    pub(crate) fn velocity_at(&self, q: &Mat) -> Result<Mat> {
        let m = self.manifold;
        match &self.initial.v {
            None => Ok(m.zero_tangent()),
            Some(values) => {
                let (r, c) = m.ambient_shape();
                if values.len() != r * c {
                    return Err(GeoError::ShapeMismatch {
                        expected: (r, c),
                        got: (values.len(), 1),
                    });
                }
                Ok(m.project_tangent(q, &Mat::from_row_slice(r, c, values)))
            }
        }
    }

    pub(crate) fn positive(&self, key: &str, value: Option<f64>) -> Result<f64> {
        match value {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(GeoError::ConfigInvalid(format!(
                "initial.{key} must be positive, got {v}"
            ))),
            None => Err(GeoError::ConfigInvalid(format!(
                "initial.{key} is required"
            ))),
        }
    }

    pub(crate) fn count(&self) -> Result<usize> {
        match self.initial.count {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(GeoError::ConfigInvalid("initial.count must be ≥ 1".into())),
            None => Err(GeoError::ConfigInvalid("initial.count is required".into())),
        }
    }

    /// Skew-symmetric rate: a 3-vector on SO(3), an `n × n` array on SPD.
    pub(crate) fn rate_matrix(&self) -> Result<Mat> {
        let m = self.manifold;
        let n = match m {
            Manifold::So3 => 3,
            Manifold::Spd { n } => n,
            _ => {
                return Err(GeoError::ConfigInvalid(format!(
                    "initial.rate is not used on {}",
                    m.name()
                )))
            }
        };
        let Some(values) = &self.initial.rate else {
            return Ok(Mat::zeros(n, n));
        };
        let out = match (m, values.len()) {
            (Manifold::So3, 3) => crate::linalg::hat([values[0], values[1], values[2]]),
            (_, len) if len == n * n => Mat::from_row_slice(n, n, values),
            (_, len) => {
                return Err(GeoError::ShapeMismatch {
                    expected: (n, n),
                    got: (len, 1),
                });
            }
        };
        if (&out + out.transpose()).norm() > 1e-12 {
            return Err(GeoError::ConfigInvalid(
                "initial.rate must be skew-symmetric".into(),
            ));
        }
        Ok(out)
    }

    /// Every problem that would stop [`super::run`]; empty iff runnable.
    pub fn validate(&self) -> Vec<GeoError> {
        let mut out = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e);
            }
        };
        if let Err(e) = self.manifold.validated() {
            check(Err(e));
            return out;
        }
        check(self.check_manifold_kind());
        check(self.check_timing());
        check(self.potential.validate(&self.manifold));
        for gain in self.required_gains() {
            check(gain(&self.gains).map(|_| ()));
        }
        for (key, values) in self.required_points() {
            check(self.require_point(key, values).map(|_| ()));
        }
        if self.initial.v.is_some() {
            if let Ok(q) = self.require_point("q", &self.initial.q) {
                check(self.velocity_at(&q).map(|_| ()));
            }
        }
        check(self.check_scenario_specific());
        out
    }

    fn check_manifold_kind(&self) -> Result<()> {
        let m = self.manifold;
        let ok = match self.scenario {
            ScenarioId::So3Filter | ScenarioId::So3Tracking => matches!(m, Manifold::So3),
            ScenarioId::KillingSpdContinuous | ScenarioId::KillingSpdDiscrete => {
                matches!(m, Manifold::Spd { .. })
            }
            ScenarioId::TrackingSphere
            | ScenarioId::ObserverSpherePendulum
            | ScenarioId::JacobiDemo
            | ScenarioId::GradientFlowContraction
            | ScenarioId::LiftEquivalence
            | ScenarioId::VolumeContraction => matches!(m, Manifold::Sphere { .. }),
        };
        if !ok {
            return Err(GeoError::ConfigInvalid(format!(
                "scenario {} does not run on {}",
                self.scenario,
                m.name()
            )));
        }
        Ok(())
    }

    fn check_timing(&self) -> Result<()> {
        let (t0, t1) = self.span();
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(GeoError::ConfigInvalid(format!(
                "t_span [{t0}, {t1}] is empty"
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(GeoError::ConfigInvalid(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        let n = ((t1 - t0) / self.h).round();
        if n < 1.0 || (n * self.h - (t1 - t0)).abs() > 1e-9 * (t1 - t0) {
            return Err(GeoError::ConfigInvalid(format!(
                "h = {} does not divide t_span [{t0}, {t1}]",
                self.h
            )));
        }
        if !(1e-6..=1e-3).contains(&self.eps) {
            return Err(GeoError::ConfigInvalid(format!(
                "eps must lie in [1e-6, 1e-3], got {}",
                self.eps
            )));
        }
        Ok(())
    }

    fn required_gains(&self) -> Vec<fn(&Gains) -> Result<f64>> {
        match self.scenario {
            ScenarioId::TrackingSphere => vec![Gains::k1, Gains::k2],
            ScenarioId::ObserverSpherePendulum => vec![Gains::alpha, Gains::beta],
            ScenarioId::So3Filter
            | ScenarioId::So3Tracking
            | ScenarioId::KillingSpdContinuous
            | ScenarioId::KillingSpdDiscrete => vec![Gains::k],
            ScenarioId::GradientFlowContraction | ScenarioId::VolumeContraction => {
                vec![Gains::lambda_flow]
            }
            ScenarioId::LiftEquivalence => vec![Gains::k1, Gains::k2, Gains::lambda_flow],
            ScenarioId::JacobiDemo => vec![],
        }
    }

    fn required_points(&self) -> Vec<(&'static str, &Option<Vec<f64>>)> {
        let i = &self.initial;
        let mut out = vec![("q", &i.q)];
        match self.scenario {
            ScenarioId::GradientFlowContraction
            | ScenarioId::VolumeContraction
            | ScenarioId::LiftEquivalence => out.push(("target", &i.target)),
            _ => {}
        }
        if i.q_hat.is_some() {
            out.push(("q_hat", &i.q_hat));
        }
        if matches!(
            self.scenario,
            ScenarioId::GradientFlowContraction | ScenarioId::VolumeContraction
        ) {
            out.retain(|(key, _)| *key != "q");
        }
        out
    }

    fn check_scenario_specific(&self) -> Result<()> {
        let i = &self.initial;
        match self.scenario {
            ScenarioId::TrackingSphere | ScenarioId::ObserverSpherePendulum => {
                if i.q_hat.is_none() {
                    self.positive("offset", i.offset)?;
                }
            }
            ScenarioId::So3Filter | ScenarioId::So3Tracking => {
                self.rate_matrix()?;
                if i.q_hat.is_none() {
                    let offset = self.positive("offset", i.offset)?;
                    if offset >= std::f64::consts::PI {
                        return Err(GeoError::ConfigInvalid(format!(
                            "initial.offset {offset} must be below π"
                        )));
                    }
                }
            }
            ScenarioId::KillingSpdContinuous => {
                self.rate_matrix()?;
                self.require_point("q_hat", &i.q_hat)?;
            }
            ScenarioId::KillingSpdDiscrete => {
                self.rate_matrix()?;
                self.require_point("q_hat", &i.q_hat)?;
                let gain = self.gains.k()? * self.h;
                if gain >= 1.0 {
                    return Err(GeoError::GainOutOfRange(format!(
                        "k·Δt must lie in (0, 1), got {gain}"
                    )));
                }
            }
            ScenarioId::GradientFlowContraction => {
                self.positive("offset", i.offset)?;
                self.positive("separation", i.separation)?;
                self.count()?;
                let a = self.manifold.curvature_upper_bound();
                let offset = i.offset.unwrap_or(0.0);
                if a > 0.0 && offset * a.sqrt() >= std::f64::consts::FRAC_PI_2 {
                    return Err(GeoError::BeyondValidityRange {
                        distance: offset,
                        limit: std::f64::consts::FRAC_PI_2 / a.sqrt(),
                    });
                }
            }
            ScenarioId::VolumeContraction => {
                self.positive("offset", i.offset)?;
                self.count()?;
            }
            ScenarioId::LiftEquivalence => {
                self.positive("separation", i.separation)?;
                self.count()?;
            }
            ScenarioId::JacobiDemo => {}
        }
        Ok(())
    }
}
