use thiserror::Error;

/// Errors raised by the geometry kernels, oracles, integrators, control laws
/// and the scenario runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid manifold parameters: {0}")]
    InvalidManifold(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("point violates the manifold constraint: {0}")]
    ConstraintViolation(String),

    #[error("vector is not tangent at its basepoint: {0}")]
    NotTangent(String),

    #[error("tangent vectors are based at different points (gap {gap:.3e})")]
    BasepointMismatch { gap: f64 },

    #[error("tangent length {norm:.6} exceeds the injectivity guard {guard:.6}")]
    InjectivityRadiusExceeded { norm: f64, guard: f64 },

    #[error("target point is at or beyond the cut locus")]
    AtCutLocus,

    #[error("grid too coarse: consecutive samples {gap:.3e} apart exceed the guard {guard:.3e}")]
    GridTooCoarse { gap: f64, guard: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("step too large: displacement {displacement:.3e} exceeds {guard:.3e}")]
    StepTooLarge { displacement: f64, guard: f64 },

    #[error("constraint drift {drift:.3e} at t = {time}")]
    ConstraintDrift { time: f64, drift: f64 },

    #[error("perturbed neighbor left the injectivity guard at t = {time}")]
    NeighborLeftInjectivityGuard { time: f64 },

    #[error("base trajectory is not a geodesic (covariant acceleration {residual:.3e})")]
    NotAGeodesic { residual: f64 },

    #[error("initial variation is not based on the trajectory start (gap {gap:.3e})")]
    NotOnTrajectory { gap: f64 },

    #[error("sample {index} is not strictly positive")]
    NonPositiveSample { index: usize },

    #[error("fit window holds {samples} samples, at least {required} required")]
    WindowTooSmall { samples: usize, required: usize },

    #[error("field is not certified Killing (residual {residual:.3e})")]
    NotKilling { residual: f64 },

    #[error("distance {distance:.6} is beyond the validity range {limit:.6}")]
    BeyondValidityRange { distance: f64, limit: f64 },

    #[error("gain out of range: {0}")]
    GainOutOfRange(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        source: Box<GeoError>,
    },
}

pub type Result<T> = std::result::Result<T, GeoError>;

impl GeoError {
    /// Attach scenario context to a numerical error.
    pub fn in_scenario(self, scenario: &str) -> Self {
        match self {
            e @ GeoError::Scenario { .. } => e,
            other => GeoError::Scenario {
                scenario: scenario.to_string(),
                source: Box::new(other),
            },
        }
    }
}

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Io(e.to_string())
    }
}
