//! Configured experiments: load a TOML scenario, wire the plant, law and
//! integrator, fit decay rates and grade them against their predictions.
//!
//! Each run writes `<name>.csv` (columns `t, distance, …`) and
//! `<name>.json` (the [`RunReport`]) into the configured output directory.

mod config;
mod flow;
mod jacobi;
mod killing;
mod report;
mod so3;
mod tracking;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::DecayFit;
use crate::error::{GeoError, Result};

pub use config::{InitialConditions, ScenarioConfig, ScenarioId};
pub use report::{Check, Criterion, NamedFit, PredictedRate, RunReport, Table};

/// Environment variable overriding the output directory of `run` and `suite`.
pub const OUT_DIR_ENV: &str = "GEOCTL_OUT_DIR";

/// Random source of every scenario; named in each report.
pub const PRNG: &str = "ChaCha8Rng::seed_from_u64";

pub(crate) struct Outcome {
    table: Table,
    fits: Vec<NamedFit>,
    predicted: Vec<PredictedRate>,
    criteria: Vec<Criterion>,
    diagnostics: BTreeMap<String, f64>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome {
            table,
            fits: Vec::new(),
            predicted: Vec::new(),
            criteria: Vec::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    fn fit(&mut self, label: &str, fit: DecayFit) {
        self.fits.push(NamedFit {
            label: label.into(),
            fit,
        });
    }

    fn predict(&mut self, label: &str, rate: f64, note: &str) {
        self.predicted.push(PredictedRate {
            label: label.into(),
            rate,
            note: note.into(),
        });
    }

    fn check(
        &mut self,
        name: &str,
        check: Check,
        measured: f64,
        predicted: f64,
        tolerance: f64,
        note: &str,
    ) {
        self.criteria.push(Criterion::new(
            name, check, measured, predicted, tolerance, note,
        ));
    }

    fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }
}

fn dispatch(cfg: &ScenarioConfig) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rng = &mut rng;
    match cfg.scenario {
        ScenarioId::TrackingSphere => tracking::tracking_sphere(cfg, rng),
        ScenarioId::ObserverSpherePendulum => tracking::observer_sphere_pendulum(cfg, rng),
        ScenarioId::So3Filter => so3::so3_filter(cfg, rng),
        ScenarioId::So3Tracking => so3::so3_tracking(cfg, rng),
        ScenarioId::KillingSpdContinuous => killing::killing_spd_continuous(cfg, rng),
        ScenarioId::KillingSpdDiscrete => killing::killing_spd_discrete(cfg, rng),
        ScenarioId::GradientFlowContraction => flow::gradient_flow_contraction(cfg, rng),
        ScenarioId::JacobiDemo => jacobi::jacobi_demo(cfg, rng),
        ScenarioId::LiftEquivalence => flow::lift_equivalence(cfg, rng),
        ScenarioId::VolumeContraction => flow::volume_contraction(cfg, rng),
    }
}

/// Run one scenario and, when `config.output` is set, write its CSV and
/// JSON report there.
pub fn run(config: &ScenarioConfig) -> Result<RunReport> {
    run_with_table(config).map(|(report, _)| report)
}

/// Like [`run`], also returning the time series.
pub fn run_with_table(config: &ScenarioConfig) -> Result<(RunReport, Table)> {
    let name = config.label();
    let problems = config.validate();
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(|e| e.to_string()).collect();
        return Err(GeoError::ConfigInvalid(format!(
            "{name}: {}",
            list.join("; ")
        )));
    }
    let start = Instant::now();
    let outcome = dispatch(config).map_err(|e| e.in_scenario(&name))?;
    let passed = !outcome.criteria.is_empty() && outcome.criteria.iter().all(|c| c.passed);
    let mut report = RunReport {
        scenario: config.scenario,
        name: name.clone(),
        seed: config.seed,
        prng: PRNG.to_string(),
        fits: outcome.fits,
        predicted: outcome.predicted,
        criteria: outcome.criteria,
        diagnostics: outcome.diagnostics,
        wall_time_s: start.elapsed().as_secs_f64(),
        passed,
        outputs: Vec::new(),
    };
    if let Some(dir) = &config.output {
        report::write_outputs(dir, &name, &outcome.table, &mut report)
            .map_err(|e| e.in_scenario(&name))?;
    }
    Ok((report, outcome.table))
}

/// Bundled scenario configurations as `(file stem, TOML)`.
pub fn bundled() -> Vec<(&'static str, &'static str)> {
    macro_rules! cfg {
        ($($name:literal),* $(,)?) => {
            vec![$(($name, include_str!(concat!("../../scenarios/", $name, ".toml")))),*]
        };
    }
    cfg![
        "tracking_sphere",
        "tracking_sphere_height",
        "observer_sphere_pendulum",
        "so3_filter",
        "so3_tracking",
        "killing_spd_continuous",
        "killing_spd_discrete",
        "gradient_flow_contraction",
        "jacobi_demo",
        "lift_equivalence",
        "volume_contraction",
    ]
}

/// Parsed bundled configurations whose stem contains `filter`.
pub fn bundled_configs(filter: Option<&str>) -> Result<Vec<ScenarioConfig>> {
    bundled()
        .into_iter()
        .filter(|(stem, _)| filter.is_none_or(|f| stem.contains(f)))
        .map(|(stem, text)| {
            let mut cfg = ScenarioConfig::from_toml(text)
                .map_err(|e| GeoError::ConfigInvalid(format!("bundled {stem}: {e}")))?;
            cfg.name.get_or_insert_with(|| stem.to_string());
            Ok(cfg)
        })
        .collect()
}

/// Run configurations concurrently, one worker each. Results keep the input
/// order.
pub fn run_suite(configs: &[ScenarioConfig], out_dir: Option<&Path>) -> Vec<Result<RunReport>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                let mut cfg = cfg.clone();
                if let Some(dir) = out_dir {
                    cfg.output = Some(dir.to_path_buf());
                }
                scope.spawn(move || run(&cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join().unwrap_or_else(|_| {
                    Err(GeoError::DegenerateInput("scenario worker panicked".into()))
                })
            })
            .collect()
    })
}
