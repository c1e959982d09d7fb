use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::oracles::least_squares;

/// Log-linear fit `value(t) ≈ K · value(t₀) · e^{−λ (t − t₀)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub k: f64,
    pub lambda: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    pub window: (f64, f64),
}

/// Fewest samples a fit window may hold.
pub const MIN_WINDOW_SAMPLES: usize = 10;
/// Samples at or below this are treated as numerical zero and end the series.
pub const ZERO_FLOOR: f64 = 1e-12;
/// Default fraction of the series discarded as transient.
pub const DEFAULT_WINDOW_FRAC: f64 = 0.2;

/// Fit an exponential decay to the trailing `1 − window_frac` of a series.
pub fn fit_decay(times: &[f64], values: &[f64], window_frac: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(GeoError::DegenerateInput(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if !(0.0..1.0).contains(&window_frac) {
        return Err(GeoError::DegenerateInput(format!(
            "window_frac must lie in [0, 1), got {window_frac}"
        )));
    }
    let mut len = values.len();
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(GeoError::NonPositiveSample { index: i });
        }
        if v <= ZERO_FLOOR {
            len = i;
            break;
        }
    }
    let start = (window_frac * len as f64).floor() as usize;
    let samples = len - start;
    if samples < MIN_WINDOW_SAMPLES {
        return Err(GeoError::WindowTooSmall {
            samples,
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let t0 = times[0];
    let xs: Vec<f64> = times[start..len].iter().map(|t| t - t0).collect();
    let ys: Vec<f64> = values[start..len].iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    Ok(DecayFit {
        k: intercept.exp() / values[0],
        lambda: -slope,
        residual,
        window: (times[start], times[len - 1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn exact_exponential() {
        let t = grid(200, 0.05);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        let fit = fit_decay(&t, &v, DEFAULT_WINDOW_FRAC).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-12);
        assert!(fit.residual <= 1e-12);
        assert!((fit.k - 1.0).abs() < 1e-10);
        assert!((fit.window.0 - 40.0 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let t = grid(50, 0.1);
        let fit = fit_decay(&t, &vec![0.7; 50], 0.2).unwrap();
        assert!(fit.lambda.abs() < 1e-14);
    }

    #[test]
    fn perturbed_exponential() {
        let t = grid(1001, 0.005);
        let v: Vec<f64> = t
            .iter()
            .map(|t| (-2.0 * t).exp() * (1.0 + 0.01 * (10.0 * t).sin()))
            .collect();
        let fit = fit_decay(&t, &v, 0.2).unwrap();
        assert!((fit.lambda - 2.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_samples() {
        let t = grid(30, 0.1);
        let mut v = vec![1.0; 30];
        v[5] = -1.0;
        assert_eq!(
            fit_decay(&t, &v, 0.2),
            Err(GeoError::NonPositiveSample { index: 5 })
        );
        v[5] = f64::NAN;
        assert_eq!(
            fit_decay(&t, &v, 0.2),
            Err(GeoError::NonPositiveSample { index: 5 })
        );
        assert!(matches!(
            fit_decay(&t[..8], &[1.0; 8], 0.2),
            Err(GeoError::WindowTooSmall { samples: 7, .. })
        ));
    }

    #[test]
    fn truncates_at_numerical_zero() {
        let t = grid(100, 0.1);
        let v: Vec<f64> = t
            .iter()
            .map(|t| if *t < 5.0 { (-t).exp() } else { 0.0 })
            .collect();
        let fit = fit_decay(&t, &v, 0.2).unwrap();
        assert!((fit.lambda - 1.0).abs() < 1e-12);
        assert!(fit.window.1 < 5.0);
    }
}
