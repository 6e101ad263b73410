use serde::{Deserialize, Serialize};

use super::additive::{min_additive_regret, solve_rows, ValueInterval};
use super::{DeviationCurve, InferenceError};

pub const DEFAULT_PRECISION: f64 = 1e-6;

/// Values rationalizable with multiplicative error `delta`: no fixed
/// deviation gains more than `delta / (1 - delta)` times the realized utility.
pub fn feasible_values_mult(
    curve: &DeviationCurve,
    delta: f64,
    value_cap: f64,
) -> Result<Option<ValueInterval>, InferenceError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(InferenceError::InvalidDelta(delta));
    }
    let (p0, c0) = (curve.baseline_p, curve.baseline_c);
    let rows = curve
        .rows()
        .map(|(dp, dc)| ((1.0 - delta) * dp - delta * p0, (1.0 - delta) * dc - delta * c0));
    Ok(solve_rows(rows, value_cap))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPrediction {
    pub delta_star: f64,
    pub v_star: f64,
    pub v_interval_at_delta_star: ValueInterval,
    pub epsilon_min: f64,
    pub iterations: u32,
}

/// Smallest rationalizable multiplicative error, found by bisection on `delta`,
/// and the midpoint of the values it rationalizes.
pub fn min_mult_regret(
    curve: &DeviationCurve,
    precision: f64,
    value_cap: f64,
) -> Result<PointPrediction, InferenceError> {
    if !(precision > 0.0 && precision < 1.0) {
        return Err(InferenceError::InvalidPrecision(precision));
    }
    let epsilon_min = min_additive_regret(curve, value_cap).epsilon_min;
    let done = |delta: f64, interval: ValueInterval, iterations: u32| PointPrediction {
        delta_star: delta,
        v_star: interval.midpoint(),
        v_interval_at_delta_star: interval,
        epsilon_min,
        iterations,
    };
    if let Some(at_zero) = feasible_values_mult(curve, 0.0, value_cap)? {
        return Ok(done(0.0, at_zero, 0));
    }
    let mut hi = 1.0 - precision;
    let mut interval = feasible_values_mult(curve, hi, value_cap)?
        .ok_or(InferenceError::NotRationalizable { value_cap })?;
    let mut lo = 0.0;
    let mut iterations = 0;
    while hi - lo >= precision && interval.width() >= precision {
        let mid = 0.5 * (lo + hi);
        match feasible_values_mult(curve, mid, value_cap)? {
            Some(found) => {
                hi = mid;
                interval = found;
            }
            None => lo = mid,
        }
        iterations += 1;
    }
    Ok(done(hi, interval, iterations))
}
