use serde::{Deserialize, Serialize};

use super::additive::{boundary, min_additive_regret, value_interval, RationalizablePoint};
use super::assumptions::{check_assumptions, AssumptionReport};
use super::{DeviationCurve, InferenceError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Largest regret considered plausible.
    pub epsilon_cap: f64,
    /// Optional hard upper limit on values.
    pub value_ceiling: Option<f64>,
    /// Number of evenly spaced boundary samples on `[0, value_cap]`.
    pub boundary_points: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            epsilon_cap: 1.0,
            value_ceiling: None,
            boundary_points: 201,
        }
    }
}

/// Rationalizable pairs with non-negative value and regret at most the cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalizableRegion {
    pub curve: DeviationCurve,
    pub epsilon_cap: f64,
    /// Largest value rationalizable at the regret cap (or the ceiling, if lower).
    pub value_cap: f64,
    pub epsilon_min: f64,
    /// Regret needed to rationalize a zero value.
    pub epsilon_floor: f64,
    pub boundary: Vec<RationalizablePoint>,
    pub assumption_report: AssumptionReport,
}

impl RationalizableRegion {
    pub fn new(curve: DeviationCurve, config: &RegionConfig) -> Result<Self, InferenceError> {
        curve.validate()?;
        let eps_cap = config.epsilon_cap;
        if !eps_cap.is_finite() {
            return Err(InferenceError::InvalidCurve("epsilon cap must be finite".into()));
        }
        let ceiling = config.value_ceiling.unwrap_or(f64::INFINITY);
        let at_cap = value_interval(&curve, eps_cap, ceiling);
        let Some(at_cap) = at_cap else {
            let minimum = min_additive_regret(&curve, ceiling).epsilon_min;
            return Err(InferenceError::EpsilonCapTooSmall {
                cap: eps_cap,
                minimum,
            });
        };
        if !at_cap.hi.is_finite() {
            return Err(InferenceError::UnboundedValue);
        }
        let value_cap = at_cap.hi;
        let epsilon_min = min_additive_regret(&curve, value_cap).epsilon_min;
        let n = config.boundary_points.max(2);
        let samples: Vec<RationalizablePoint> = (0..n)
            .map(|i| {
                let value = value_cap * i as f64 / (n - 1) as f64;
                RationalizablePoint {
                    value,
                    epsilon: boundary(&curve, value),
                }
            })
            .collect();
        Ok(RationalizableRegion {
            epsilon_floor: boundary(&curve, 0.0),
            assumption_report: check_assumptions(&curve),
            curve,
            epsilon_cap: eps_cap,
            value_cap,
            epsilon_min,
            boundary: samples,
        })
    }
}
