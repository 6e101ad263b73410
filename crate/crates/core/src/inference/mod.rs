//! Rationalizable values and regrets from an observed bid history.
//!
//! A history is summarized by its [`DeviationCurve`]: for every candidate
//! fixed bid, the average change in clicks and in spend relative to the bids
//! actually played. A pair `(v, eps)` is rationalizable when no fixed
//! deviation would have gained more than `eps` at value `v`, which makes the
//! rationalizable set the epigraph of the convex piecewise-linear function
//! `eps(v) = max_k (v dP_k - dC_k)`.

mod additive;
mod assumptions;
mod curve;
pub mod envelope;
mod multiplicative;
mod region;

pub use additive::{
    best_deviation, best_deviation_index, boundary, feasible, min_additive_regret,
    min_additive_regret_ladder, value_interval, AdditiveMinimum, RationalizablePoint,
    ValueInterval, FEASIBILITY_TOL,
};
pub use assumptions::{check_assumptions, icc, AssumptionReport, AssumptionViolation, ViolationKind};
pub use curve::{build_deviation_curve, DeviationCurve};
pub(crate) use curve::{combine, PeriodTotals};
pub use multiplicative::{feasible_values_mult, min_mult_regret, PointPrediction, DEFAULT_PRECISION};
pub use region::{RationalizableRegion, RegionConfig};

use thiserror::Error;

use crate::auction::AuctionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("history {0} has no periods")]
    EmptyHistory(String),
    #[error("period {0} has an empty auction sample")]
    EmptySample(u64),
    #[error("invalid deviation curve: {0}")]
    InvalidCurve(String),
    #[error("multiplicative error {0} outside [0, 1)")]
    InvalidDelta(f64),
    #[error("precision {0} must be in (0, 1)")]
    InvalidPrecision(f64),
    #[error("not rationalizable under value cap {value_cap}")]
    NotRationalizable { value_cap: f64 },
    #[error("no deviation raises clicks, so values are unbounded; set a value ceiling")]
    UnboundedValue,
    #[error("epsilon cap {cap} is below the minimal rationalizable regret {minimum}")]
    EpsilonCapTooSmall { cap: f64, minimum: f64 },
    #[error(transparent)]
    Auction(#[from] AuctionError),
}
