//! Support-function view of the rationalizable set.
//!
//! The bounded set `NR_B` (values in `[0, v_cap]`, regrets up to `eps_cap`)
//! is determined by the one-dimensional link `f(z)`, the cost change at click
//! change `z`. Its support function, polygon form and Hausdorff distances
//! drive the subsampling rate study.

mod hausdorff;
mod link;
mod polygon;
mod rate;
mod support;

pub use hausdorff::{hausdorff, SupportFunction, DEFAULT_DIRECTIONS};
pub use link::{link_eval, LinkFunction};
pub use polygon::{ConvexPolygon, Point};
pub use rate::{run_rate_study, RateRow, RateStudyConfig, RateStudyReport, Smoothness, UniformOpponentEnv};
pub use support::{support_nr, support_nrb, NrSupport, NrbSupport, SupportQuery};

use thiserror::Error;

use crate::inference::InferenceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("direction ({0}, {1}) is not unit length")]
    NotUnit(f64, f64),
    #[error("link function needs at least one finite knot")]
    EmptyLink,
    #[error("support function is unbounded in direction ({0}, {1}); apply value and regret caps")]
    Unbounded(f64, f64),
    #[error("polygon needs at least one finite vertex")]
    EmptyPolygon,
    #[error("regret cap {cap} must exceed the boundary at both ends of [0, v_cap] ({at_zero}, {at_cap})")]
    CapsTooTight { cap: f64, at_zero: f64, at_cap: f64 },
    #[error("value cap {0} must be finite and non-negative")]
    InvalidValueCap(f64),
    #[error("rate study: {0}")]
    RateStudy(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}
