//! Regret-based inference of advertiser values from repeated generalized
//! second price auctions.
//!
//! * [`auction`]: the single-auction mechanism (ranking, allocation, pricing).
//! * [`market`]: synthetic markets populated by learning bidders.
//! * [`inference`]: deviation curves, rationalizable sets and point predictions.
//! * [`geometry`]: support functions, Hausdorff distances and the rate study.
//! * [`pipeline`]: configuration, auction-log ingest and artifact export.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auction;
pub mod market;
pub mod inference;
pub mod geometry;
pub mod pipeline;
