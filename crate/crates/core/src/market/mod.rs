//! Synthetic repeated-auction markets with learning bidders.
//!
//! Each period every learner commits to one bid from its grid, a batch of
//! auctions is drawn, and learners observe full-information per-arm payoffs.
//! The resulting [`ListingHistory`] values carry the true value per click so
//! inference can be checked against ground truth.

mod history;
mod learner;
mod regret;
mod sim;

pub use history::{ListingHistory, PeriodRecord};
pub use learner::{hedge_step, tuned_learning_rate, uniform_grid, Algorithm, LearnerConfig};
pub use regret::{realized_regret, regret_against};
pub use sim::{simulate_market, BackgroundSpec, Drift, MarketSpec, SimBidder, UniformRange};

use thiserror::Error;

use crate::auction::AuctionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("market has no bidders")]
    EmptyMarket,
    #[error("periods and auctions per period must both be at least 1")]
    EmptyHorizon,
    #[error("history {0} has no periods")]
    EmptyHistory(String),
    #[error("history {listing}: period {period} has an empty auction sample")]
    EmptySample { listing: String, period: u64 },
    #[error("history {listing}: period {period} has an auction without the listing's bidder")]
    MissingPlayer { listing: String, period: u64 },
    #[error("history {listing}: periods must be strictly increasing ({prev} then {next})")]
    PeriodOrder { listing: String, prev: u64, next: u64 },
    #[error("history {listing}: period weights must be positive and equal")]
    UnequalWeights { listing: String },
    #[error("invalid value {0}: must be finite and non-negative")]
    InvalidValue(f64),
    #[error("bid grid must be non-empty, strictly increasing and within [0, {max}]")]
    InvalidGrid { max: f64 },
    #[error("invalid learner setting: {0}")]
    InvalidLearner(String),
    #[error("payoff {0} is not finite")]
    NonFinitePayoff(f64),
    #[error("weights and payoffs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Auction(#[from] AuctionError),
}
