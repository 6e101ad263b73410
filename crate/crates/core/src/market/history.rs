use serde::{Deserialize, Serialize};

use super::MarketError;
use crate::auction::{AuctionParams, BidderId, Money};

/// One batch stage: the bid the listing held and a sample of the auctions it entered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period_index: u64,
    /// Bid held during the period. Each auction also records the bid it
    /// actually saw; the two differ only when periods are pooled windows.
    pub own_bid: Money,
    /// Every auction includes the listing's own entry under the history's bidder id.
    pub auction_sample: Vec<AuctionParams>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListingHistory {
    pub listing_id: String,
    pub bidder_id: BidderId,
    pub periods: Vec<PeriodRecord>,
    /// True value per click; only known for synthetic runs.
    pub truth: Option<f64>,
}

impl ListingHistory {
    pub fn validate(&self) -> Result<(), MarketError> {
        let listing = || self.listing_id.clone();
        let first = self
            .periods
            .first()
            .ok_or_else(|| MarketError::EmptyHistory(listing()))?;
        if let Some(v) = self.truth {
            if !v.is_finite() || v < 0.0 {
                return Err(MarketError::InvalidValue(v));
            }
        }
        for pair in self.periods.windows(2) {
            if pair[1].period_index <= pair[0].period_index {
                return Err(MarketError::PeriodOrder {
                    listing: listing(),
                    prev: pair[0].period_index,
                    next: pair[1].period_index,
                });
            }
        }
        for period in &self.periods {
            if period.auction_sample.is_empty() {
                return Err(MarketError::EmptySample {
                    listing: listing(),
                    period: period.period_index,
                });
            }
            if period.auction_sample.iter().any(|a| a.entry(self.bidder_id).is_none()) {
                return Err(MarketError::MissingPlayer {
                    listing: listing(),
                    period: period.period_index,
                });
            }
            if !(period.weight > 0.0) || period.weight != first.weight {
                return Err(MarketError::UnequalWeights { listing: listing() });
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn mean_bid(&self) -> f64 {
        if self.periods.is_empty() {
            return 0.0;
        }
        self.periods.iter().map(|p| p.own_bid.as_f64()).sum::<f64>() / self.periods.len() as f64
    }
}
