use super::{ListingHistory, MarketError};
use crate::auction::{outcome, AuctionParams, BidderId, Money, PlayerAuction};

/// Mean utility of each grid bid over one period's auctions (fast route).
pub(crate) fn arm_payoffs(
    sample: &[AuctionParams],
    player: BidderId,
    grid: &[Money],
    value: f64,
) -> Result<Vec<f64>, MarketError> {
    let mut totals = vec![0.0; grid.len()];
    for params in sample {
        let auction = PlayerAuction::new(params, player)?;
        for (t, &bid) in totals.iter_mut().zip(grid) {
            *t += auction.outcome(bid).utility(value);
        }
    }
    let n = sample.len() as f64;
    totals.iter_mut().for_each(|t| *t /= n);
    Ok(totals)
}

/// Mean utility over a period's auctions at the bids actually recorded.
fn played_utility(sample: &[AuctionParams], player: BidderId, value: f64) -> Result<f64, MarketError> {
    let mut total = 0.0;
    for params in sample {
        total += outcome(params, player)?.utility(value);
    }
    Ok(total / sample.len() as f64)
}

/// Mean utility over a period's auctions when the player bids `bid`,
/// re-running the full auction for each draw.
fn period_utility(
    sample: &[AuctionParams],
    player: BidderId,
    bid: Money,
    value: f64,
) -> Result<f64, MarketError> {
    let mut total = 0.0;
    for params in sample {
        total += outcome(&params.with_bid(player, bid)?, player)?.utility(value);
    }
    Ok(total / sample.len() as f64)
}

fn check(history: &ListingHistory, value: f64) -> Result<(), MarketError> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(MarketError::InvalidValue(value));
    }
    if history.periods.is_empty() {
        return Err(MarketError::EmptyHistory(history.listing_id.clone()));
    }
    Ok(())
}

/// Average gain from having bid `bid` in every period instead of the bids played.
pub fn regret_against(history: &ListingHistory, value: f64, bid: Money) -> Result<f64, MarketError> {
    check(history, value)?;
    let mut total = 0.0;
    for p in &history.periods {
        let played = played_utility(&p.auction_sample, history.bidder_id, value)?;
        total += period_utility(&p.auction_sample, history.bidder_id, bid, value)? - played;
    }
    Ok(total / history.periods.len() as f64)
}

/// Additive regret of the played sequence against the best fixed grid bid.
/// Negative when every fixed bid does worse than what was played.
pub fn realized_regret(history: &ListingHistory, value: f64, grid: &[Money]) -> Result<f64, MarketError> {
    check(history, value)?;
    if grid.is_empty() {
        return Err(MarketError::InvalidGrid { max: 0.0 });
    }
    let mut gains = vec![0.0; grid.len()];
    for p in &history.periods {
        let played = played_utility(&p.auction_sample, history.bidder_id, value)?;
        for (g, &bid) in gains.iter_mut().zip(grid) {
            *g += period_utility(&p.auction_sample, history.bidder_id, bid, value)? - played;
        }
    }
    let t = history.periods.len() as f64;
    Ok(gains.into_iter().fold(f64::NEG_INFINITY, f64::max) / t)
}
