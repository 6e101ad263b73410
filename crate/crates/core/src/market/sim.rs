use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::learner::{argmax, Learner};
use super::regret::arm_payoffs;
use super::{LearnerConfig, ListingHistory, MarketError, PeriodRecord};
use crate::auction::{AuctionParams, BidderEntry, BidderId, Money, RankScore, Score};

/// Closed interval sampled uniformly; `lo == hi` is a constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub const fn fixed(x: f64) -> Self {
        UniformRange { lo: x, hi: x }
    }

    fn validate(&self) -> Result<(), MarketError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(MarketError::InvalidRange {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Slow sinusoidal rescaling of background bids: `1 + amplitude * sin(2 pi t / period)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub amplitude: f64,
    pub period: f64,
}

impl Drift {
    fn multiplier(&self, t: usize) -> f64 {
        1.0 + self.amplitude * (std::f64::consts::TAU * t as f64 / self.period).sin()
    }
}

/// Non-learning opponents, redrawn independently for every auction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    pub count: usize,
    pub bid: UniformRange,
    pub score: UniformRange,
    pub quality: UniformRange,
    #[serde(default)]
    pub drift: Option<Drift>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub position_curve: Vec<f64>,
    pub mainline_slots: usize,
    pub mainline_cap: usize,
    pub rank_reserve: f64,
    pub mainline_reserve: f64,
    /// Upper end of every learner's bid support.
    pub bid_max: f64,
    pub background: BackgroundSpec,
}

impl MarketSpec {
    fn template(&self) -> Result<AuctionParams, MarketError> {
        let params = AuctionParams {
            entries: Vec::new(),
            rank_reserve: RankScore::new(self.rank_reserve)?,
            mainline_reserve: RankScore::new(self.mainline_reserve)?,
            mainline_cap: self.mainline_cap,
            position_curve: self.position_curve.clone(),
            mainline_slots: self.mainline_slots,
        };
        params.validate()?;
        let bg = &self.background;
        for r in [bg.bid, bg.score, bg.quality] {
            r.validate()?;
        }
        if let Some(d) = bg.drift {
            if !(d.amplitude.is_finite() && d.period.is_finite() && d.period > 0.0) {
                return Err(MarketError::InvalidRange {
                    lo: d.amplitude,
                    hi: d.period,
                });
            }
        }
        Ok(params)
    }
}

/// A learning bidder tied to one listing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimBidder {
    pub listing_id: String,
    pub value: f64,
    pub score: UniformRange,
    pub quality: UniformRange,
    pub learner: LearnerConfig,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs the learners against each other and the background for `periods`
/// periods of `auctions_per_period` auctions each.
///
/// Learner `i` bids as `BidderId(i + 1)`; background bidders take the ids after.
/// Every history records the complete auction sample of each period.
pub fn simulate_market(
    spec: &MarketSpec,
    bidders: &[SimBidder],
    periods: usize,
    auctions_per_period: usize,
    seed: u64,
) -> Result<Vec<ListingHistory>, MarketError> {
    if bidders.is_empty() {
        return Err(MarketError::EmptyMarket);
    }
    if periods == 0 || auctions_per_period == 0 {
        return Err(MarketError::EmptyHorizon);
    }
    let template = spec.template()?;
    let bid_max = Money::new(spec.bid_max)?;
    let top_slot = spec.position_curve[0];
    let mut learners = Vec::with_capacity(bidders.len());
    for (i, b) in bidders.iter().enumerate() {
        if !(b.value.is_finite() && b.value >= 0.0) {
            return Err(MarketError::InvalidValue(b.value));
        }
        b.learner.validate(bid_max)?;
        b.score.validate()?;
        b.quality.validate()?;
        let rng = stream(seed ^ b.learner.seed.rotate_left(32), i as u64 + 1);
        let scale = (b.value + spec.bid_max) * top_slot;
        learners.push(Learner::new(b.learner.clone(), b.value, scale, periods, rng));
    }
    let ids: Vec<BidderId> = (0..bidders.len()).map(|i| BidderId(i as u64 + 1)).collect();
    let mut env = stream(seed, 0);
    let mut current = vec![0usize; bidders.len()];
    let mut histories: Vec<ListingHistory> = bidders
        .iter()
        .zip(&ids)
        .map(|(b, id)| ListingHistory {
            listing_id: b.listing_id.clone(),
            bidder_id: *id,
            periods: Vec::with_capacity(periods),
            truth: Some(b.value),
        })
        .collect();

    for t in 0..periods {
        for (i, learner) in learners.iter_mut().enumerate() {
            if let Some(k) = learner.choose() {
                current[i] = k;
            }
        }
        let drift = spec.background.drift.map_or(1.0, |d| d.multiplier(t));
        let mut sample = Vec::with_capacity(auctions_per_period);
        for _ in 0..auctions_per_period {
            sample.push(draw_auction(&template, spec, bidders, &ids, &mut env, drift)?);
        }

        // Best responders move in index order, each seeing the bids fixed so far.
        for i in 0..learners.len() {
            if learners[i].is_best_response() {
                set_bids(&mut sample, &learners, &ids, &current);
                let payoffs = arm_payoffs(&sample, ids[i], &learners[i].config.bid_grid, learners[i].value)?;
                current[i] = argmax(&payoffs);
            }
        }
        set_bids(&mut sample, &learners, &ids, &current);

        for (i, learner) in learners.iter_mut().enumerate() {
            let payoffs = arm_payoffs(&sample, ids[i], &learner.config.bid_grid, learner.value)?;
            learner.observe(&payoffs)?;
            histories[i].periods.push(PeriodRecord {
                period_index: t as u64,
                own_bid: learner.config.bid_grid[current[i]],
                auction_sample: sample.clone(),
                weight: 1.0,
            });
        }
    }
    Ok(histories)
}

fn draw_auction(
    template: &AuctionParams,
    spec: &MarketSpec,
    bidders: &[SimBidder],
    ids: &[BidderId],
    rng: &mut ChaCha8Rng,
    drift: f64,
) -> Result<AuctionParams, MarketError> {
    let bg = &spec.background;
    let mut params = template.clone();
    params.entries.reserve(bidders.len() + bg.count);
    for (b, id) in bidders.iter().zip(ids) {
        params.entries.push(BidderEntry {
            id: *id,
            score: Score::new(b.score.sample(rng))?,
            quality: b.quality.sample(rng),
            bid: Money::ZERO,
        });
    }
    for k in 0..bg.count {
        let bid = (bg.bid.sample(rng) * drift).max(0.0);
        params.entries.push(BidderEntry {
            id: BidderId((bidders.len() + 1 + k) as u64),
            score: Score::new(bg.score.sample(rng))?,
            quality: bg.quality.sample(rng),
            bid: Money::new(bid)?,
        });
    }
    Ok(params)
}

fn set_bids(sample: &mut [AuctionParams], learners: &[Learner], ids: &[BidderId], current: &[usize]) {
    for params in sample {
        for (i, id) in ids.iter().enumerate() {
            // learner entries occupy the leading slots in id order
            debug_assert_eq!(params.entries[i].id, *id);
            params.entries[i].bid = learners[i].config.bid_grid[current[i]];
        }
    }
}
