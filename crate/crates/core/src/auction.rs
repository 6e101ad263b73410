//! Single-auction generalized second price mechanism.
//!
//! Bidders are ranked by rank-score `q = score * bid`, allocated slots subject to
//! a rank reserve and a (higher) mainline reserve, and charged per click the
//! minimal bid that keeps their slot. Click probabilities are separable: the
//! slot factor from the position curve times the bidder's own quality.
//!
//! Bids and scores are fixed-point integers (micro-units), so rank-scores are
//! exact `u128` products and ranking never compares floats. Only the final
//! per-click price and the click-weighted quantities are `f64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MONEY_SCALE: f64 = 1e6;
const SCORE_SCALE: f64 = 1e6;
const RANK_SCALE: f64 = MONEY_SCALE * SCORE_SCALE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuctionError {
    #[error("invalid money amount {0}: must be finite and non-negative")]
    InvalidMoney(f64),
    #[error("invalid score {0}: must be finite and positive")]
    InvalidScore(f64),
    #[error("invalid reserve {0}: must be finite and non-negative")]
    InvalidReserve(f64),
    #[error("bidder {id}: quality {quality} outside [0, 1]")]
    InvalidQuality { id: BidderId, quality: f64 },
    #[error("position curve must be non-empty, within (0, 1] and strictly decreasing")]
    PositionCurve,
    #[error("mainline reserve must be at least the rank reserve")]
    ReserveOrder,
    #[error("{slots} mainline positions exceed mainline cap {cap}")]
    MainlineCap { slots: usize, cap: usize },
    #[error("{slots} mainline positions exceed the {positions} available positions")]
    MainlineSlots { slots: usize, positions: usize },
    #[error("duplicate bidder id {0}")]
    DuplicateBidder(BidderId),
    #[error("bidder {0} not present in auction")]
    UnknownBidder(BidderId),
    #[error("bidder {0} is not allocated a position")]
    NotAllocated(BidderId),
}

/// Money amount in micro-units (1e-6 of the currency unit).
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(try_from = "f64", into = "f64")]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn new(amount: f64) -> Result<Self, AuctionError> {
        if !amount.is_finite() || amount < 0.0 {
            return Err(AuctionError::InvalidMoney(amount));
        }
        Ok(Money((amount * MONEY_SCALE).round() as u64))
    }

    pub const fn from_micros(micros: u64) -> Self {
        Money(micros)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / MONEY_SCALE
    }
}

impl TryFrom<f64> for Money {
    type Error = AuctionError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Money::new(value)
    }
}

impl From<Money> for f64 {
    fn from(m: Money) -> f64 {
        m.as_f64()
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// Platform score in parts-per-million; always strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Score(u64);

impl Score {
    pub fn new(score: f64) -> Result<Self, AuctionError> {
        if !score.is_finite() || score <= 0.0 {
            return Err(AuctionError::InvalidScore(score));
        }
        let ppm = (score * SCORE_SCALE).round() as u64;
        if ppm == 0 {
            return Err(AuctionError::InvalidScore(score));
        }
        Ok(Score(ppm))
    }

    pub fn from_ppm(ppm: u64) -> Result<Self, AuctionError> {
        if ppm == 0 {
            return Err(AuctionError::InvalidScore(0.0));
        }
        Ok(Score(ppm))
    }

    pub const fn ppm(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / SCORE_SCALE
    }

    /// Exact rank-score of a bid placed with this score.
    pub fn rank(self, bid: Money) -> RankScore {
        RankScore(self.0 as u128 * bid.0 as u128)
    }
}

impl TryFrom<f64> for Score {
    type Error = AuctionError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Score::new(value)
    }
}

impl From<Score> for f64 {
    fn from(s: Score) -> f64 {
        s.as_f64()
    }
}

/// Rank-score (score times bid) in units of 1e-12; also the unit of reserves.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(try_from = "f64", into = "f64")]
pub struct RankScore(u128);

impl RankScore {
    pub const ZERO: RankScore = RankScore(0);

    pub fn new(value: f64) -> Result<Self, AuctionError> {
        if !value.is_finite() || value < 0.0 {
            return Err(AuctionError::InvalidReserve(value));
        }
        Ok(RankScore((value * RANK_SCALE).round() as u128))
    }

    pub const fn raw(self) -> u128 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / RANK_SCALE
    }

    /// Per-click price, in money, that this rank-score implies for a bidder with `score`.
    pub fn price_for(self, score: Score) -> f64 {
        self.0 as f64 / score.0 as f64 / MONEY_SCALE
    }
}

impl TryFrom<f64> for RankScore {
    type Error = AuctionError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        RankScore::new(value)
    }
}

impl From<RankScore> for f64 {
    fn from(r: RankScore) -> f64 {
        r.as_f64()
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BidderId(pub u64);

impl fmt::Display for BidderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BidderEntry {
    pub id: BidderId,
    pub score: Score,
    /// Advertiser click factor, in `[0, 1]`.
    pub quality: f64,
    pub bid: Money,
}

impl BidderEntry {
    pub fn rank_score(&self) -> RankScore {
        self.score.rank(self.bid)
    }
}

/// Observable state of one auction.
///
/// Positions are 0-indexed; the mainline positions are the prefix
/// `0..mainline_slots`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionParams {
    pub entries: Vec<BidderEntry>,
    pub rank_reserve: RankScore,
    pub mainline_reserve: RankScore,
    pub mainline_cap: usize,
    pub position_curve: Vec<f64>,
    pub mainline_slots: usize,
}

impl AuctionParams {
    pub fn validate(&self) -> Result<(), AuctionError> {
        let curve = &self.position_curve;
        if curve.is_empty()
            || curve.iter().any(|a| !(a.is_finite() && *a > 0.0 && *a <= 1.0))
            || curve.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(AuctionError::PositionCurve);
        }
        if self.mainline_reserve < self.rank_reserve {
            return Err(AuctionError::ReserveOrder);
        }
        if self.mainline_slots > self.mainline_cap {
            return Err(AuctionError::MainlineCap {
                slots: self.mainline_slots,
                cap: self.mainline_cap,
            });
        }
        if self.mainline_slots > curve.len() {
            return Err(AuctionError::MainlineSlots {
                slots: self.mainline_slots,
                positions: curve.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.id) {
                return Err(AuctionError::DuplicateBidder(e.id));
            }
            if !(0.0..=1.0).contains(&e.quality) {
                return Err(AuctionError::InvalidQuality {
                    id: e.id,
                    quality: e.quality,
                });
            }
        }
        Ok(())
    }

    pub fn entry(&self, id: BidderId) -> Option<&BidderEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn is_mainline(&self, position: usize) -> bool {
        position < self.mainline_slots
    }

    /// Copy of these params with bidder `id`'s bid replaced.
    pub fn with_bid(&self, id: BidderId, bid: Money) -> Result<AuctionParams, AuctionError> {
        let mut out = self.clone();
        let entry = out
            .entries
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or(AuctionError::UnknownBidder(id))?;
        entry.bid = bid;
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// Every bidder in the auction, with its position if allocated.
    pub position_of: BTreeMap<BidderId, Option<usize>>,
    /// Occupant of each position of the position curve.
    pub bidder_at: Vec<Option<BidderId>>,
}

impl AllocationResult {
    pub fn position(&self, id: BidderId) -> Option<usize> {
        self.position_of.get(&id).copied().flatten()
    }

    pub fn occupant(&self, position: usize) -> Option<BidderId> {
        self.bidder_at.get(position).copied().flatten()
    }
}

/// Hands out positions to bidders presented in rank order.
struct SlotAssigner {
    rank_reserve: RankScore,
    mainline_reserve: RankScore,
    mainline_slots: usize,
    positions: usize,
    mainline_used: usize,
    sidebar_used: usize,
}

impl SlotAssigner {
    fn new(
        rank_reserve: RankScore,
        mainline_reserve: RankScore,
        mainline_slots: usize,
        positions: usize,
    ) -> Self {
        SlotAssigner {
            rank_reserve,
            mainline_reserve,
            mainline_slots,
            positions,
            mainline_used: 0,
            sidebar_used: 0,
        }
    }

    fn place(&mut self, q: RankScore) -> Option<usize> {
        if q < self.rank_reserve {
            return None;
        }
        if q >= self.mainline_reserve && self.mainline_used < self.mainline_slots {
            self.mainline_used += 1;
            return Some(self.mainline_used - 1);
        }
        let position = self.mainline_slots + self.sidebar_used;
        if position >= self.positions {
            return None;
        }
        self.sidebar_used += 1;
        Some(position)
    }
}

fn ranks_ahead(a: (RankScore, BidderId), b: (RankScore, BidderId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

pub fn rank_and_allocate(params: &AuctionParams) -> Result<AllocationResult, AuctionError> {
    params.validate()?;
    let mut order: Vec<&BidderEntry> = params.entries.iter().collect();
    order.sort_by(|a, b| {
        b.rank_score()
            .cmp(&a.rank_score())
            .then_with(|| a.id.cmp(&b.id))
    });

    let mut assigner = SlotAssigner::new(
        params.rank_reserve,
        params.mainline_reserve,
        params.mainline_slots,
        params.position_curve.len(),
    );
    let mut result = AllocationResult {
        position_of: BTreeMap::new(),
        bidder_at: vec![None; params.position_curve.len()],
    };
    for entry in order {
        let position = assigner.place(entry.rank_score());
        if let Some(j) = position {
            result.bidder_at[j] = Some(entry.id);
        }
        result.position_of.insert(entry.id, position);
    }
    Ok(result)
}

fn price_floor(params: &AuctionParams, position: usize, next: Option<RankScore>) -> RankScore {
    let mut floor = next.unwrap_or(RankScore::ZERO).max(params.rank_reserve);
    if params.is_mainline(position) {
        floor = floor.max(params.mainline_reserve);
    }
    floor
}

/// Per-click price of an allocated bidder: the larger of the next-ranked
/// rank-score and the applicable reserves, divided by the bidder's score.
pub fn cost_per_click(
    id: BidderId,
    alloc: &AllocationResult,
    params: &AuctionParams,
) -> Result<f64, AuctionError> {
    let entry = params.entry(id).ok_or(AuctionError::UnknownBidder(id))?;
    let j = alloc.position(id).ok_or(AuctionError::NotAllocated(id))?;
    let next = alloc
        .occupant(j + 1)
        .and_then(|n| params.entry(n))
        .map(BidderEntry::rank_score);
    Ok(price_floor(params, j, next).price_for(entry.score))
}

pub fn click_probability(id: BidderId, alloc: &AllocationResult, params: &AuctionParams) -> f64 {
    match (params.entry(id), alloc.position(id)) {
        (Some(entry), Some(j)) => params.position_curve[j] * entry.quality,
        _ => 0.0,
    }
}

/// Click probability and expected payment of one bidder in one auction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub click_probability: f64,
    pub payment: f64,
}

impl Outcome {
    pub fn utility(&self, value: f64) -> f64 {
        value * self.click_probability - self.payment
    }
}

pub fn outcome(params: &AuctionParams, id: BidderId) -> Result<Outcome, AuctionError> {
    let alloc = rank_and_allocate(params)?;
    if params.entry(id).is_none() {
        return Err(AuctionError::UnknownBidder(id));
    }
    let p = click_probability(id, &alloc, params);
    if alloc.position(id).is_none() {
        return Ok(Outcome::default());
    }
    let cpc = cost_per_click(id, &alloc, params)?;
    Ok(Outcome {
        click_probability: p,
        payment: p * cpc,
    })
}

pub fn expected_payment(params: &AuctionParams, id: BidderId) -> Result<f64, AuctionError> {
    outcome(params, id).map(|o| o.payment)
}

pub fn utility(params: &AuctionParams, id: BidderId, value: f64) -> Result<f64, AuctionError> {
    outcome(params, id).map(|o| o.utility(value))
}

/// One auction seen from a single bidder whose bid is the free variable.
///
/// Rivals are sorted once, so evaluating a counterfactual bid is a linear
/// merge rather than a full re-sort.
#[derive(Clone, Debug)]
pub struct PlayerAuction {
    player: BidderId,
    score: Score,
    quality: f64,
    rivals: Vec<(RankScore, BidderId)>,
    rank_reserve: RankScore,
    mainline_reserve: RankScore,
    mainline_slots: usize,
    position_curve: Vec<f64>,
}

impl PlayerAuction {
    pub fn new(params: &AuctionParams, player: BidderId) -> Result<Self, AuctionError> {
        params.validate()?;
        let me = params
            .entry(player)
            .ok_or(AuctionError::UnknownBidder(player))?;
        let mut rivals: Vec<(RankScore, BidderId)> = params
            .entries
            .iter()
            .filter(|e| e.id != player)
            .map(|e| (e.rank_score(), e.id))
            .collect();
        rivals.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        Ok(PlayerAuction {
            player,
            score: me.score,
            quality: me.quality,
            rivals,
            rank_reserve: params.rank_reserve,
            mainline_reserve: params.mainline_reserve,
            mainline_slots: params.mainline_slots,
            position_curve: params.position_curve.clone(),
        })
    }

    pub fn player(&self) -> BidderId {
        self.player
    }

    pub fn outcome(&self, bid: Money) -> Outcome {
        let q = self.score.rank(bid);
        if q < self.rank_reserve {
            return Outcome::default();
        }
        let mut assigner = SlotAssigner::new(
            self.rank_reserve,
            self.mainline_reserve,
            self.mainline_slots,
            self.position_curve.len(),
        );
        let me = (q, self.player);
        for &rival in &self.rivals {
            if ranks_ahead(rival, me) {
                if assigner.place(rival.0).is_none() {
                    // positions exhausted above the player
                    return Outcome::default();
                }
                continue;
            }
            let position = assigner.place(q);
            let next = assigner.place(rival.0).map(|p| (p, rival.0));
            return self.finish(position, next);
        }
        let position = assigner.place(q);
        self.finish(position, None)
    }

    fn finish(&self, position: Option<usize>, next: Option<(usize, RankScore)>) -> Outcome {
        let Some(j) = position else {
            return Outcome::default();
        };
        let successor = next.filter(|(p, _)| *p == j + 1).map(|(_, q)| q);
        let mut floor = successor.unwrap_or(RankScore::ZERO).max(self.rank_reserve);
        if j < self.mainline_slots {
            floor = floor.max(self.mainline_reserve);
        }
        let p = self.position_curve[j] * self.quality;
        Outcome {
            click_probability: p,
            payment: p * floor.price_for(self.score),
        }
    }
}
