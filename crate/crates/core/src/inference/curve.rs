use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::auction::{BidderId, Money, PlayerAuction};
use crate::market::{ListingHistory, PeriodRecord};

/// Average click and cost changes from replacing the played bids with each
/// fixed grid bid, plus the baseline averages of the played bids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationCurve {
    pub grid: Vec<f64>,
    pub delta_p: Vec<f64>,
    pub delta_c: Vec<f64>,
    pub baseline_p: f64,
    pub baseline_c: f64,
}

impl DeviationCurve {
    pub fn new(
        grid: Vec<f64>,
        delta_p: Vec<f64>,
        delta_c: Vec<f64>,
        baseline_p: f64,
        baseline_c: f64,
    ) -> Result<Self, InferenceError> {
        let curve = DeviationCurve {
            grid,
            delta_p,
            delta_c,
            baseline_p,
            baseline_c,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Curve given only by its `(dP, dC)` rows; the grid is the row index.
    pub fn from_rows(rows: &[(f64, f64)], baseline_p: f64, baseline_c: f64) -> Result<Self, InferenceError> {
        DeviationCurve::new(
            (0..rows.len()).map(|i| i as f64).collect(),
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
            baseline_p,
            baseline_c,
        )
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |m: &str| Err(InferenceError::InvalidCurve(m.to_string()));
        if self.grid.is_empty() {
            return bad("empty grid");
        }
        if self.delta_p.len() != self.grid.len() || self.delta_c.len() != self.grid.len() {
            return bad("grid and deviation vectors differ in length");
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("grid is not strictly increasing");
        }
        let all = self.grid.iter().chain(&self.delta_p).chain(&self.delta_c);
        if all.chain([&self.baseline_p, &self.baseline_c]).any(|x| !x.is_finite()) {
            return bad("non-finite entry");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.delta_p.iter().copied().zip(self.delta_c.iter().copied())
    }

    pub fn max_delta_p(&self) -> f64 {
        self.delta_p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-period sums of outcomes at every grid bid and at the played bid.
pub(crate) struct PeriodTotals {
    p: Vec<f64>,
    c: Vec<f64>,
    own_p: f64,
    own_c: f64,
    auctions: usize,
}

impl PeriodTotals {
    pub(crate) fn new(grid_len: usize) -> Self {
        PeriodTotals {
            p: vec![0.0; grid_len],
            c: vec![0.0; grid_len],
            own_p: 0.0,
            own_c: 0.0,
            auctions: 0,
        }
    }

    pub(crate) fn add(&mut self, auction: &PlayerAuction, own_bid: Money, grid: &[Money]) {
        let own = auction.outcome(own_bid);
        self.own_p += own.click_probability;
        self.own_c += own.payment;
        for (k, &bid) in grid.iter().enumerate() {
            let o = auction.outcome(bid);
            self.p[k] += o.click_probability;
            self.c[k] += o.payment;
        }
        self.auctions += 1;
    }
}

fn period_totals(period: &PeriodRecord, player: BidderId, grid: &[Money]) -> Result<PeriodTotals, InferenceError> {
    if period.auction_sample.is_empty() {
        return Err(InferenceError::EmptySample(period.period_index));
    }
    let mut out = PeriodTotals::new(grid.len());
    for params in &period.auction_sample {
        // The baseline is the bid recorded in the auction itself.
        let auction = PlayerAuction::new(params, player)?;
        let played = params.entry(player).map_or(period.own_bid, |e| e.bid);
        out.add(&auction, played, grid);
    }
    Ok(out)
}

/// Averages within each period, then differences against the played bid and
/// averages across periods, in period order.
pub(crate) fn combine(grid: &[Money], totals: &[PeriodTotals]) -> Result<DeviationCurve, InferenceError> {
    let mut dp = vec![0.0; grid.len()];
    let mut dc = vec![0.0; grid.len()];
    let (mut p0, mut c0) = (0.0, 0.0);
    for t in totals {
        let n = t.auctions as f64;
        let (own_p, own_c) = (t.own_p / n, t.own_c / n);
        for k in 0..grid.len() {
            dp[k] += t.p[k] / n - own_p;
            dc[k] += t.c[k] / n - own_c;
        }
        p0 += own_p;
        c0 += own_c;
    }
    let n = totals.len() as f64;
    dp.iter_mut().chain(dc.iter_mut()).for_each(|x| *x /= n);
    DeviationCurve::new(grid.iter().map(|b| b.as_f64()).collect(), dp, dc, p0 / n, c0 / n)
}

/// Replays every recorded auction at every grid bid. Periods are evaluated in
/// parallel and summed in period order, so the result does not depend on the
/// thread count.
pub fn build_deviation_curve(history: &ListingHistory, grid: &[Money]) -> Result<DeviationCurve, InferenceError> {
    if history.periods.is_empty() {
        return Err(InferenceError::EmptyHistory(history.listing_id.clone()));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(InferenceError::InvalidCurve("grid must be non-empty and strictly increasing".into()));
    }
    let totals: Vec<PeriodTotals> = history
        .periods
        .par_iter()
        .map(|p| period_totals(p, history.bidder_id, grid))
        .collect::<Result<_, _>>()?;

    combine(grid, &totals)
}
