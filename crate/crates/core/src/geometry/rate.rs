use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hausdorff, ConvexPolygon, GeometryError, LinkFunction};
use crate::auction::{AuctionParams, BidderEntry, BidderId, Money, PlayerAuction, RankScore, Score};
use crate::inference::{combine, DeviationCurve, PeriodTotals};

/// Hölder smoothness of the link: `k` derivatives, the last `alpha`-Hölder with constant `lipschitz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothness {
    pub k: u32,
    pub alpha: f64,
    pub lipschitz: f64,
}

impl Smoothness {
    pub fn gamma(&self) -> f64 {
        self.k as f64 + self.alpha
    }

    /// Exponent of `N^-1 log N` in the convergence bound.
    pub fn target_exponent(&self) -> f64 {
        let g = self.gamma();
        g / (2.0 * g + 1.0)
    }
}

/// One player (score 1) against opponents whose rank-scores are i.i.d.
/// uniform on `[0, rank_score_max]`, no reserves and no mainline block.
///
/// Outcomes have closed forms: with `x = min(b, Q)`, the number of opponents
/// ranked above is Binomial(m, 1 - x/Q), and given `j` opponents below, the
/// expected price is the mean of their maximum, `x j / (j + 1)`. Both are
/// polynomial in `x`, so the link is Lipschitz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformOpponentEnv {
    pub opponents: usize,
    pub rank_score_max: f64,
    pub quality: f64,
    pub position_curve: Vec<f64>,
    /// Bid played in each period; its length is the number of periods.
    pub bid_schedule: Vec<f64>,
    pub grid_step: f64,
    pub bid_max: f64,
}

impl Default for UniformOpponentEnv {
    fn default() -> Self {
        UniformOpponentEnv {
            opponents: 3,
            rank_score_max: 1.0,
            quality: 0.8,
            position_curve: vec![1.0, 0.7, 0.5, 0.35],
            bid_schedule: vec![0.2, 0.3, 0.35, 0.4, 0.45, 0.5, 0.5, 0.55, 0.6, 0.6],
            grid_step: 0.02,
            bid_max: 1.2,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl UniformOpponentEnv {
    fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::RateStudy(m.to_string()));
        if self.opponents + 1 > self.position_curve.len() {
            return bad("every bidder must fit in the position curve");
        }
        if !(self.rank_score_max > 0.0) || !(0.0..=1.0).contains(&self.quality) {
            return bad("rank-score range and quality must be positive and in range");
        }
        if self.bid_schedule.is_empty() || !(self.grid_step > 0.0) || !(self.bid_max > 0.0) {
            return bad("bid schedule, grid step and bid cap must be non-empty and positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<Money> {
        let step = Money::new(self.grid_step).expect("positive step");
        let max = Money::new(self.bid_max).expect("positive cap");
        (0..=max.micros() / step.micros())
            .map(|k| Money::from_micros(k * step.micros()))
            .collect()
    }

    /// Expected click probability and payment of bid `b`.
    pub fn expected_outcome(&self, b: f64) -> (f64, f64) {
        let m = self.opponents;
        let x = b.min(self.rank_score_max);
        let below = x / self.rank_score_max;
        let (mut p, mut c) = (0.0, 0.0);
        for above in 0..=m {
            let prob = binomial(m, above) * (1.0 - below).powi(above as i32) * below.powi((m - above) as i32);
            let j = (m - above) as f64;
            let clicks = self.position_curve[above] * self.quality;
            p += prob * clicks;
            c += prob * clicks * x * j / (j + 1.0);
        }
        (p, c)
    }

    /// Population deviation curve over the grid.
    pub fn population_curve(&self) -> Result<DeviationCurve, GeometryError> {
        let t = self.bid_schedule.len() as f64;
        let played: Vec<(f64, f64)> = self
            .bid_schedule
            .iter()
            .map(|b| self.expected_outcome(Money::new(*b).expect("valid bid").as_f64()))
            .collect();
        let p0 = played.iter().map(|o| o.0).sum::<f64>() / t;
        let c0 = played.iter().map(|o| o.1).sum::<f64>() / t;
        let grid = self.grid();
        let (dp, dc) = grid
            .iter()
            .map(|b| {
                let (p, c) = self.expected_outcome(b.as_f64());
                (p - p0, c - c0)
            })
            .unzip();
        Ok(DeviationCurve::new(grid.iter().map(|b| b.as_f64()).collect(), dp, dc, p0, c0)?)
    }

    /// Deviation curve estimated from `per_period` simulated auctions in each period.
    pub fn sample_curve(&self, per_period: usize, rng: &mut ChaCha8Rng) -> Result<DeviationCurve, GeometryError> {
        let grid = self.grid();
        let player = BidderId(0);
        let score = Score::new(1.0).expect("unit score");
        let q_max = Money::new(self.rank_score_max).expect("valid range").micros();
        let mut params = AuctionParams {
            entries: (0..=self.opponents as u64)
                .map(|id| BidderEntry {
                    id: BidderId(id),
                    score,
                    quality: if id == 0 { self.quality } else { 1.0 },
                    bid: Money::ZERO,
                })
                .collect(),
            rank_reserve: RankScore::ZERO,
            mainline_reserve: RankScore::ZERO,
            mainline_cap: 0,
            position_curve: self.position_curve.clone(),
            mainline_slots: 0,
        };
        let mut totals = Vec::with_capacity(self.bid_schedule.len());
        for &own in &self.bid_schedule {
            let own = Money::new(own).expect("valid bid");
            let mut period = PeriodTotals::new(grid.len());
            for _ in 0..per_period {
                for e in &mut params.entries[1..] {
                    e.bid = Money::from_micros(rng.gen_range(0..=q_max));
                }
                let auction = PlayerAuction::new(&params, player).expect("valid auction");
                period.add(&auction, own, &grid);
            }
            totals.push(period);
        }
        Ok(combine(&grid, &totals)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudyConfig {
    /// Total sample sizes `N = n T`; each is split evenly across periods.
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub smoothness: Smoothness,
    pub seed: u64,
    pub environment: UniformOpponentEnv,
    pub epsilon_cap: f64,
    pub value_cap: f64,
    pub direction_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub mean_dh: f64,
    /// Standard deviation of the distance across replications.
    pub std_dh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudyReport {
    pub rows: Vec<RateRow>,
    /// OLS slope of `ln mean_dh` on `ln(N^-1 ln N)`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub gamma_target: f64,
}

/// Least-squares slope and its standard error.
pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, stderr)
}

/// Hausdorff distance between estimated and population bounded sets, averaged
/// over replications, for each sample size.
pub fn run_rate_study(config: &RateStudyConfig) -> Result<RateStudyReport, GeometryError> {
    let sizes = &config.sample_sizes;
    if sizes.len() < 3 {
        return Err(GeometryError::RateStudy("at least three sample sizes are needed".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] < 2 {
        return Err(GeometryError::RateStudy("sample sizes must be increasing and at least 2".into()));
    }
    if config.replications == 0 {
        return Err(GeometryError::RateStudy("need at least one replication".into()));
    }
    let s = config.smoothness;
    if !(s.alpha > 0.0 && s.alpha <= 1.0 && s.lipschitz >= 0.0) {
        return Err(GeometryError::RateStudy("smoothness needs 0 < alpha <= 1 and L >= 0".into()));
    }
    let env = &config.environment;
    env.validate()?;
    let periods = env.bid_schedule.len();
    let truth_link = LinkFunction::from_curve(&env.population_curve()?);
    let truth = ConvexPolygon::nr_b(&truth_link, config.epsilon_cap, config.value_cap)?;

    let jobs: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|i| (0..config.replications).map(move |r| (i, r)))
        .collect();
    let distances: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(((i as u64) << 32) | r as u64);
            let per_period = sizes[i].div_ceil(periods);
            let link = LinkFunction::from_curve(&env.sample_curve(per_period, &mut rng)?);
            let estimate = ConvexPolygon::nr_b(&link, config.epsilon_cap, config.value_cap)?;
            hausdorff(&estimate, &truth, config.direction_count)
        })
        .collect::<Result<_, _>>()?;

    let reps = config.replications as f64;
    let rows: Vec<RateRow> = sizes
        .iter()
        .zip(distances.chunks(config.replications))
        .map(|(&n, d)| {
            let mean = d.iter().sum::<f64>() / reps;
            let var = if d.len() > 1 {
                d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1.0)
            } else {
                0.0
            };
            RateRow {
                n,
                mean_dh: mean,
                std_dh: var.sqrt(),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| ((r.n as f64).ln() / r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_dh.ln()).collect();
    let (slope, slope_stderr) = ols_slope(&xs, &ys);
    Ok(RateStudyReport {
        rows,
        slope,
        slope_stderr,
        gamma_target: s.target_exponent(),
    })
}
