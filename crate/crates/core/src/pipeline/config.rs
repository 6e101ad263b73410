use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::auction::Money;
use crate::geometry::{RateStudyConfig, Smoothness, UniformOpponentEnv, DEFAULT_DIRECTIONS};
use crate::inference::DEFAULT_PRECISION;
use crate::market::{
    uniform_grid, Algorithm, BackgroundSpec, Drift, LearnerConfig, MarketSpec, SimBidder, UniformRange,
};

/// Flat run configuration. Every key is optional; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub jobs: Option<usize>,
    /// Spacing of the counterfactual bid grid.
    pub grid_step: f64,
    /// Upper end of the bid grid.
    pub bid_max: f64,
    /// Largest plausible additive regret.
    pub epsilon_max: Option<f64>,
    pub value_ceiling: Option<f64>,
    pub precision: f64,
    /// Listings with a multiplicative error above this count as still learning.
    pub learning_threshold: f64,
    pub histogram_buckets: usize,
    /// When set, raw periods are pooled into windows of this many periods.
    pub batch_window: Option<u64>,

    pub algorithm: Algorithm,
    pub listings: usize,
    pub periods: usize,
    pub auctions_per_period: usize,
    pub value_min: f64,
    pub value_max: f64,
    pub learning_rate: Option<f64>,
    pub exploration: f64,
    pub opponents: usize,
    pub opponent_bid_max: f64,
    pub position_curve: Vec<f64>,
    pub mainline_slots: usize,
    pub rank_reserve: f64,
    pub mainline_reserve: f64,
    pub drift_amplitude: f64,
    pub drift_period: f64,

    pub rate_sample_sizes: Vec<usize>,
    pub rate_replications: usize,
    pub direction_count: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            jobs: None,
            grid_step: 0.01,
            bid_max: 1.0,
            epsilon_max: None,
            value_ceiling: None,
            precision: DEFAULT_PRECISION,
            learning_threshold: 1e-4,
            histogram_buckets: 20,
            batch_window: None,
            algorithm: Algorithm::Hedge,
            listings: 4,
            periods: 200,
            auctions_per_period: 5,
            value_min: 0.3,
            value_max: 0.9,
            learning_rate: None,
            exploration: 0.1,
            opponents: 4,
            opponent_bid_max: 1.0,
            position_curve: vec![1.0, 0.7, 0.5, 0.35, 0.25],
            mainline_slots: 2,
            rank_reserve: 0.05,
            mainline_reserve: 0.2,
            drift_amplitude: 0.0,
            drift_period: 100.0,
            rate_sample_sizes: vec![1_000, 10_000, 100_000, 1_000_000],
            rate_replications: 20,
            direction_count: DEFAULT_DIRECTIONS,
        }
    }
}

/// The subset of [`Config`] that inference reads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceSettings {
    pub grid_step: f64,
    pub bid_max: f64,
    pub epsilon_max: f64,
    pub value_ceiling: Option<f64>,
    pub precision: f64,
    pub learning_threshold: f64,
    pub histogram_buckets: usize,
}

impl InferenceSettings {
    pub fn grid(&self) -> Result<Vec<Money>, PipelineError> {
        bid_grid(self.grid_step, self.bid_max)
    }
}

fn bid_grid(step: f64, max: f64) -> Result<Vec<Money>, PipelineError> {
    let bad = |m: String| PipelineError::Config(m);
    let step = Money::new(step).map_err(|e| bad(format!("grid_step: {e}")))?;
    let max = Money::new(max).map_err(|e| bad(format!("bid_max: {e}")))?;
    if step.micros() == 0 {
        return Err(bad("grid_step must be positive".into()));
    }
    Ok(uniform_grid(max, step)?)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn inference(&self) -> Result<InferenceSettings, PipelineError> {
        let epsilon_max = self
            .epsilon_max
            .ok_or_else(|| PipelineError::Config("epsilon_max is required for inference".into()))?;
        if !(self.learning_threshold >= 0.0) || self.histogram_buckets == 0 {
            return Err(PipelineError::Config(
                "learning_threshold must be non-negative and histogram_buckets positive".into(),
            ));
        }
        Ok(InferenceSettings {
            grid_step: self.grid_step,
            bid_max: self.bid_max,
            epsilon_max,
            value_ceiling: self.value_ceiling,
            precision: self.precision,
            learning_threshold: self.learning_threshold,
            histogram_buckets: self.histogram_buckets,
        })
    }

    pub fn rate_study(&self) -> Result<RateStudyConfig, PipelineError> {
        Ok(RateStudyConfig {
            sample_sizes: self.rate_sample_sizes.clone(),
            replications: self.rate_replications,
            smoothness: Smoothness {
                k: 0,
                alpha: 1.0,
                lipschitz: 1.0,
            },
            seed: self.seed,
            environment: UniformOpponentEnv::default(),
            epsilon_cap: self.epsilon_max.unwrap_or(1.0),
            value_cap: self.value_ceiling.unwrap_or(1.0),
            direction_count: self.direction_count,
        })
    }
}

/// Market and learners described by the simulation keys. Values are drawn
/// uniformly from `[value_min, value_max]` using the config seed.
pub fn simulation_setup(config: &Config) -> Result<(MarketSpec, Vec<SimBidder>), PipelineError> {
    if !(config.value_min >= 0.0 && config.value_min <= config.value_max) {
        return Err(PipelineError::Config("need 0 <= value_min <= value_max".into()));
    }
    let grid = bid_grid(config.grid_step, config.bid_max)?;
    let spec = MarketSpec {
        position_curve: config.position_curve.clone(),
        mainline_slots: config.mainline_slots,
        mainline_cap: config.mainline_slots,
        rank_reserve: config.rank_reserve,
        mainline_reserve: config.mainline_reserve,
        bid_max: config.bid_max,
        background: BackgroundSpec {
            count: config.opponents,
            bid: UniformRange {
                lo: 0.0,
                hi: config.opponent_bid_max,
            },
            score: UniformRange { lo: 0.5, hi: 1.5 },
            quality: UniformRange { lo: 0.5, hi: 1.0 },
            drift: (config.drift_amplitude != 0.0).then_some(Drift {
                amplitude: config.drift_amplitude,
                period: config.drift_period,
            }),
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::MAX);
    let bidders = (0..config.listings)
        .map(|i| SimBidder {
            listing_id: format!("L{i}"),
            value: if config.value_min == config.value_max {
                config.value_min
            } else {
                let v = rng.gen_range(config.value_min..=config.value_max);
                Money::new(v).map(Money::as_f64).unwrap_or(v)
            },
            score: UniformRange { lo: 0.8, hi: 1.2 },
            quality: UniformRange { lo: 0.6, hi: 1.0 },
            learner: LearnerConfig {
                algorithm: config.algorithm,
                bid_grid: grid.clone(),
                learning_rate: config.learning_rate,
                exploration: config.exploration,
                seed: i as u64,
            },
        })
        .collect();
    Ok((spec, bidders))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::parse("grid_stepp = 0.01\n").unwrap_err();
        assert!(err.to_string().contains("grid_stepp"));
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = Config::parse("epsilon_max = 0.5\nalgorithm = \"epsilon_greedy\"\nbatch_window = 7\n").unwrap();
        assert_eq!(c.epsilon_max, Some(0.5));
        assert_eq!(c.algorithm, Algorithm::EpsilonGreedy);
        assert_eq!(c.batch_window, Some(7));
        assert_eq!(c.grid_step, 0.01);
        assert_eq!(c.inference().unwrap().epsilon_max, 0.5);
    }

    #[test]
    fn inference_requires_epsilon_max() {
        assert!(matches!(Config::default().inference(), Err(PipelineError::Config(_))));
    }

    #[test]
    fn simulation_setup_is_seeded() {
        let c = Config::default();
        let (_, a) = simulation_setup(&c).unwrap();
        let (_, b) = simulation_setup(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), c.listings);
        assert!(a.iter().all(|s| (c.value_min..=c.value_max).contains(&s.value)));
    }
}
