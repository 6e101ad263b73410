use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MarketError;
use crate::auction::Money;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hedge,
    EpsilonGreedy,
    /// Clairvoyant per-period best response against the drawn auctions.
    FixedBestResponse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub bid_grid: Vec<Money>,
    /// Hedge step size; `None` selects `sqrt(8 ln K / T)` for the run length.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub exploration: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LearnerConfig {
    pub fn validate(&self, bid_max: Money) -> Result<(), MarketError> {
        let grid = &self.bid_grid;
        if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[grid.len() - 1] > bid_max {
            return Err(MarketError::InvalidGrid {
                max: bid_max.as_f64(),
            });
        }
        if let Some(eta) = self.learning_rate {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(MarketError::InvalidLearner(format!("learning rate {eta}")));
            }
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            return Err(MarketError::InvalidLearner(format!(
                "exploration {}",
                self.exploration
            )));
        }
        Ok(())
    }
}

/// Multiples of `step` from zero up to and including `bid_max` (when it is a multiple).
pub fn uniform_grid(bid_max: Money, step: Money) -> Result<Vec<Money>, MarketError> {
    if step.micros() == 0 {
        return Err(MarketError::InvalidGrid {
            max: bid_max.as_f64(),
        });
    }
    Ok((0..=bid_max.micros() / step.micros())
        .map(|k| Money::from_micros(k * step.micros()))
        .collect())
}

pub fn tuned_learning_rate(arms: usize, horizon: usize) -> f64 {
    let arms = arms.max(2) as f64;
    (8.0 * arms.ln() / horizon.max(1) as f64).sqrt()
}

/// One exponential-weights update: `w'_k ∝ w_k exp(eta * payoff_k)`.
pub fn hedge_step(weights: &[f64], payoffs: &[f64], eta: f64) -> Result<Vec<f64>, MarketError> {
    if weights.len() != payoffs.len() {
        return Err(MarketError::LengthMismatch(weights.len(), payoffs.len()));
    }
    if let Some(&bad) = payoffs.iter().find(|p| !p.is_finite()) {
        return Err(MarketError::NonFinitePayoff(bad));
    }
    // Subtracting the max payoff leaves the normalized result unchanged.
    let top = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = weights
        .iter()
        .zip(payoffs)
        .map(|(w, p)| w * (eta * (p - top)).exp())
        .collect();
    let total: f64 = out.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(MarketError::InvalidLearner("weights vanished".into()));
    }
    out.iter_mut().for_each(|w| *w /= total);
    Ok(out)
}

enum State {
    Hedge { weights: Vec<f64>, eta: f64 },
    EpsilonGreedy { totals: Vec<f64>, rounds: usize },
    BestResponse,
}

/// Runtime state of one learning bidder.
pub(crate) struct Learner {
    pub(crate) config: LearnerConfig,
    pub(crate) value: f64,
    /// Width of the per-auction payoff range, used to normalize Hedge payoffs.
    scale: f64,
    state: State,
    rng: ChaCha8Rng,
}

impl Learner {
    pub(crate) fn new(config: LearnerConfig, value: f64, scale: f64, horizon: usize, rng: ChaCha8Rng) -> Self {
        let k = config.bid_grid.len();
        let state = match config.algorithm {
            Algorithm::Hedge => State::Hedge {
                weights: vec![1.0 / k as f64; k],
                eta: config
                    .learning_rate
                    .unwrap_or_else(|| tuned_learning_rate(k, horizon)),
            },
            Algorithm::EpsilonGreedy => State::EpsilonGreedy {
                totals: vec![0.0; k],
                rounds: 0,
            },
            Algorithm::FixedBestResponse => State::BestResponse,
        };
        Learner {
            config,
            value,
            scale: if scale > 0.0 { scale } else { 1.0 },
            state,
            rng,
        }
    }

    pub(crate) fn is_best_response(&self) -> bool {
        matches!(self.state, State::BestResponse)
    }

    /// Grid index committed to for the coming period; `None` for best responders,
    /// whose bid is chosen after the period's auctions are drawn.
    pub(crate) fn choose(&mut self) -> Option<usize> {
        let k = self.config.bid_grid.len();
        match &self.state {
            State::Hedge { weights, .. } => {
                let dist = WeightedIndex::new(weights).ok()?;
                Some(dist.sample(&mut self.rng))
            }
            State::EpsilonGreedy { totals, rounds } => {
                if *rounds == 0 || self.rng.gen::<f64>() < self.config.exploration {
                    return Some(self.rng.gen_range(0..k));
                }
                Some(argmax(totals))
            }
            State::BestResponse => None,
        }
    }

    /// Full-information feedback: the period's mean payoff of every grid bid.
    pub(crate) fn observe(&mut self, payoffs: &[f64]) -> Result<(), MarketError> {
        match &mut self.state {
            State::Hedge { weights, eta } => {
                let scaled: Vec<f64> = payoffs.iter().map(|p| p / self.scale).collect();
                *weights = hedge_step(weights, &scaled, *eta)?;
            }
            State::EpsilonGreedy { totals, rounds } => {
                totals.iter_mut().zip(payoffs).for_each(|(t, p)| *t += p);
                *rounds += 1;
            }
            State::BestResponse => {}
        }
        Ok(())
    }
}

/// First index attaining the maximum.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hedge_equal_payoffs_keep_uniform() {
        let w = hedge_step(&[0.25; 4], &[0.3; 4], 1.7).unwrap();
        for x in w {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn hedge_zero_rate_is_identity() {
        let w0 = [0.1, 0.6, 0.3];
        let w = hedge_step(&w0, &[5.0, -2.0, 0.0], 0.0).unwrap();
        for (a, b) in w.iter().zip(w0) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hedge_doubles_the_winner_at_ln2() {
        let w = hedge_step(&[0.5, 0.5], &[1.0, 0.0], std::f64::consts::LN_2).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hedge_rejects_non_finite_payoff() {
        assert!(matches!(
            hedge_step(&[0.5, 0.5], &[f64::NAN, 0.0], 1.0),
            Err(MarketError::NonFinitePayoff(_))
        ));
    }

    #[test]
    fn grid_includes_endpoint() {
        let g = uniform_grid(Money::new(1.0).unwrap(), Money::new(0.25).unwrap()).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], Money::new(1.0).unwrap());
        assert!(uniform_grid(Money::new(1.0).unwrap(), Money::ZERO).is_err());
    }

    #[test]
    fn config_rejects_grid_above_cap() {
        let cfg = LearnerConfig {
            algorithm: Algorithm::Hedge,
            bid_grid: vec![Money::new(0.5).unwrap(), Money::new(2.0).unwrap()],
            learning_rate: None,
            exploration: 0.0,
            seed: 0,
        };
        assert!(cfg.validate(Money::new(1.0).unwrap()).is_err());
        assert!(cfg.validate(Money::new(2.0).unwrap()).is_ok());
    }
}
