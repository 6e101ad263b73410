use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InferenceSettings, PipelineError};
use crate::geometry::LinkFunction;
use crate::inference::{
    build_deviation_curve, min_mult_regret, DeviationCurve, PointPrediction, RationalizableRegion, RegionConfig,
};
use crate::market::ListingHistory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListingArtifact {
    pub listing_id: String,
    pub truth: Option<f64>,
    pub mean_bid: f64,
    pub curve: DeviationCurve,
    pub region: RationalizableRegion,
    pub prediction: PointPrediction,
    /// Mean bid over the predicted value; absent when the prediction is zero.
    pub shading_ratio: Option<f64>,
    /// Whether the cost-per-click link had to be convexified for geometry.
    pub convexified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListingFailure {
    pub listing_id: String,
    pub error: String,
}

/// Histogram bucket over `[lo, hi)`; the first bucket is the single point 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadingEntry {
    pub listing_id: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub listing_id: String,
    pub v_star: f64,
    pub delta_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccountSummary {
    /// Listings with a successful inference.
    pub listing_count: usize,
    pub failed_count: usize,
    pub learning_threshold: f64,
    pub delta_star_histogram: Vec<HistogramBucket>,
    pub shading_ratios: Vec<ShadingEntry>,
    pub scatter: Vec<ScatterPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccountArtifacts {
    pub settings: InferenceSettings,
    pub listings: Vec<ListingArtifact>,
    pub failures: Vec<ListingFailure>,
    pub summary: AccountSummary,
}

fn infer_listing(history: &ListingHistory, settings: &InferenceSettings) -> Result<ListingArtifact, PipelineError> {
    history.validate()?;
    let grid = settings.grid()?;
    let curve = build_deviation_curve(history, &grid)?;
    let region = RationalizableRegion::new(
        curve.clone(),
        &RegionConfig {
            epsilon_cap: settings.epsilon_max,
            value_ceiling: settings.value_ceiling,
            ..RegionConfig::default()
        },
    )?;
    let prediction = min_mult_regret(&curve, settings.precision, region.value_cap)?;
    let mean_bid = history.mean_bid();
    Ok(ListingArtifact {
        listing_id: history.listing_id.clone(),
        truth: history.truth,
        mean_bid,
        convexified: LinkFunction::from_curve(&curve).is_convexified(),
        shading_ratio: (prediction.v_star > 0.0).then(|| mean_bid / prediction.v_star),
        curve,
        region,
        prediction,
    })
}

/// Bucket index for a multiplicative error: 0 for non-positive values, then
/// `buckets` equal-width buckets over `(0, 1)`.
fn bucket_of(delta: f64, buckets: usize) -> usize {
    if delta <= 0.0 {
        return 0;
    }
    1 + ((delta * buckets as f64).floor() as usize).min(buckets - 1)
}

fn summarize(listings: &[ListingArtifact], failed: usize, settings: &InferenceSettings) -> AccountSummary {
    let b = settings.histogram_buckets;
    let mut histogram: Vec<HistogramBucket> = std::iter::once(HistogramBucket {
        lo: 0.0,
        hi: 0.0,
        count: 0,
    })
    .chain((0..b).map(|k| HistogramBucket {
        lo: k as f64 / b as f64,
        hi: (k + 1) as f64 / b as f64,
        count: 0,
    }))
    .collect();
    for l in listings {
        histogram[bucket_of(l.prediction.delta_star, b)].count += 1;
    }
    AccountSummary {
        listing_count: listings.len(),
        failed_count: failed,
        learning_threshold: settings.learning_threshold,
        delta_star_histogram: histogram,
        shading_ratios: listings
            .iter()
            .filter_map(|l| {
                l.shading_ratio.map(|ratio| ShadingEntry {
                    listing_id: l.listing_id.clone(),
                    ratio,
                })
            })
            .collect(),
        scatter: listings
            .iter()
            .filter(|l| l.prediction.delta_star > settings.learning_threshold)
            .map(|l| ScatterPoint {
                listing_id: l.listing_id.clone(),
                v_star: l.prediction.v_star,
                delta_star: l.prediction.delta_star,
            })
            .collect(),
    }
}

/// Runs inference for every listing in parallel. Listings that fail are
/// recorded with their error and left out of the summary.
pub fn infer_account(histories: &[ListingHistory], settings: &InferenceSettings) -> AccountArtifacts {
    let results: Vec<Result<ListingArtifact, ListingFailure>> = histories
        .par_iter()
        .map(|h| {
            infer_listing(h, settings).map_err(|e| ListingFailure {
                listing_id: h.listing_id.clone(),
                error: e.to_string(),
            })
        })
        .collect();
    let mut listings = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(a) => listings.push(a),
            Err(f) => {
                log::warn!("listing {}: {}", f.listing_id, f.error);
                failures.push(f);
            }
        }
    }
    let summary = summarize(&listings, failures.len(), settings);
    AccountArtifacts {
        settings: *settings,
        listings,
        failures,
        summary,
    }
}
