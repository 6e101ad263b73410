use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AccountArtifacts, PipelineError};
use crate::auction::Money;
use crate::geometry::RateStudyReport;
use crate::inference::boundary;

#[derive(Serialize)]
struct PredictionRow<'a> {
    listing_id: &'a str,
    delta_star: f64,
    v_star: f64,
    eps0: f64,
    shading_ratio: Option<f64>,
}

#[derive(Serialize)]
struct BoundaryRow {
    v: f64,
    epsilon: f64,
}

#[derive(Serialize)]
struct HistogramRow {
    bucket_lo: f64,
    bucket_hi: f64,
    count: usize,
}

#[derive(Serialize)]
struct RateSummary {
    slope: f64,
    slope_stderr: f64,
    gamma_target: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| PipelineError::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn write_artifacts(path: &Path, artifacts: &AccountArtifacts) -> Result<(), PipelineError> {
    write_json(path, artifacts)
}

pub fn read_artifacts(path: &Path) -> Result<AccountArtifacts, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Writes the plot-ready files and returns their paths.
///
/// Boundary files sample the regret boundary at multiples of the grid step up
/// to the value cap, plus the cap itself.
pub fn export(artifacts: &AccountArtifacts, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let mut written = Vec::new();
    let step = Money::new(artifacts.settings.grid_step)
        .map_err(|e| PipelineError::Config(format!("grid_step: {e}")))?
        .micros()
        .max(1);

    for l in &artifacts.listings {
        let path = out_dir.join(format!("nr_boundary_{}.csv", safe_name(&l.listing_id)));
        let cap = l.region.value_cap;
        let mut vs: Vec<f64> = (0..)
            .map(|i: u64| Money::from_micros(i * step).as_f64())
            .take_while(|v| *v <= cap)
            .collect();
        if vs.last() != Some(&cap) {
            vs.push(cap);
        }
        let rows = vs.into_iter().map(|v| BoundaryRow {
            v,
            epsilon: boundary(&l.curve, v),
        });
        write_csv(&path, rows, &["v", "epsilon"])?;
        written.push(path);
    }

    let path = out_dir.join("predictions.json");
    let predictions: Vec<PredictionRow> = artifacts
        .listings
        .iter()
        .map(|l| PredictionRow {
            listing_id: &l.listing_id,
            delta_star: l.prediction.delta_star,
            v_star: l.prediction.v_star,
            eps0: l.prediction.epsilon_min,
            shading_ratio: l.shading_ratio,
        })
        .collect();
    write_json(&path, &predictions)?;
    written.push(path);

    let path = out_dir.join("account_summary.json");
    write_json(&path, &artifacts.summary)?;
    written.push(path);

    let path = out_dir.join("histogram_delta.csv");
    let rows = artifacts.summary.delta_star_histogram.iter().map(|b| HistogramRow {
        bucket_lo: b.lo,
        bucket_hi: b.hi,
        count: b.count,
    });
    write_csv(&path, rows, &["bucket_lo", "bucket_hi", "count"])?;
    written.push(path);

    let path = out_dir.join("scatter_v_delta.csv");
    write_csv(&path, &artifacts.summary.scatter, &["listing_id", "v_star", "delta_star"])?;
    written.push(path);
    Ok(written)
}

/// `rate_study.csv` (N, mean_dh, std_dh) and `rate_study.json` (slope summary).
pub fn write_rate_study(report: &RateStudyReport, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let csv_path = out_dir.join("rate_study.csv");
    write_csv(&csv_path, &report.rows, &["N", "mean_dh", "std_dh"])?;
    let json_path = out_dir.join("rate_study.json");
    write_json(
        &json_path,
        &RateSummary {
            slope: report.slope,
            slope_stderr: report.slope_stderr,
            gamma_target: report.gamma_target,
        },
    )?;
    Ok(vec![csv_path, json_path])
}
