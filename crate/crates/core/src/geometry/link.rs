use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::inference::DeviationCurve;

/// Piecewise-linear `f(z)`: the cost change needed to change clicks by `z`.
///
/// Knots are the lower convex hull of the curve's `(dP, dC)` rows. Rows
/// sharing a click change keep the cheapest cost, the only one that binds the
/// rationalizable set. `convexified` records whether some row lay strictly
/// above the hull, i.e. whether the raw link was not convex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkFunction {
    z_knots: Vec<f64>,
    c_values: Vec<f64>,
    convexified: bool,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

impl LinkFunction {
    pub fn from_knots(points: &[(f64, f64)]) -> Result<Self, GeometryError> {
        let mut pts: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|(z, c)| z.is_finite() && c.is_finite())
            .collect();
        if pts.is_empty() {
            return Err(GeometryError::EmptyLink);
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|later, kept| later.0 == kept.0);

        let scale = pts.iter().fold(1.0_f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
        let mut convexified = false;
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            while hull.len() >= 2 {
                let turn = cross(hull[hull.len() - 2], hull[hull.len() - 1], p);
                if turn > 0.0 {
                    break;
                }
                if turn < -1e-12 * scale * scale {
                    convexified = true;
                }
                hull.pop();
            }
            hull.push(p);
        }
        Ok(LinkFunction {
            z_knots: hull.iter().map(|p| p.0).collect(),
            c_values: hull.iter().map(|p| p.1).collect(),
            convexified,
        })
    }

    pub fn from_curve(curve: &DeviationCurve) -> Self {
        let rows: Vec<(f64, f64)> = curve.rows().collect();
        LinkFunction::from_knots(&rows).expect("validated curves have finite rows")
    }

    pub fn z_knots(&self) -> &[f64] {
        &self.z_knots
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    pub fn is_convexified(&self) -> bool {
        self.convexified
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.z_knots[0], self.z_knots[self.z_knots.len() - 1])
    }

    /// Linear interpolation between knots; `None` outside the knot range.
    pub fn eval(&self, z: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&z) {
            return None;
        }
        let i = self.z_knots.partition_point(|k| *k < z);
        if i < self.z_knots.len() && self.z_knots[i] == z {
            return Some(self.c_values[i]);
        }
        let (z0, z1) = (self.z_knots[i - 1], self.z_knots[i]);
        let (c0, c1) = (self.c_values[i - 1], self.c_values[i]);
        Some(c0 + (c1 - c0) * (z - z0) / (z1 - z0))
    }

    /// `max_k (v z_k - c_k)`: the regret boundary at value `v`.
    pub fn conjugate(&self, v: f64) -> f64 {
        self.z_knots
            .iter()
            .zip(&self.c_values)
            .map(|(z, c)| v * z - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest and largest knot maximizing `v z - c`, the one-sided slopes of
    /// the boundary at `v`.
    pub(crate) fn active_knots(&self, v: f64) -> (f64, f64) {
        let best = self.conjugate(v);
        let tol = 1e-12 * best.abs().max(1.0);
        let mut active = self
            .z_knots
            .iter()
            .zip(&self.c_values)
            .filter(|(z, c)| v * **z - **c >= best - tol)
            .map(|(z, _)| *z);
        let first = active.next().expect("at least one knot attains the max");
        let last = active.next_back().unwrap_or(first);
        (first, last)
    }

    /// Slopes of consecutive hull segments, i.e. the values at which the
    /// boundary changes its active knot.
    pub(crate) fn segment_slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.z_knots
            .windows(2)
            .zip(self.c_values.windows(2))
            .map(|(z, c)| (c[1] - c[0]) / (z[1] - z[0]))
    }
}

pub fn link_eval(link: &LinkFunction, z: f64) -> Option<f64> {
    link.eval(z)
}
