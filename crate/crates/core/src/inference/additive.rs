use serde::{Deserialize, Serialize};

use super::envelope::UpperEnvelope;
use super::DeviationCurve;

/// Slack allowed when testing a point against the half-plane constraints.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Row coefficients at or below this magnitude are treated as zero.
pub(crate) const COEF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalizablePoint {
    pub value: f64,
    pub epsilon: f64,
}

/// Closed interval `[lo, hi]`; `hi` may be infinite when no cap applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ValueInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Intersects `{v in [0, cap] : a v <= rhs}` over all rows.
pub(crate) fn solve_rows(rows: impl Iterator<Item = (f64, f64)>, cap: f64) -> Option<ValueInterval> {
    let (mut lo, mut hi) = (0.0_f64, cap);
    for (a, rhs) in rows {
        if a.abs() <= COEF_TOL {
            if rhs < -COEF_TOL {
                return None;
            }
        } else if a > 0.0 {
            hi = hi.min(rhs / a);
        } else {
            lo = lo.max(rhs / a);
        }
    }
    if lo <= hi {
        Some(ValueInterval { lo, hi })
    } else if lo - hi <= 1e-12 * lo.abs().max(1.0) {
        // rounding at a tangency
        let v = 0.5 * (lo + hi);
        Some(ValueInterval { lo: v, hi: v })
    } else {
        None
    }
}

pub fn feasible(curve: &DeviationCurve, point: RationalizablePoint) -> bool {
    curve
        .rows()
        .all(|(dp, dc)| point.value * dp <= dc + point.epsilon + FEASIBILITY_TOL)
}

/// Values rationalizable at regret `epsilon`, within `[0, value_cap]`.
pub fn value_interval(curve: &DeviationCurve, epsilon: f64, value_cap: f64) -> Option<ValueInterval> {
    solve_rows(curve.rows().map(|(dp, dc)| (dp, dc + epsilon)), value_cap)
}

/// Smallest regret that rationalizes value `v`.
pub fn boundary(curve: &DeviationCurve, v: f64) -> f64 {
    curve
        .rows()
        .map(|(dp, dc)| v * dp - dc)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid index of the most profitable deviation at value `v`, preferring lower bids on ties.
pub fn best_deviation_index(curve: &DeviationCurve, v: f64) -> usize {
    let mut best = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for (k, (dp, dc)) in curve.rows().enumerate() {
        let gain = v * dp - dc;
        if gain > best_gain + 1e-12 {
            best = k;
            best_gain = gain;
        }
    }
    best
}

pub fn best_deviation(curve: &DeviationCurve, v: f64) -> f64 {
    curve.grid[best_deviation_index(curve, v)]
}

/// Minimal additive regret and the values that attain it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveMinimum {
    pub epsilon_min: f64,
    /// Smallest minimizing value.
    pub argmin: f64,
    pub values: ValueInterval,
}

fn envelope(curve: &DeviationCurve) -> UpperEnvelope {
    UpperEnvelope::new(curve.rows().map(|(dp, dc)| (dp, -dc))).expect("curve has at least one row")
}

/// Exact minimum of the boundary over `[0, value_cap]`.
///
/// With an infinite cap and no row that raises clicks the minimum is `-inf`.
pub fn min_additive_regret(curve: &DeviationCurve, value_cap: f64) -> AdditiveMinimum {
    let (argmin, epsilon_min) = envelope(curve).minimize(0.0, value_cap);
    let values = if epsilon_min.is_finite() {
        value_interval(curve, epsilon_min, value_cap).unwrap_or(ValueInterval {
            lo: argmin,
            hi: argmin,
        })
    } else {
        ValueInterval {
            lo: f64::INFINITY,
            hi: f64::INFINITY,
        }
    };
    AdditiveMinimum {
        epsilon_min,
        argmin,
        values,
    }
}

/// Ladder-and-bisection search for the minimal regret, used to cross-check
/// [`min_additive_regret`]. Requires a finite cap.
pub fn min_additive_regret_ladder(curve: &DeviationCurve, value_cap: f64, rungs: usize, tol: f64) -> f64 {
    assert!(value_cap.is_finite(), "ladder search needs a finite value cap");
    // max-min never exceeds min-max, so this rung is infeasible or tight.
    let lower = curve
        .rows()
        .map(|(dp, dc)| (-dc).min(value_cap * dp - dc))
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = boundary(curve, 0.0);
    let nonempty = |eps: f64| value_interval(curve, eps, value_cap).is_some();
    if nonempty(lower) {
        return lower;
    }
    let rungs = rungs.max(1);
    let step = (upper - lower) / rungs as f64;
    let (mut lo, mut hi) = (lower, upper);
    for k in 1..=rungs {
        let eps = lower + step * k as f64;
        if nonempty(eps) {
            hi = eps;
            lo = eps - step;
            break;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if nonempty(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro() -> DeviationCurve {
        DeviationCurve::from_rows(&[(0.1, 0.06), (-0.2, -0.15)], 0.4, 0.2).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn feasibility_is_tight_at_the_kink() {
        let c = micro();
        assert!(feasible(&c, RationalizablePoint { value: 0.7, epsilon: 0.01 }));
        assert!(!feasible(&c, RationalizablePoint { value: 0.7, epsilon: 0.009 }));
        assert!(feasible(&c, RationalizablePoint { value: 0.0, epsilon: 1e6 }));
    }

    #[test]
    fn interval_examples() {
        let c = micro();
        let i = value_interval(&c, 0.02, f64::INFINITY).unwrap();
        assert!(close(i.lo, 0.65) && close(i.hi, 0.8));
        let i = value_interval(&c, 0.01, f64::INFINITY).unwrap();
        assert!(close(i.lo, 0.7) && close(i.hi, 0.7));
        assert_eq!(value_interval(&c, 0.0, f64::INFINITY), None);
        let i = value_interval(&c, 0.02, 0.75).unwrap();
        assert_eq!(i.hi, 0.75);
    }

    #[test]
    fn minimal_regret_at_the_kink() {
        let m = min_additive_regret(&micro(), f64::INFINITY);
        assert!(close(m.epsilon_min, 0.01));
        assert!(close(m.argmin, 0.7));
        assert!(close(m.values.lo, 0.7) && close(m.values.hi, 0.7));
        let ladder = min_additive_regret_ladder(&micro(), 5.0, 64, 1e-10);
        assert!((ladder - 0.01).abs() < 1e-9);
    }

    #[test]
    fn positive_rows_only_minimize_at_zero() {
        let c = DeviationCurve::from_rows(&[(0.1, 0.02), (0.3, 0.1)], 0.5, 0.1).unwrap();
        let m = min_additive_regret(&c, f64::INFINITY);
        assert_eq!(m.argmin, 0.0);
        assert!(close(m.epsilon_min, -0.02));
    }

    #[test]
    fn boundary_and_best_deviation_examples() {
        let c = micro();
        assert!(close(boundary(&c, 0.7), 0.01));
        assert!(close(boundary(&c, 0.0), 0.15));
        assert_eq!(best_deviation_index(&c, 1.0), 0);
        assert_eq!(best_deviation_index(&c, 0.5), 1);
        let with_identity = DeviationCurve::from_rows(&[(-0.2, -0.15), (0.0, 0.0), (0.1, 0.06)], 0.4, 0.2).unwrap();
        for k in 0..50 {
            assert!(boundary(&with_identity, k as f64 * 0.1) >= 0.0);
        }
    }

    #[test]
    fn ties_prefer_the_lower_bid() {
        let c = DeviationCurve::from_rows(&[(0.0, 0.0), (0.1, 0.05), (0.2, 0.1)], 0.5, 0.1).unwrap();
        assert_eq!(best_deviation_index(&c, 0.5), 0);
    }
}
