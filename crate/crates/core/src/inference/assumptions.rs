use serde::{Deserialize, Serialize};

use super::DeviationCurve;

const ICC_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DeltaPDecreasing,
    DeltaCDecreasing,
    IccDecreasing,
}

/// A pair of grid indices at which an assumption fails. For ICC violations
/// the pair is the later of the two consecutive segments being compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionViolation {
    pub kind: ViolationKind,
    pub first: usize,
    pub second: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub delta_p_monotone: bool,
    pub delta_c_monotone: bool,
    pub icc_increasing: bool,
    pub violation_sites: Vec<AssumptionViolation>,
}

/// Incremental cost per click between rows `i` and `j`; `None` when their
/// click changes coincide.
pub fn icc(curve: &DeviationCurve, i: usize, j: usize) -> Option<f64> {
    let dp = curve.delta_p[j] - curve.delta_p[i];
    if dp == 0.0 {
        return None;
    }
    Some((curve.delta_c[j] - curve.delta_c[i]) / dp)
}

pub fn check_assumptions(curve: &DeviationCurve) -> AssumptionReport {
    let mut sites = Vec::new();
    for k in 1..curve.len() {
        if curve.delta_p[k] < curve.delta_p[k - 1] {
            sites.push(AssumptionViolation {
                kind: ViolationKind::DeltaPDecreasing,
                first: k - 1,
                second: k,
            });
        }
        if curve.delta_c[k] < curve.delta_c[k - 1] {
            sites.push(AssumptionViolation {
                kind: ViolationKind::DeltaCDecreasing,
                first: k - 1,
                second: k,
            });
        }
    }
    let delta_p_monotone = !sites.iter().any(|s| s.kind == ViolationKind::DeltaPDecreasing);
    let delta_c_monotone = !sites.iter().any(|s| s.kind == ViolationKind::DeltaCDecreasing);

    // ICC along consecutive rows, skipping pairs with equal click changes.
    let mut icc_increasing = true;
    let mut previous: Option<f64> = None;
    for k in 1..curve.len() {
        let Some(current) = icc(curve, k - 1, k) else {
            continue;
        };
        if let Some(prev) = previous {
            if current < prev - ICC_TOL * prev.abs().max(1.0) {
                icc_increasing = false;
                sites.push(AssumptionViolation {
                    kind: ViolationKind::IccDecreasing,
                    first: k - 1,
                    second: k,
                });
            }
        }
        previous = Some(current);
    }
    AssumptionReport {
        delta_p_monotone,
        delta_c_monotone,
        icc_increasing,
        violation_sites: sites,
    }
}
