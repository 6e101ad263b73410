use serde::{Deserialize, Serialize};

use super::hausdorff::SupportFunction;
use super::{GeometryError, LinkFunction};

const UNIT_TOL: f64 = 1e-9;

/// Unit direction in the `(v, eps)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportQuery {
    pub u1: f64,
    pub u2: f64,
}

impl SupportQuery {
    pub fn new(u1: f64, u2: f64) -> Result<Self, GeometryError> {
        let norm = u1.hypot(u2);
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(GeometryError::NotUnit(u1, u2));
        }
        Ok(SupportQuery { u1, u2 })
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(x: f64, y: f64) -> Result<Self, GeometryError> {
        let norm = x.hypot(y);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(GeometryError::NotUnit(x, y));
        }
        Ok(SupportQuery {
            u1: x / norm,
            u2: y / norm,
        })
    }

    pub fn from_angle(theta: f64) -> Self {
        SupportQuery {
            u1: theta.cos(),
            u2: theta.sin(),
        }
    }
}

/// Support function of the unbounded rationalizable set (values over the whole line).
pub fn support_nr(link: &LinkFunction, u: SupportQuery) -> f64 {
    if u.u2 >= 0.0 {
        return f64::INFINITY;
    }
    let scale = -u.u2;
    link.eval(u.u1 / scale).map_or(f64::INFINITY, |f| scale * f)
}

/// Support function of the set truncated to `0 <= v <= value_cap`,
/// `eps <= epsilon_cap`; `epsilon_floor` is the boundary at `v = 0`.
///
/// When `value_cap` is the furthest rationalizable value the boundary there
/// equals `epsilon_cap`; a smaller cap cuts the set along a vertical edge and
/// the lower corner sits at the boundary value instead.
pub fn support_nrb(
    link: &LinkFunction,
    u: SupportQuery,
    epsilon_cap: f64,
    value_cap: f64,
    epsilon_floor: f64,
) -> Result<f64, GeometryError> {
    let at_cap = check_caps(link, epsilon_cap, value_cap, epsilon_floor)?;
    Ok(nrb_value(link, u, epsilon_cap, value_cap, epsilon_floor, at_cap))
}

fn check_caps(link: &LinkFunction, epsilon_cap: f64, value_cap: f64, epsilon_floor: f64) -> Result<f64, GeometryError> {
    if !(value_cap.is_finite() && value_cap >= 0.0) {
        return Err(GeometryError::InvalidValueCap(value_cap));
    }
    let at_cap = link.conjugate(value_cap);
    let tol = 1e-12 * epsilon_cap.abs().max(1.0);
    if !(epsilon_cap > epsilon_floor && at_cap <= epsilon_cap + tol) {
        return Err(GeometryError::CapsTooTight {
            cap: epsilon_cap,
            at_zero: epsilon_floor,
            at_cap,
        });
    }
    Ok(at_cap.min(epsilon_cap))
}

fn nrb_value(link: &LinkFunction, u: SupportQuery, eps_cap: f64, v_cap: f64, eps_floor: f64, at_cap: f64) -> f64 {
    if u.u2 < 0.0 {
        let scale = -u.u2;
        let z = u.u1 / scale;
        let (_, z_lo) = link.active_knots(0.0);
        let (z_hi, _) = link.active_knots(v_cap);
        if z < z_lo {
            u.u2 * eps_floor
        } else if z > z_hi {
            u.u1 * v_cap + u.u2 * at_cap
        } else {
            scale * link.eval(z).expect("z lies between two knots")
        }
    } else if u.u1 >= 0.0 {
        u.u1 * v_cap + u.u2 * eps_cap
    } else {
        u.u2 * eps_cap
    }
}

pub struct NrSupport<'a> {
    pub link: &'a LinkFunction,
}

impl SupportFunction for NrSupport<'_> {
    fn support(&self, u: SupportQuery) -> f64 {
        support_nr(self.link, u)
    }
}

/// Bounded set with its floor taken from the link itself.
pub struct NrbSupport<'a> {
    link: &'a LinkFunction,
    epsilon_cap: f64,
    value_cap: f64,
    epsilon_floor: f64,
    at_cap: f64,
}

impl<'a> NrbSupport<'a> {
    pub fn new(link: &'a LinkFunction, epsilon_cap: f64, value_cap: f64) -> Result<Self, GeometryError> {
        let epsilon_floor = link.conjugate(0.0);
        let at_cap = check_caps(link, epsilon_cap, value_cap, epsilon_floor)?;
        Ok(NrbSupport {
            link,
            epsilon_cap,
            value_cap,
            epsilon_floor,
            at_cap,
        })
    }
}

impl SupportFunction for NrbSupport<'_> {
    fn support(&self, u: SupportQuery) -> f64 {
        nrb_value(self.link, u, self.epsilon_cap, self.value_cap, self.epsilon_floor, self.at_cap)
    }
}
