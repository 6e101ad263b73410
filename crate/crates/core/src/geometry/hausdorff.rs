use std::f64::consts::TAU;

use super::polygon::ConvexPolygon;
use super::support::SupportQuery;
use super::GeometryError;

pub const DEFAULT_DIRECTIONS: usize = 720;

pub trait SupportFunction {
    fn support(&self, u: SupportQuery) -> f64;

    /// Vertex representation, when the set is a polygon.
    fn polygon(&self) -> Option<&ConvexPolygon> {
        None
    }
}

fn gap<A, B>(a: &A, b: &B, theta: f64) -> Result<f64, GeometryError>
where
    A: SupportFunction + ?Sized,
    B: SupportFunction + ?Sized,
{
    let u = SupportQuery::from_angle(theta);
    let (ha, hb) = (a.support(u), b.support(u));
    if !(ha.is_finite() && hb.is_finite()) {
        return Err(GeometryError::Unbounded(u.u1, u.u2));
    }
    Ok((ha - hb).abs())
}

/// `sup_u |h_A(u) - h_B(u)|` over `direction_count` evenly spaced directions.
///
/// For two polygons the search also visits every edge normal and, on each arc
/// between consecutive normals (where both extreme vertices are fixed), the
/// direction parallel to the difference of those vertices. That makes the
/// result exact for polygons.
pub fn hausdorff<A, B>(a: &A, b: &B, direction_count: usize) -> Result<f64, GeometryError>
where
    A: SupportFunction + ?Sized,
    B: SupportFunction + ?Sized,
{
    let count = direction_count.max(1);
    let mut angles: Vec<f64> = (0..count).map(|k| TAU * k as f64 / count as f64).collect();
    let polygons = a.polygon().zip(b.polygon());
    if let Some((pa, pb)) = polygons {
        angles.extend(pa.normal_angles().into_iter().chain(pb.normal_angles()).map(|t| t.rem_euclid(TAU)));
        angles.sort_by(f64::total_cmp);
        angles.dedup();
    }
    let mut best = 0.0_f64;
    for (i, &theta) in angles.iter().enumerate() {
        best = best.max(gap(a, b, theta)?);
        let Some((pa, pb)) = polygons else { continue };
        let next = angles.get(i + 1).copied().unwrap_or(angles[0] + TAU);
        let mid = SupportQuery::from_angle(0.5 * (theta + next));
        let (va, vb) = (pa.extreme_point(mid), pb.extreme_point(mid));
        let (dx, dy) = (va.x - vb.x, va.y - vb.y);
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        let phi = dy.atan2(dx);
        for candidate in [phi, phi + std::f64::consts::PI] {
            let c = theta + (candidate - theta).rem_euclid(TAU);
            if c < next {
                best = best.max(gap(a, b, c)?);
            }
        }
    }
    Ok(best)
}
