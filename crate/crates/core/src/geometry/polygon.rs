use serde::{Deserialize, Serialize};

use super::hausdorff::SupportFunction;
use super::support::SupportQuery;
use super::{GeometryError, LinkFunction};
use crate::inference::RationalizableRegion;

/// Point in the `(v, eps)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn dot(self, u: SupportQuery) -> f64 {
        self.x * u.u1 + self.y * u.u2
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull of finitely many points, vertices counter-clockwise without
/// collinear repeats. May degenerate to a segment or a single point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn hull(points: &[Point]) -> Result<Self, GeometryError> {
        let mut pts: Vec<Point> = points
            .iter()
            .copied()
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .collect();
        if pts.is_empty() {
            return Err(GeometryError::EmptyPolygon);
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Ok(ConvexPolygon { vertices: pts });
        }
        let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
        for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
            let start = hull.len();
            for &p in pass {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        Ok(ConvexPolygon { vertices: hull })
    }

    /// The bounded rationalizable set `{0 <= v <= value_cap, f*(v) <= eps <= epsilon_cap}`.
    pub fn nr_b(link: &LinkFunction, epsilon_cap: f64, value_cap: f64) -> Result<Self, GeometryError> {
        if !(value_cap.is_finite() && value_cap >= 0.0) {
            return Err(GeometryError::InvalidValueCap(value_cap));
        }
        let (at_zero, at_cap) = (link.conjugate(0.0), link.conjugate(value_cap));
        if !(epsilon_cap > at_zero && epsilon_cap >= at_cap) {
            return Err(GeometryError::CapsTooTight {
                cap: epsilon_cap,
                at_zero,
                at_cap,
            });
        }
        let mut points = vec![Point::new(0.0, at_zero)];
        for v in link.segment_slopes().filter(|v| *v > 0.0 && *v < value_cap) {
            points.push(Point::new(v, link.conjugate(v)));
        }
        points.extend([
            Point::new(value_cap, at_cap),
            Point::new(value_cap, epsilon_cap),
            Point::new(0.0, epsilon_cap),
        ]);
        ConvexPolygon::hull(&points)
    }

    pub fn from_region(region: &RationalizableRegion) -> Result<Self, GeometryError> {
        let link = LinkFunction::from_curve(&region.curve);
        ConvexPolygon::nr_b(&link, region.epsilon_cap, region.value_cap)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
        }
    }

    /// Vertex attaining the support in direction `u`.
    pub fn extreme_point(&self, u: SupportQuery) -> Point {
        let mut best = self.vertices[0];
        for &p in &self.vertices[1..] {
            if p.dot(u) > best.dot(u) {
                best = p;
            }
        }
        best
    }

    /// Angles of the outward edge normals, where the extreme vertex changes.
    pub fn normal_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        if n < 2 {
            return Vec::new();
        }
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                (a.x - b.x).atan2(b.y - a.y).rem_euclid(std::f64::consts::TAU)
            })
            .collect()
    }
}

impl SupportFunction for ConvexPolygon {
    fn support(&self, u: SupportQuery) -> f64 {
        self.extreme_point(u).dot(u)
    }

    fn polygon(&self) -> Option<&ConvexPolygon> {
        Some(self)
    }
}
