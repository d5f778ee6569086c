//! Plane geometry primitives shared by the topology, routing and
//! verification modules.

use serde::{Deserialize, Serialize};

/// A point on the 2D plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Unsigned perpendicular distance from `p` to the straight line through
/// `a` and `b`. Falls back to `dist(p, a)` when the two points coincide.
pub fn line_distance(p: Point, a: Point, b: Point) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return p.dist(a);
    }
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    cross.abs() / len
}

/// Distance from `p` to the closed segment with endpoints `a` and `b`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// True when the closed segment `(a, b)` meets the closed disc centered at
/// `c` with radius `radius`.
pub fn segment_intersects_disc(a: Point, b: Point, c: Point, radius: f64) -> bool {
    segment_distance(c, a, b) <= radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_is_euclidean() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        assert_eq!(a.dist(b), 5.0);
    }

    #[test]
    fn line_distance_ignores_segment_extent() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        // Beyond b along the line, the perpendicular distance stays |y|.
        let p = Point::new(5.0, 2.0);
        assert!((line_distance(p, a, b) - 2.0).abs() < 1e-12);
        assert!((segment_distance(p, a, b) - (2.0f64.powi(2) + 4.0f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn segment_distance_clamps_to_endpoints() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert!((segment_distance(Point::new(-1.0, 0.0), a, b) - 1.0).abs() < 1e-12);
        assert!((segment_distance(Point::new(0.5, 0.7), a, b) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn disc_intersection_boundary_is_inclusive() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        assert!(segment_intersects_disc(a, b, Point::new(1.0, 1.0), 1.0));
        assert!(!segment_intersects_disc(a, b, Point::new(1.0, 1.0), 0.999));
    }
}
