//! Planar geometry helpers. Angles are in degrees, counter-clockwise from +x.

use std::ops::{Add, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit-length step along `heading_deg` scaled by `len`.
    pub fn polar(len: f64, heading_deg: f64) -> Self {
        let rad = heading_deg.to_radians();
        Self::new(len * rad.cos(), len * rad.sin())
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Direction of the vector in degrees, in (-180, 180].
    pub fn bearing_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Wraps an angle into [-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a > 180.0 {
        a -= 360.0;
    } else if a < -180.0 {
        a += 360.0;
    }
    a
}

/// Axis-aligned rectangle given by its center and side lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub center: Point,
    pub width: f64,
    pub depth: f64,
}

impl Rect {
    pub fn min(&self) -> Point {
        Point::new(
            self.center.x - self.width / 2.0,
            self.center.y - self.depth / 2.0,
        )
    }

    pub fn max(&self) -> Point {
        Point::new(
            self.center.x + self.width / 2.0,
            self.center.y + self.depth / 2.0,
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = (self.min(), self.max());
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
    }

    /// Euclidean distance from `p` to the closest point of the rectangle (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let (lo, hi) = (self.min(), self.max());
        let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
        let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
        dx.hypot(dy)
    }

    /// Liang-Barsky clipping: does the closed segment `a`-`b` touch the rectangle?
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        let (lo, hi) = (self.min(), self.max());
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-d.x, a.x - lo.x),
            (d.x, hi.x - a.x),
            (-d.y, a.y - lo.y),
            (d.y, hi.y - a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_range() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-190.0), 170.0);
        assert_eq!(wrap_deg(540.0), 180.0);
        assert_eq!(wrap_deg(35.0), 35.0);
    }

    #[test]
    fn segment_rectangle_intersection() {
        let r = Rect {
            center: Point::new(0.0, 0.0),
            width: 2.0,
            depth: 2.0,
        };
        assert!(r.intersects_segment(Point::new(-5.0, 0.0), Point::new(5.0, 0.0)));
        assert!(!r.intersects_segment(Point::new(-5.0, 2.0), Point::new(5.0, 2.0)));
        // endpoint inside
        assert!(r.intersects_segment(Point::new(0.5, 0.5), Point::new(9.0, 9.0)));
        // stops short
        assert!(!r.intersects_segment(Point::new(-5.0, 0.0), Point::new(-2.0, 0.0)));
        // vertical miss
        assert!(!r.intersects_segment(Point::new(3.0, -5.0), Point::new(3.0, 5.0)));
    }

    #[test]
    fn rect_distance() {
        let r = Rect {
            center: Point::new(0.0, 0.0),
            width: 2.0,
            depth: 2.0,
        };
        assert_eq!(r.distance_to(Point::new(0.0, 0.0)), 0.0);
        assert!((r.distance_to(Point::new(4.0, 5.0)) - 5.0).abs() < 1e-12);
    }
}
