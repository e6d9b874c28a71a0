//! Planar primitives and per-triangle quality measures.
//!
//! The aspect ratio used throughout is `q = (m² + n² + l²) / (4√3 S)` for a
//! triangle with edge lengths `m, n, l` and area `S`. It is 1 for an
//! equilateral triangle and grows without bound toward degeneracy; the
//! transformed metric `f(q) = 1 - 1/q` maps it into `[0, 1)`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// `4√3`, the normalizing constant of the aspect ratio.
pub const FOUR_SQRT3: f64 = 6.928_203_230_275_509;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotates counter-clockwise by `angle` radians about the origin.
    #[inline]
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Point2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Point2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn div(self, rhs: f64) -> Point2 {
        Point2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point2,
    pub max: Point2,
}

impl BBox {
    /// Returns `None` for an empty input.
    pub fn from_points<I: IntoIterator<Item = Point2>>(points: I) -> Option<BBox> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut bb = BBox {
            min: first,
            max: first,
        };
        for p in iter {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Largest side of the box.
    pub fn extent(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Signed area of the triangle `abc`; positive for counter-clockwise order.
#[inline]
pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Circumcenter of `abc`, or `None` when the points are collinear.
pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    if d == 0.0 {
        return None;
    }
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    let center = a + Point2::new(ux, uy);
    center.is_finite().then_some(center)
}

/// Angle at `apex` between the rays toward `p` and `q`, in radians within `[0, π]`.
#[inline]
pub fn angle_at(apex: Point2, p: Point2, q: Point2) -> f64 {
    let u = p - apex;
    let v = q - apex;
    u.cross(v).abs().atan2(u.dot(v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleQuality {
    /// Interior angles in degrees at the first, second and third vertex.
    pub angles: [f64; 3],
    /// Lengths of the edges opposite the first, second and third vertex.
    pub edge_lengths: [f64; 3],
    /// Signed area.
    pub area: f64,
    /// `+∞` for triangles with non-positive area.
    pub aspect_ratio: f64,
    /// `1 - 1/q`; exactly 1 for triangles with non-positive area.
    pub transformed: f64,
}

impl TriangleQuality {
    pub fn min_angle(&self) -> f64 {
        self.angles[0].min(self.angles[1]).min(self.angles[2])
    }

    pub fn max_angle(&self) -> f64 {
        self.angles[0].max(self.angles[1]).max(self.angles[2])
    }

    /// `1/q`, zero for degenerate or inverted elements.
    pub fn inverse_aspect_ratio(&self) -> f64 {
        1.0 - self.transformed
    }
}

pub fn triangle_quality(a: Point2, b: Point2, c: Point2) -> TriangleQuality {
    let angles = [
        angle_at(a, b, c).to_degrees(),
        angle_at(b, c, a).to_degrees(),
        angle_at(c, a, b).to_degrees(),
    ];
    let edge_lengths = [b.distance(c), c.distance(a), a.distance(b)];
    let area = signed_area(a, b, c);
    let sum_sq = (b - c).norm_squared() + (c - a).norm_squared() + (a - b).norm_squared();
    let (aspect_ratio, transformed) = if area > 0.0 {
        let inv_q = FOUR_SQRT3 * area / sum_sq;
        (1.0 / inv_q, 1.0 - inv_q)
    } else {
        (f64::INFINITY, 1.0)
    };
    TriangleQuality {
        angles,
        edge_lengths,
        area,
        aspect_ratio,
        transformed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn signed_area_orientation() {
        let o = Point2::new(0.0, 0.0);
        let x = Point2::new(1.0, 0.0);
        let y = Point2::new(0.0, 1.0);
        assert_eq!(signed_area(o, x, y), 0.5);
        assert_eq!(signed_area(o, y, x), -0.5);
        assert_eq!(signed_area(o, x, Point2::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn equilateral_quality() {
        let q = triangle_quality(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        );
        assert_relative_eq!(q.aspect_ratio, 1.0, epsilon = 1e-12);
        assert!(q.transformed.abs() < 1e-12);
        for a in q.angles {
            assert_relative_eq!(a, 60.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn right_isoceles_quality() {
        let q = triangle_quality(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        // m² + n² + l² = 1 + 1 + 2, S = 1/2
        let expected_q = 4.0 / (FOUR_SQRT3 * 0.5);
        assert_relative_eq!(q.aspect_ratio, expected_q, epsilon = 1e-12);
        assert_relative_eq!(q.aspect_ratio, 1.154_700_538_379_251_5, epsilon = 1e-12);
        assert_relative_eq!(q.transformed, 1.0 - 1.0 / expected_q, epsilon = 1e-12);
        assert_relative_eq!(q.transformed, 0.133_974_596_215_561_35, epsilon = 1e-12);
        assert_relative_eq!(q.angles[0], 90.0, epsilon = 1e-9);
        assert_relative_eq!(q.angles[1], 45.0, epsilon = 1e-9);
        assert_relative_eq!(q.angles[2], 45.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_is_degenerate() {
        let q = triangle_quality(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        );
        assert!(q.aspect_ratio.is_infinite());
        assert_eq!(q.transformed, 1.0);
        assert_eq!(q.inverse_aspect_ratio(), 0.0);
        assert_relative_eq!(q.max_angle(), 180.0, epsilon = 1e-12);
    }

    #[test]
    fn circumcenter_of_right_triangle_is_hypotenuse_midpoint() {
        let c = circumcenter(
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 2.0),
        )
        .unwrap();
        assert_relative_eq!(c.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.y, 1.0, epsilon = 1e-15);
        assert!(circumcenter(Point2::ZERO, Point2::new(1.0, 0.0), Point2::new(3.0, 0.0)).is_none());
    }
}
