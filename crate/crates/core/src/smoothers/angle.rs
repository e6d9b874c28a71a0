use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::StarPolygon;

/// Angle-based move: for each ring node, swing the center about that node
/// onto the bisector of the polygon's interior angle there, keeping its
/// distance; return the mean of those positions.
pub fn angle_based_step(star: &StarPolygon) -> Result<Point2> {
    let n = star.degree();
    if n < 3 {
        return Err(MeshError::InvalidMesh(format!("star of degree {n}")));
    }
    let mut sum = Point2::ZERO;
    for i in 0..n {
        let x = star.ring[i];
        let next = star.ring[(i + 1) % n] - x;
        let prev = star.ring[(i + n - 1) % n] - x;
        let (ln, lp) = (next.norm(), prev.norm());
        if ln == 0.0 || lp == 0.0 {
            return Err(MeshError::DegenerateAngle(i));
        }
        // the interior lies to the left of the ccw edge x -> next, so the
        // interior angle sweeps counter-clockwise from next to prev
        let mut interior = next.cross(prev).atan2(next.dot(prev));
        if interior < 0.0 {
            interior += 2.0 * std::f64::consts::PI;
        }
        let dir = (next / ln).rotated(0.5 * interior);
        sum += x + dir * star.center.distance(x);
    }
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothers::tests::{hexagon_star, square_ring};

    #[test]
    fn regular_star_is_fixed() {
        let p = angle_based_step(&hexagon_star()).unwrap();
        assert!(p.norm() < 1e-14);
    }

    #[test]
    fn square_pulls_toward_center() {
        for c in [
            Point2::new(0.3, 0.1),
            Point2::new(-0.5, 0.4),
            Point2::new(0.05, -0.8),
        ] {
            let star = StarPolygon::new(c, square_ring());
            let p = angle_based_step(&star).unwrap();
            assert!(p.norm() < c.norm(), "{c:?} -> {p:?}");
        }
    }

    #[test]
    fn rotation_preserves_distances() {
        // each candidate sits on its bisector at the original distance; for
        // the square ring the bisectors are the diagonals
        let c = Point2::new(0.3, 0.1);
        let star = StarPolygon::new(c, square_ring());
        let mut expected = Point2::ZERO;
        for &x in &star.ring {
            expected += x + (-x / x.norm()) * c.distance(x);
        }
        let p = angle_based_step(&star).unwrap();
        assert!((p - expected / 4.0).norm() < 1e-14);
    }

    #[test]
    fn repeated_ring_node_is_degenerate() {
        let star = StarPolygon::new(
            Point2::ZERO,
            vec![
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
        );
        assert!(matches!(
            angle_based_step(&star),
            Err(MeshError::DegenerateAngle(_))
        ));
    }
}
