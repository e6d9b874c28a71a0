use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::StarPolygon;

/// Uniform similarity frame of a star: the free node maps to the origin and
/// the star's largest bounding-box extent to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationFrame {
    pub origin: Point2,
    pub scale: f64,
}

impl NormalizationFrame {
    pub fn of_star(star: &StarPolygon) -> Result<Self> {
        let scale = star.bbox().extent();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(MeshError::ZeroExtent);
        }
        Ok(NormalizationFrame {
            origin: star.center,
            scale,
        })
    }

    #[inline]
    pub fn to_local(&self, p: Point2) -> Point2 {
        (p - self.origin) / self.scale
    }

    #[inline]
    pub fn to_world(&self, p: Point2) -> Point2 {
        self.origin + p * self.scale
    }
}

/// Normalized star coordinates: row 0 is the free node (always the origin),
/// row `i + 1` is `ring[i]`.
pub fn normalize_star(star: &StarPolygon) -> Result<(Vec<Point2>, NormalizationFrame)> {
    let frame = NormalizationFrame::of_star(star)?;
    let mut pts = Vec::with_capacity(star.degree() + 1);
    pts.push(Point2::ZERO);
    pts.extend(star.ring.iter().map(|&p| frame.to_local(p)));
    Ok((pts, frame))
}
