use crate::error::{MeshError, Result};
use crate::geometry::{circumcenter, signed_area, Point2};
use crate::mesh::StarPolygon;

/// Area-weighted mean of the fan triangles' circumcenters.
pub fn cvt_step(star: &StarPolygon) -> Result<Point2> {
    let eps = star.area_eps();
    let mut weighted = Point2::ZERO;
    let mut total = 0.0;
    for i in 0..star.degree() {
        let (a, b) = star.ring_edge(i);
        let area = signed_area(star.center, a, b).abs();
        if area < eps || area == 0.0 {
            return Err(MeshError::DegenerateTriangle(i));
        }
        let cc = circumcenter(star.center, a, b).ok_or(MeshError::DegenerateTriangle(i))?;
        weighted += cc * area;
        total += area;
    }
    Ok(weighted / total)
}
