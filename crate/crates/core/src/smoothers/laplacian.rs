use crate::geometry::triangle_quality;
use crate::geometry::Point2;
use crate::mesh::{has_negative_element, StarPolygon};

/// Centroid of the ring.
pub fn laplacian_step(star: &StarPolygon) -> Point2 {
    star.ring_centroid()
}

/// Mean transformed metric `1 - 1/q` over the fan triangles around `candidate`.
pub fn star_mean_transformed(star: &StarPolygon, candidate: Point2) -> f64 {
    let n = star.degree();
    let sum: f64 = (0..n)
        .map(|i| {
            let (a, b) = star.ring_edge(i);
            triangle_quality(candidate, a, b).transformed
        })
        .sum();
    sum / n as f64
}

/// Laplacian move, kept only when it strictly improves the star's mean
/// transformed metric without inverting an element.
pub fn smart_laplacian_step(star: &StarPolygon) -> Point2 {
    let proposal = laplacian_step(star);
    if has_negative_element(star, proposal) {
        return star.center;
    }
    if star_mean_transformed(star, proposal) < star_mean_transformed(star, star.center) {
        proposal
    } else {
        star.center
    }
}
