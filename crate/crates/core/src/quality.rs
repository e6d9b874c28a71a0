//! Whole-mesh quality statistics and the weighted quality score used to rank
//! smoothing runs.

use crate::error::{MeshError, Result};
use crate::geometry::{triangle_quality, TriangleQuality};
use crate::mesh::Mesh;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Smallest minimum angle over all elements, degrees.
    pub min_angle_min: f64,
    /// Mean of the per-element minimum angle, degrees.
    pub min_angle_mean: f64,
    pub max_angle_max: f64,
    pub max_angle_mean: f64,
    /// Smallest `1/q`.
    pub inv_ar_min: f64,
    pub inv_ar_mean: f64,
    /// Counts of `f(q) = 1 - 1/q` in 20 uniform bins over `[0, 1]`.
    pub histogram: [usize; HISTOGRAM_BINS],
    pub element_count: usize,
}

impl QualityReport {
    pub fn from_qualities<I>(qualities: I) -> Result<Self>
    where
        I: IntoIterator<Item = TriangleQuality>,
    {
        let mut count = 0usize;
        let mut min_angle_min = f64::INFINITY;
        let mut min_angle_sum = 0.0;
        let mut max_angle_max = f64::NEG_INFINITY;
        let mut max_angle_sum = 0.0;
        let mut inv_ar_min = f64::INFINITY;
        let mut inv_ar_sum = 0.0;
        let mut histogram = [0usize; HISTOGRAM_BINS];
        for q in qualities {
            count += 1;
            let lo = q.min_angle();
            let hi = q.max_angle();
            let inv = q.inverse_aspect_ratio();
            min_angle_min = min_angle_min.min(lo);
            min_angle_sum += lo;
            max_angle_max = max_angle_max.max(hi);
            max_angle_sum += hi;
            inv_ar_min = inv_ar_min.min(inv);
            inv_ar_sum += inv;
            histogram[histogram_bin(q.transformed)] += 1;
        }
        if count == 0 {
            return Err(MeshError::EmptyMesh);
        }
        let n = count as f64;
        Ok(QualityReport {
            min_angle_min,
            min_angle_mean: min_angle_sum / n,
            max_angle_max,
            max_angle_mean: max_angle_sum / n,
            inv_ar_min,
            inv_ar_mean: inv_ar_sum / n,
            histogram,
            element_count: count,
        })
    }

    pub fn weighted_quality(&self) -> f64 {
        weighted_quality(self)
    }
}

fn histogram_bin(f: f64) -> usize {
    let f = f.clamp(0.0, 1.0);
    ((f * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
}

pub fn quality_report(mesh: &Mesh) -> Result<QualityReport> {
    QualityReport::from_qualities((0..mesh.triangles.len()).map(|t| {
        let [a, b, c] = mesh.triangle_points(t);
        triangle_quality(a, b, c)
    }))
}

/// Composite score combining angle extremes and inverse aspect ratios;
/// 2/3 for an all-equilateral mesh, larger is better.
pub fn weighted_quality(r: &QualityReport) -> f64 {
    let angle_term = (r.min_angle_mean + r.min_angle_min + 120.0 - r.max_angle_max - r.max_angle_mean) / 60.0;
    (angle_term + r.inv_ar_mean + r.inv_ar_min) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use approx::assert_relative_eq;

    fn single(nodes: Vec<Point2>) -> Mesh {
        Mesh::new(nodes, vec![[0, 1, 2]], vec![true; 3]).unwrap()
    }

    fn equilateral() -> Mesh {
        single(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ])
    }

    #[test]
    fn ideal_element_report() {
        let r = quality_report(&equilateral()).unwrap();
        assert_relative_eq!(r.min_angle_min, 60.0, epsilon = 1e-9);
        assert_relative_eq!(r.min_angle_mean, 60.0, epsilon = 1e-9);
        assert_relative_eq!(r.inv_ar_min, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.inv_ar_mean, 1.0, epsilon = 1e-12);
        assert_eq!(r.histogram[0], 1);
        assert_eq!(r.element_count, 1);
    }

    #[test]
    fn right_isoceles_report() {
        let r = quality_report(&single(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]))
        .unwrap();
        assert_relative_eq!(r.min_angle_min, 45.0, epsilon = 1e-9);
        assert_relative_eq!(r.max_angle_max, 90.0, epsilon = 1e-9);
        assert_relative_eq!(r.inv_ar_min, 3f64.sqrt() / 2.0, epsilon = 1e-12);
        // f ≈ 0.134 lands in bin 2
        assert_eq!(r.histogram[2], 1);
    }

    #[test]
    fn two_elements_average() {
        let s3 = 3f64.sqrt() / 2.0;
        let mesh = Mesh::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.5, s3),
                Point2::new(10.0, 0.0),
                Point2::new(11.0, 0.0),
                Point2::new(10.0, 1.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
            vec![true; 6],
        )
        .unwrap();
        let r = quality_report(&mesh).unwrap();
        assert_relative_eq!(r.min_angle_mean, (60.0 + 45.0) / 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.max_angle_mean, (60.0 + 90.0) / 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.inv_ar_mean, (1.0 + s3) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.min_angle_min, 45.0, epsilon = 1e-9);
    }

    #[test]
    fn empty_mesh_errors() {
        let mesh = Mesh::new(vec![], vec![], vec![]).unwrap();
        assert!(matches!(quality_report(&mesh), Err(MeshError::EmptyMesh)));
    }

    #[test]
    fn weighted_quality_extremes() {
        let r = quality_report(&equilateral()).unwrap();
        assert_relative_eq!(weighted_quality(&r), 2.0 / 3.0, epsilon = 1e-12);
        let degenerate = QualityReport {
            min_angle_min: 0.0,
            min_angle_mean: 0.0,
            max_angle_max: 180.0,
            max_angle_mean: 180.0,
            inv_ar_min: 0.0,
            inv_ar_mean: 0.0,
            histogram: [0; HISTOGRAM_BINS],
            element_count: 1,
        };
        // (0 + 0 + 120 - 180 - 180)/60 = -4, over 6
        assert_relative_eq!(weighted_quality(&degenerate), -2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn weighted_quality_is_monotone_in_each_term() {
        let base = QualityReport {
            min_angle_min: 10.0,
            min_angle_mean: 30.0,
            max_angle_max: 150.0,
            max_angle_mean: 90.0,
            inv_ar_min: 0.2,
            inv_ar_mean: 0.6,
            histogram: [0; HISTOGRAM_BINS],
            element_count: 1,
        };
        let q0 = weighted_quality(&base);
        let tweaks: [fn(&mut QualityReport); 6] = [
            |r| r.min_angle_min += 1.0,
            |r| r.min_angle_mean += 1.0,
            |r| r.max_angle_max -= 1.0,
            |r| r.max_angle_mean -= 1.0,
            |r| r.inv_ar_min += 0.01,
            |r| r.inv_ar_mean += 0.01,
        ];
        for tweak in tweaks {
            let mut r = base.clone();
            tweak(&mut r);
            assert!(weighted_quality(&r) > q0);
        }
    }
}
