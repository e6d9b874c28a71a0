//! Star-polygon quality losses.
//!
//! Every loss is a function of a candidate free-node position and the fixed
//! ring, averaged over the fan triangles `(candidate, ringᵢ, ringᵢ₊₁)`. Each
//! has a plain `f64` evaluator and a taped, differentiable form that agree to
//! rounding.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{AutodiffError, Tape, Tensor, Var};
use crate::error::MeshError;
use crate::geometry::{Point2, FOUR_SQRT3};

/// Guards divisions by squared lengths.
const LEN2_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean of `1 - 4√3·S/(m²+n²+l²)` with signed area `S`.
    Metric,
    /// Mean of each triangle's largest angle, radians.
    MinMaxAngle,
    /// Mean aspect ratio `(m²+n²+l²)/(4√3·S)`.
    AspectRatio,
    /// Mean over all angles of `(cos θ - 1/2)²`.
    Cosine,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::Metric,
        LossKind::MinMaxAngle,
        LossKind::AspectRatio,
        LossKind::Cosine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Metric => "metric",
            LossKind::MinMaxAngle => "minmax",
            LossKind::AspectRatio => "ar",
            LossKind::Cosine => "cos",
        }
    }
}

impl FromStr for LossKind {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "metric" => Ok(LossKind::Metric),
            "minmax" | "minmax_angle" => Ok(LossKind::MinMaxAngle),
            "ar" | "aspect_ratio" => Ok(LossKind::AspectRatio),
            "cos" | "cosine" => Ok(LossKind::Cosine),
            other => Err(MeshError::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[inline]
fn cos_between(u: Point2, v: Point2) -> f64 {
    let denom = (u.norm_squared() * v.norm_squared()).max(LEN2_FLOOR).sqrt();
    u.dot(v) / denom
}

/// Loss contribution of the single fan triangle `(candidate, a, b)`.
pub fn triangle_loss(kind: LossKind, candidate: Point2, a: Point2, b: Point2) -> f64 {
    let d = a - candidate;
    let dn = b - candidate;
    let e = b - a;
    match kind {
        LossKind::Metric | LossKind::AspectRatio => {
            let cross = d.cross(dn);
            let sum_sq = (d.norm_squared() + dn.norm_squared() + e.norm_squared()).max(LEN2_FLOOR);
            if kind == LossKind::Metric {
                1.0 - 0.5 * FOUR_SQRT3 * cross / sum_sq
            } else {
                sum_sq / (0.5 * FOUR_SQRT3 * cross)
            }
        }
        LossKind::MinMaxAngle | LossKind::Cosine => {
            let cos = [cos_between(d, dn), cos_between(-d, e), cos_between(dn, e)];
            if kind == LossKind::Cosine {
                cos.iter().map(|c| (c - 0.5).powi(2)).sum::<f64>() / 3.0
            } else {
                cos.iter()
                    .map(|c| c.clamp(-1.0, 1.0).acos())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

/// Loss of placing the free node at `candidate` inside `ring`.
pub fn loss_value(kind: LossKind, candidate: Point2, ring: &[Point2]) -> f64 {
    let n = ring.len();
    let total: f64 = (0..n)
        .map(|i| triangle_loss(kind, candidate, ring[i], ring[(i + 1) % n]))
        .sum();
    total / n as f64
}

/// [`LossKind::Metric`] evaluated with plain arithmetic.
pub fn metric_loss(candidate: Point2, star_ring: &[Point2]) -> f64 {
    loss_value(LossKind::Metric, candidate, star_ring)
}

/// Constant per-ring quantities reused across loss evaluations.
pub struct RingTensors {
    /// `ringᵢ`, `n × 2`.
    pub ring: Tensor,
    /// `ringᵢ₊₁`, `n × 2`.
    pub next: Tensor,
    /// `ringᵢ₊₁ - ringᵢ`, `n × 2`.
    pub edge: Tensor,
    /// `|ringᵢ₊₁ - ringᵢ|²`, `n × 1`.
    pub edge_len2: Tensor,
}

impl RingTensors {
    pub fn new(ring: &[Point2]) -> Self {
        let n = ring.len();
        let mut r = Vec::with_capacity(2 * n);
        let mut nx = Vec::with_capacity(2 * n);
        let mut e = Vec::with_capacity(2 * n);
        let mut l = Vec::with_capacity(n);
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            r.extend([a.x, a.y]);
            nx.extend([b.x, b.y]);
            e.extend([b.x - a.x, b.y - a.y]);
            l.push((b - a).norm_squared());
        }
        RingTensors {
            ring: Tensor::new(n, 2, r).expect("shape"),
            next: Tensor::new(n, 2, nx).expect("shape"),
            edge: Tensor::new(n, 2, e).expect("shape"),
            edge_len2: Tensor::new(n, 1, l).expect("shape"),
        }
    }
}

fn column<'t>(tape: &'t Tape, m: Var<'t>, j: usize) -> Result<Var<'t>, AutodiffError> {
    let mut sel = Tensor::zeros(2, 1);
    sel.set(j, 0, 1.0);
    m.matmul(tape.constant(sel))
}

fn row_dot<'t>(u: Var<'t>, v: Var<'t>) -> Result<Var<'t>, AutodiffError> {
    Ok(u.mul(v)?.sum_cols())
}

fn cosines<'t>(u: Var<'t>, v: Var<'t>, u2: Var<'t>, v2: Var<'t>) -> Result<Var<'t>, AutodiffError> {
    let denom = u2.mul(v2)?.clamp_min(LEN2_FLOOR).sqrt();
    row_dot(u, v)?.div(denom)
}

/// Differentiable loss for a `1 × 2` candidate position.
pub fn loss_on_tape<'t>(
    kind: LossKind,
    tape: &'t Tape,
    candidate: Var<'t>,
    ring: &RingTensors,
) -> Result<Var<'t>, AutodiffError> {
    let r = tape.constant(ring.ring.clone());
    let rn = tape.constant(ring.next.clone());
    let d = r.sub(candidate)?;
    let dn = rn.sub(candidate)?;
    let d2 = d.square().sum_cols();
    let dn2 = dn.square().sum_cols();
    match kind {
        LossKind::Metric | LossKind::AspectRatio => {
            let cross = column(tape, d, 0)?
                .mul(column(tape, dn, 1)?)?
                .sub(column(tape, d, 1)?.mul(column(tape, dn, 0)?)?)?;
            let sum_sq = d2
                .add(dn2)?
                .add(tape.constant(ring.edge_len2.clone()))?
                .clamp_min(LEN2_FLOOR);
            let per_tri = if kind == LossKind::Metric {
                cross.div(sum_sq)?.scale(-0.5 * FOUR_SQRT3).add_scalar(1.0)
            } else {
                sum_sq.div(cross.scale(0.5 * FOUR_SQRT3))?
            };
            Ok(per_tri.mean())
        }
        LossKind::MinMaxAngle | LossKind::Cosine => {
            let e = tape.constant(ring.edge.clone());
            let e2 = tape.constant(ring.edge_len2.clone());
            let cos_c = cosines(d, dn, d2, dn2)?;
            let cos_a = cosines(d.neg(), e, d2, e2)?;
            let cos_b = cosines(dn, e, dn2, e2)?;
            if kind == LossKind::Cosine {
                let all = tape.concat_rows(&[cos_c, cos_a, cos_b])?;
                Ok(all.add_scalar(-0.5).square().mean())
            } else {
                let angle = |c: Var<'t>| c.clamp(-1.0, 1.0).acos();
                let worst = angle(cos_c).maximum(angle(cos_a))?.maximum(angle(cos_b))?;
                Ok(worst.mean())
            }
        }
    }
}

/// Loss value and gradient with respect to the candidate.
pub fn loss_and_grad(kind: LossKind, candidate: Point2, ring: &RingTensors) -> (f64, Point2) {
    let tape = Tape::new();
    let c = tape.param(Tensor::row(&[candidate.x, candidate.y]));
    let loss = loss_on_tape(kind, &tape, c, ring).expect("ring tensors have consistent shapes");
    let grads = tape.backward(loss).expect("loss is scalar");
    let g = grads.wrt(c);
    (loss.item(), Point2::new(g.data()[0], g.data()[1]))
}

/// Upper bound of the max-angle loss, reached by fully degenerate fans.
pub const MAX_ANGLE_LIMIT: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hexagon() -> Vec<Point2> {
        (0..6)
            .map(|k| {
                let a = PI / 3.0 * k as f64;
                Point2::new(a.cos(), a.sin())
            })
            .collect()
    }

    #[test]
    fn hexagon_fan_is_equilateral() {
        // a unit hexagon splits into 6 equilateral triangles around its center
        let ring = hexagon();
        assert!(metric_loss(Point2::ZERO, &ring).abs() < 1e-14);
        assert_relative_eq!(
            loss_value(LossKind::AspectRatio, Point2::ZERO, &ring),
            1.0,
            epsilon = 1e-14
        );
        assert!(loss_value(LossKind::Cosine, Point2::ZERO, &ring).abs() < 1e-14);
        assert_relative_eq!(
            loss_value(LossKind::MinMaxAngle, Point2::ZERO, &ring),
            PI / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn square_fan_hand_value() {
        // unit square ring about the origin: 4 right-isoceles fan triangles
        let ring = vec![
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -1.0),
        ];
        // per triangle: S = 1/2, m²+n²+l² = 1 + 1 + 2
        let expected = 1.0 - FOUR_SQRT3 * 0.5 / 4.0;
        assert_relative_eq!(metric_loss(Point2::ZERO, &ring), expected, epsilon = 1e-14);
        assert_relative_eq!(
            loss_value(LossKind::AspectRatio, Point2::ZERO, &ring),
            4.0 / (FOUR_SQRT3 * 0.5),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            loss_value(LossKind::MinMaxAngle, Point2::ZERO, &ring),
            PI / 2.0,
            epsilon = 1e-12
        );
        // angles 90, 45, 45: ((0 - 1/2)² + 2(√2/2 - 1/2)²) / 3
        let c45 = 0.5f64.sqrt();
        let expected_cos = (0.25 + 2.0 * (c45 - 0.5).powi(2)) / 3.0;
        assert_relative_eq!(
            loss_value(LossKind::Cosine, Point2::ZERO, &ring),
            expected_cos,
            epsilon = 1e-14
        );
    }

    #[test]
    fn inverted_candidate_exceeds_one() {
        let (a, b) = (Point2::new(1.0, 0.0), Point2::new(0.0, 1.0));
        assert!(triangle_loss(LossKind::Metric, Point2::ZERO, a, b) < 1.0);
        assert!(triangle_loss(LossKind::Metric, Point2::new(1.0, 1.0), a, b) > 1.0);
        assert!(triangle_loss(LossKind::AspectRatio, Point2::new(1.0, 1.0), a, b) < 0.0);
        let ring = hexagon();
        assert!(metric_loss(Point2::new(3.0, 0.2), &ring) > metric_loss(Point2::ZERO, &ring));
    }

    #[test]
    fn tape_matches_plain() {
        let ring = vec![
            Point2::new(1.0, -0.2),
            Point2::new(0.8, 0.9),
            Point2::new(-0.5, 1.1),
            Point2::new(-1.2, 0.1),
            Point2::new(-0.3, -0.9),
        ];
        let rt = RingTensors::new(&ring);
        let c = Point2::new(0.13, -0.07);
        for kind in LossKind::ALL {
            let (v, _) = loss_and_grad(kind, c, &rt);
            assert_relative_eq!(v, loss_value(kind, c, &ring), epsilon = 1e-13);
        }
    }

    #[test]
    fn parse_names() {
        for kind in LossKind::ALL {
            assert_eq!(kind.as_str().parse::<LossKind>().unwrap(), kind);
        }
        assert!("l2".parse::<LossKind>().is_err());
    }
}
