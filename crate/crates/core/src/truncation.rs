//! Shift truncation: halve a proposed node displacement until it no longer
//! inverts any element of the node's star.

use crate::geometry::Point2;
#[cfg(test)]
use crate::mesh::has_negative_element;
use crate::mesh::{has_element_at_or_below, StarPolygon};

/// Halvings attempted before the displacement is discarded.
pub const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// The accepted displacement.
    pub delta: Point2,
    /// Number of halvings applied.
    pub halvings: u32,
    /// The displacement was replaced by zero.
    pub zeroed: bool,
}

impl Truncation {
    pub fn was_truncated(&self) -> bool {
        self.halvings > 0 || self.zeroed
    }

    /// Factor relating the accepted displacement to the proposed one.
    pub fn factor(&self) -> f64 {
        if self.zeroed {
            0.0
        } else {
            0.5f64.powi(self.halvings as i32)
        }
    }
}

/// Truncates `delta`, a displacement of `star.center`.
pub fn truncate_shift(star: &StarPolygon, delta: Point2) -> Truncation {
    truncate_shift_with_eps(star, delta, star.area_eps())
}

/// [`truncate_shift`] with an explicit area threshold. The smoothing driver
/// passes the larger of the star and mesh thresholds so that accepted moves
/// never create an element the mesh-level check counts as negative.
pub fn truncate_shift_with_eps(star: &StarPolygon, delta: Point2, eps: f64) -> Truncation {
    let mut d = delta;
    for halvings in 0..=MAX_HALVINGS {
        if !has_element_at_or_below(star, star.center + d, eps) {
            return Truncation {
                delta: d,
                halvings,
                zeroed: false,
            };
        }
        d = d * 0.5;
    }
    Truncation {
        delta: Point2::ZERO,
        halvings: MAX_HALVINGS,
        zeroed: true,
    }
}

pub fn shift_truncate(star: &StarPolygon, delta: Point2) -> Point2 {
    truncate_shift(star, delta).delta
}
