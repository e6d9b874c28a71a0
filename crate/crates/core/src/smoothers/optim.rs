use crate::autodiff::{adam_update, AdamConfig, AdamState, Tensor};
use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::loss::{loss_and_grad, metric_loss, LossKind, RingTensors};
use crate::mesh::StarPolygon;
use crate::model::NormalizationFrame;
use crate::truncation::shift_truncate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    pub max_iters: usize,
    /// Step size in normalized star coordinates.
    pub learning_rate: f64,
    pub adam: AdamConfig,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            max_iters: 20,
            learning_rate: 0.05,
            adam: AdamConfig::default(),
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(MeshError::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(MeshError::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Adam descent on the metric loss of the free node, in the star's
/// normalized frame. Every iterate is shift-truncated; the lowest-loss
/// iterate is returned.
pub fn optimization_step(star: &StarPolygon, config: &OptimConfig) -> Point2 {
    let Ok(frame) = NormalizationFrame::of_star(star) else {
        return star.center;
    };
    let ring: Vec<Point2> = star.ring.iter().map(|&p| frame.to_local(p)).collect();
    let ring_t = RingTensors::new(&ring);
    let mut local = StarPolygon::new(Point2::ZERO, ring);

    let mut pos = Tensor::row(&[0.0, 0.0]);
    let mut state = AdamState::new([&pos], config.adam);
    let mut best = (f64::INFINITY, Point2::ZERO);
    for _ in 0..config.max_iters {
        let (loss, grad) = loss_and_grad(LossKind::Metric, local.center, &ring_t);
        if loss < best.0 {
            best = (loss, local.center);
        }
        if !(grad.x.is_finite() && grad.y.is_finite()) {
            break;
        }
        let g = Tensor::row(&[grad.x, grad.y]);
        adam_update(&mut [&mut pos], &[g], &mut state, config.learning_rate).expect("one 1x2 parameter");
        let proposed = Point2::new(pos.data()[0], pos.data()[1]);
        local.center += shift_truncate(&local, proposed - local.center);
        pos.data_mut().copy_from_slice(&[local.center.x, local.center.y]);
    }
    let last = metric_loss(local.center, &local.ring);
    if last < best.0 {
        best = (last, local.center);
    }
    frame.to_world(best.1)
}
