use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{adam_update, AdamConfig, AdamState, Tape, Tensor, Var};
use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::loss::{loss_on_tape, loss_value, LossKind, RingTensors};
use crate::mesh::{has_negative_element, Mesh, StarPolygon, Topology};
use crate::model::{
    forward_displacement, forward_on_tape, init_params, ModelParams, StarGraph, DEFAULT_HIDDEN,
};
use crate::truncation::truncate_shift;

use super::trace::{EpochRecord, TrainingTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Free nodes sampled per mesh and update.
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Epochs without a validation improvement before the rate is halved.
    pub plateau_patience: usize,
    pub lr_floor: f64,
    pub loss: LossKind,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 32,
            initial_lr: 1e-2,
            plateau_patience: 10,
            lr_floor: 1e-5,
            loss: LossKind::Metric,
            hidden: DEFAULT_HIDDEN,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MeshError::InvalidConfig(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.lr_floor > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.hidden < 2 {
            return bad("hidden must be at least 2");
        }
        Ok(())
    }
}

/// A free node's star prepared for repeated evaluation.
pub(crate) struct TrainStar {
    pub star: StarPolygon,
    pub graph: StarGraph,
    /// The star in its normalized frame; the center is the origin.
    pub local: StarPolygon,
    pub ring: RingTensors,
}

impl TrainStar {
    fn new(star: StarPolygon) -> Result<Self> {
        let graph = StarGraph::new(&star)?;
        let ring: Vec<Point2> = star.ring.iter().map(|&p| graph.frame.to_local(p)).collect();
        Ok(TrainStar {
            ring: RingTensors::new(&ring),
            local: StarPolygon::new(Point2::ZERO, ring),
            graph,
            star,
        })
    }
}

pub(crate) fn prepare_stars(mesh: &Mesh) -> Result<Vec<TrainStar>> {
    let topo = Topology::build(mesh)?;
    topo.free_nodes()
        .map(|node| TrainStar::new(topo.star(mesh, node)?))
        .collect()
}

fn point_of(t: &Tensor) -> Point2 {
    Point2::new(t.data()[0], t.data()[1])
}

struct NodeLoss<'t> {
    loss: Var<'t>,
    truncated: bool,
    negative: bool,
}

/// Loss of the truncated prediction on one star, recorded on `tape`.
fn node_loss<'t>(
    tape: &'t Tape,
    params: &crate::model::ParamVars<'t>,
    s: &TrainStar,
    kind: LossKind,
) -> Result<NodeLoss<'t>> {
    let out = forward_on_tape(tape, params, &s.graph)?;
    let raw = point_of(&out.value());
    let t = truncate_shift(&s.local, raw);
    let candidate = out.scale(t.factor());
    Ok(NodeLoss {
        loss: loss_on_tape(kind, tape, candidate, &s.ring)?,
        truncated: t.was_truncated(),
        negative: has_negative_element(&s.local, raw * t.factor()),
    })
}

/// Same quantity as [`node_loss`] through the tape-free forward pass.
fn eval_loss(params: &ModelParams, s: &TrainStar, kind: LossKind) -> Result<f64> {
    let (out, _) = forward_displacement(params, &s.star)?;
    let t = truncate_shift(&s.local, out);
    Ok(loss_value(kind, out * t.factor(), &s.local.ring))
}

fn sample_nodes(rng: &mut ChaCha8Rng, len: usize, batch: usize) -> Vec<usize> {
    if len <= batch {
        (0..len).collect()
    } else {
        sample(rng, len, batch).into_vec()
    }
}

/// Label-free training: each epoch visits the training meshes in order and
/// makes one Adam step per mesh on the mean loss of a random batch of its
/// free nodes, evaluated at the shift-truncated predictions. Returns the
/// parameters with the lowest validation loss.
pub fn train_gmsnet(
    train: &[Mesh],
    validation: &[Mesh],
    config: &TrainConfig,
) -> Result<(ModelParams, TrainingTrace)> {
    config.validate()?;
    if train.is_empty() {
        return Err(MeshError::EmptyDataset("train"));
    }
    if validation.is_empty() {
        return Err(MeshError::EmptyDataset("validation"));
    }
    let train_stars = train.iter().map(prepare_stars).collect::<Result<Vec<_>>>()?;
    let val_stars = validation.iter().map(prepare_stars).collect::<Result<Vec<_>>>()?;
    if train_stars.iter().all(Vec::is_empty) {
        return Err(MeshError::EmptyDataset("train (no free nodes)"));
    }
    if val_stars.iter().all(Vec::is_empty) {
        return Err(MeshError::EmptyDataset("validation (no free nodes)"));
    }

    let mut params = init_params(config.hidden, config.seed)?;
    let mut adam = AdamState::new(params.tensors(), AdamConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut lr = config.initial_lr;
    let mut best = (f64::INFINITY, params.clone());
    let mut stale = 0;
    let mut trace = TrainingTrace::default();

    for epoch in 1..=config.epochs {
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        let mut truncations = 0;
        let mut negative_candidates = 0;
        for stars in &train_stars {
            if stars.is_empty() {
                continue;
            }
            let batch = sample_nodes(&mut rng, stars.len(), config.batch_size);
            let tape = Tape::new();
            let pv = params.on_tape(&tape);
            let mut losses = Vec::with_capacity(batch.len());
            for &i in &batch {
                let n = node_loss(&tape, &pv, &stars[i], config.loss)?;
                truncations += usize::from(n.truncated);
                negative_candidates += usize::from(n.negative);
                losses.push(n.loss);
            }
            let mean = tape.concat_rows(&losses)?.mean();
            let value = mean.item();
            loss_sum += value;
            loss_count += 1;
            if !value.is_finite() {
                continue;
            }
            let grads = tape.backward(mean)?;
            let grads: Vec<Tensor> = pv.vars().iter().map(|&v| grads.wrt(v)).collect();
            if grads.iter().all(Tensor::all_finite) {
                adam_update(&mut params.tensors_mut(), &grads, &mut adam, lr)?;
            }
        }
        let train_loss = loss_sum / loss_count.max(1) as f64;
        let val_loss = validation_loss(&params, &val_stars, config)?;
        trace.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
            truncations,
            negative_candidates,
        });
        log::info!(
            "epoch {epoch}: train {train_loss:.6} val {val_loss:.6} lr {lr:.2e} truncations {truncations}"
        );

        if val_loss < best.0 {
            best = (val_loss, params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.plateau_patience {
                lr = (lr * 0.5).max(config.lr_floor);
                stale = 0;
            }
        }
    }
    let params = if best.0.is_finite() { best.1 } else { params };
    Ok((params, trace))
}

/// Mean loss over a batch of validation nodes per mesh. The batches are
/// drawn from a fixed seed, so every epoch sees the same nodes.
fn validation_loss(params: &ModelParams, val_stars: &[Vec<TrainStar>], config: &TrainConfig) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);
    let mut sum = 0.0;
    let mut count = 0usize;
    for stars in val_stars {
        if stars.is_empty() {
            continue;
        }
        for i in sample_nodes(&mut rng, stars.len(), config.batch_size) {
            sum += eval_loss(params, &stars[i], config.loss)?;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}
