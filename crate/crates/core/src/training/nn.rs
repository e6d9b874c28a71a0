//! Supervised per-degree baseline: one small MLP per star degree, trained
//! to reproduce optimization-smoother positions.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{adam_update, AdamConfig, AdamState, Tape, Tensor, Var};
use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::{Mesh, StarPolygon, Topology};
use crate::model::{decode_values, encode_values, NormalizationFrame};
use crate::smoothers::{laplacian_step, optimization_step, OptimConfig};

pub const NN_CHECKPOINT_FORMAT: &str = "nn-smoothing-v1";

/// A star and the position the optimization smoother chose for it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStar {
    pub star: StarPolygon,
    pub target: Point2,
}

/// Runs the optimization smoother on every free node of every mesh.
pub fn nn_generate_labels(meshes: &[Mesh], optim: &OptimConfig) -> Result<Vec<LabeledStar>> {
    if meshes.is_empty() {
        return Err(MeshError::EmptyDataset("label meshes"));
    }
    let mut labels = Vec::new();
    for mesh in meshes {
        let topo = Topology::build(mesh)?;
        for node in topo.free_nodes() {
            let star = topo.star(mesh, node)?;
            let target = optimization_step(&star, optim);
            labels.push(LabeledStar { star, target });
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub seed: u64,
}

impl Default for NnConfig {
    fn default() -> Self {
        NnConfig {
            hidden: 64,
            epochs: 30,
            batch_size: 64,
            learning_rate: 1e-3,
            min_degree: 3,
            max_degree: 9,
            seed: 0,
        }
    }
}

/// `2n → H → H → 2` with relu after both hidden layers.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMlp {
    pub degree: usize,
    pub layers: [Tensor; 6],
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
    Tensor::new(rows, cols, data).expect("shape")
}

impl DegreeMlp {
    pub fn new(degree: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let w1 = xavier(rng, 2 * degree, hidden);
        let w2 = xavier(rng, hidden, hidden);
        let w3 = xavier(rng, hidden, 2);
        DegreeMlp {
            degree,
            layers: [
                w1,
                Tensor::zeros(1, hidden),
                w2,
                Tensor::zeros(1, hidden),
                w3,
                Tensor::zeros(1, 2),
            ],
        }
    }

    fn shapes(degree: usize, hidden: usize) -> [(usize, usize); 6] {
        [
            (2 * degree, hidden),
            (1, hidden),
            (hidden, hidden),
            (1, hidden),
            (hidden, 2),
            (1, 2),
        ]
    }

    fn forward_on_tape<'t>(vars: &[Var<'t>], x: Var<'t>) -> Result<Var<'t>> {
        let h = x.matmul(vars[0])?.add(vars[1])?.relu();
        let h = h.matmul(vars[2])?.add(vars[3])?.relu();
        Ok(h.matmul(vars[4])?.add(vars[5])?)
    }

    /// Normalized displacement for one encoded ring.
    pub fn predict(&self, input: &[f64]) -> Point2 {
        let dense = |x: &[f64], w: &Tensor, b: &Tensor, relu: bool| -> Vec<f64> {
            let mut out = b.data().to_vec();
            for (k, &xv) in x.iter().enumerate() {
                for (o, &wv) in out.iter_mut().zip(w.row_slice(k)) {
                    *o += xv * wv;
                }
            }
            if relu {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            out
        };
        let [w1, b1, w2, b2, w3, b3] = &self.layers;
        let h = dense(input, w1, b1, true);
        let h = dense(&h, w2, b2, true);
        let o = dense(&h, w3, b3, false);
        Point2::new(o[0], o[1])
    }
}

/// Ring coordinates in the star's frame, flattened `x₀ y₀ x₁ y₁ …`, starting
/// at ring node `start`.
fn encode(star: &StarPolygon, frame: &NormalizationFrame, start: usize) -> Vec<f64> {
    let n = star.degree();
    (0..n)
        .flat_map(|k| {
            let p = frame.to_local(star.ring[(start + k) % n]);
            [p.x, p.y]
        })
        .collect()
}

/// Per-degree models with a Laplacian fallback for other degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct NnSmoother {
    pub hidden: usize,
    pub seed: u64,
    pub models: BTreeMap<usize, DegreeMlp>,
}

impl NnSmoother {
    pub fn untrained(config: &NnConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let models = (config.min_degree..=config.max_degree)
            .map(|d| (d, DegreeMlp::new(d, config.hidden, &mut rng)))
            .collect();
        NnSmoother {
            hidden: config.hidden,
            seed: config.seed,
            models,
        }
    }

    pub fn step(&self, star: &StarPolygon) -> Point2 {
        let Some(model) = self.models.get(&star.degree()) else {
            return laplacian_step(star);
        };
        match NormalizationFrame::of_star(star) {
            Ok(frame) => frame.to_world(model.predict(&encode(star, &frame, 0))),
            Err(_) => star.center,
        }
    }

    /// Mean squared error of the predicted positions in each star's frame.
    pub fn mse(&self, labels: &[LabeledStar]) -> f64 {
        let mut sum = 0.0;
        for l in labels {
            let frame = NormalizationFrame::of_star(&l.star).expect("labeled stars have extent");
            let err = frame.to_local(self.step(&l.star)) - frame.to_local(l.target);
            sum += err.norm_squared() / 2.0;
        }
        sum / labels.len().max(1) as f64
    }
}

/// Inputs and targets for one degree, with every cyclic start of each ring.
fn augmented_samples(labels: &[&LabeledStar]) -> Vec<(Vec<f64>, Point2)> {
    let mut out = Vec::new();
    for l in labels {
        let Ok(frame) = NormalizationFrame::of_star(&l.star) else {
            continue;
        };
        let target = frame.to_local(l.target);
        for start in 0..l.star.degree() {
            out.push((encode(&l.star, &frame, start), target));
        }
    }
    out
}

/// Fits one MLP per degree by minibatch Adam on the squared error.
pub fn train_nn_smoothing(labels: &[LabeledStar], config: &NnConfig) -> Result<NnSmoother> {
    if labels.is_empty() {
        return Err(MeshError::EmptyDataset("labels"));
    }
    if config.batch_size == 0 || config.hidden == 0 {
        return Err(MeshError::InvalidConfig(
            "batch_size and hidden must be positive".into(),
        ));
    }
    let mut smoother = NnSmoother::untrained(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let degrees: Vec<usize> = smoother.models.keys().copied().collect();
    for degree in degrees {
        let subset: Vec<&LabeledStar> = labels.iter().filter(|l| l.star.degree() == degree).collect();
        if subset.is_empty() {
            log::warn!("no labels of degree {degree}; stars of that degree fall back to Laplacian");
            smoother.models.remove(&degree);
            continue;
        }
        let mut samples = augmented_samples(&subset);
        let model = smoother.models.get_mut(&degree).expect("degree present");
        let mut adam = AdamState::new(model.layers.iter(), AdamConfig::default());
        for _ in 0..config.epochs {
            samples.shuffle(&mut rng);
            for chunk in samples.chunks(config.batch_size) {
                let x: Vec<f64> = chunk.iter().flat_map(|(i, _)| i.iter().copied()).collect();
                let y: Vec<f64> = chunk.iter().flat_map(|(_, t)| [t.x, t.y]).collect();
                let tape = Tape::new();
                let vars: Vec<Var<'_>> = model.layers.iter().map(|t| tape.param(t.clone())).collect();
                let xv = tape.constant(Tensor::new(chunk.len(), 2 * degree, x)?);
                let yv = tape.constant(Tensor::new(chunk.len(), 2, y)?);
                let loss = DegreeMlp::forward_on_tape(&vars, xv)?.sub(yv)?.square().mean();
                let grads = tape.backward(loss)?;
                let grads: Vec<Tensor> = vars.iter().map(|&v| grads.wrt(v)).collect();
                let mut params: Vec<&mut Tensor> = model.layers.iter_mut().collect();
                adam_update(&mut params, &grads, &mut adam, config.learning_rate)?;
            }
        }
    }
    Ok(smoother)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NnModelFile {
    degree: usize,
    #[serde(rename = "W1")]
    w1: Vec<String>,
    b1: Vec<String>,
    #[serde(rename = "W2")]
    w2: Vec<String>,
    b2: Vec<String>,
    #[serde(rename = "W3")]
    w3: Vec<String>,
    b3: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NnFile {
    format: String,
    hidden_dim: usize,
    seed: u64,
    models: Vec<NnModelFile>,
}

pub fn nn_checkpoint_to_string(smoother: &NnSmoother) -> String {
    let models = smoother
        .models
        .values()
        .map(|m| {
            let [w1, b1, w2, b2, w3, b3] = m.layers.each_ref().map(|t| encode_values(t.data()));
            NnModelFile {
                degree: m.degree,
                w1,
                b1,
                w2,
                b2,
                w3,
                b3,
            }
        })
        .collect();
    let file = NnFile {
        format: NN_CHECKPOINT_FORMAT.to_string(),
        hidden_dim: smoother.hidden,
        seed: smoother.seed,
        models,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn nn_checkpoint_from_str(text: &str) -> Result<NnSmoother> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| MeshError::CorruptFile(e.to_string()))?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(NN_CHECKPOINT_FORMAT) => {}
        Some(other) => {
            return Err(MeshError::VersionMismatch(format!(
                "expected format `{NN_CHECKPOINT_FORMAT}`, found `{other}`"
            )))
        }
        None => return Err(MeshError::CorruptFile("missing format".into())),
    }
    let file: NnFile = serde_json::from_value(value).map_err(|e| MeshError::CorruptFile(e.to_string()))?;
    let mut models = BTreeMap::new();
    for m in file.models {
        let arrays = [&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3];
        let mut layers = Vec::with_capacity(6);
        for (values, (rows, cols)) in arrays
            .into_iter()
            .zip(DegreeMlp::shapes(m.degree, file.hidden_dim))
        {
            if values.len() != rows * cols {
                return Err(MeshError::VersionMismatch(format!(
                    "degree {} layer has {} values, expected {}",
                    m.degree,
                    values.len(),
                    rows * cols
                )));
            }
            layers.push(Tensor::new(rows, cols, decode_values("nn layer", values)?)?);
        }
        let layers: [Tensor; 6] = layers.try_into().expect("six layers");
        models.insert(
            m.degree,
            DegreeMlp {
                degree: m.degree,
                layers,
            },
        );
    }
    Ok(NnSmoother {
        hidden: file.hidden_dim,
        seed: file.seed,
        models,
    })
}

pub fn save_nn_checkpoint(smoother: &NnSmoother, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, nn_checkpoint_to_string(smoother)).map_err(|e| MeshError::io(path, e))
}

pub fn load_nn_checkpoint(path: impl AsRef<Path>) -> Result<NnSmoother> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
    nn_checkpoint_from_str(&text)
}
