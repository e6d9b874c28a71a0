use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{MeshError, Result};

use super::params::{param_shapes, ModelParams};

pub const CHECKPOINT_FORMAT: &str = "gmsnet-v1";

/// Shortest text that parses back to the identical `f64` (17 significant digits).
pub(crate) fn encode_values(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v:.16e}")).collect()
}

pub(crate) fn decode_values(name: &str, values: &[String]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| MeshError::CorruptFile(format!("{name}: bad number `{s}`")))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    hidden_dim: usize,
    seed: u64,
}

// Field order is the on-disk key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    hidden_dim: usize,
    seed: u64,
    #[serde(rename = "W_l")]
    w_l: Vec<String>,
    b_l: Vec<String>,
    gn_gamma: Vec<String>,
    gn_beta: Vec<String>,
    gn_alpha: Vec<String>,
    #[serde(rename = "W_g")]
    w_g: Vec<String>,
    in_gamma: Vec<String>,
    in_beta: Vec<String>,
    #[serde(rename = "mlp_W1")]
    mlp_w1: Vec<String>,
    mlp_b1: Vec<String>,
    #[serde(rename = "mlp_W2")]
    mlp_w2: Vec<String>,
    mlp_b2: Vec<String>,
}

impl CheckpointFile {
    fn arrays(&self) -> [&Vec<String>; 12] {
        [
            &self.w_l,
            &self.b_l,
            &self.gn_gamma,
            &self.gn_beta,
            &self.gn_alpha,
            &self.w_g,
            &self.in_gamma,
            &self.in_beta,
            &self.mlp_w1,
            &self.mlp_b1,
            &self.mlp_w2,
            &self.mlp_b2,
        ]
    }
}

pub fn checkpoint_to_string(params: &ModelParams) -> String {
    let [w_l, b_l, gn_gamma, gn_beta, gn_alpha, w_g, in_gamma, in_beta, mlp_w1, mlp_b1, mlp_w2, mlp_b2] =
        params.tensors().map(|t| encode_values(t.data()));
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        hidden_dim: params.hidden,
        seed: params.seed,
        w_l,
        b_l,
        gn_gamma,
        gn_beta,
        gn_alpha,
        w_g,
        in_gamma,
        in_beta,
        mlp_w1,
        mlp_b1,
        mlp_w2,
        mlp_b2,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn checkpoint_from_str(text: &str) -> Result<ModelParams> {
    // read the header alone first so a foreign format reports as such
    let header: Header = serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| serde_json::from_value(v).ok())
        .ok_or_else(|| MeshError::CorruptFile("unreadable checkpoint header".into()))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(MeshError::VersionMismatch(format!(
            "expected format `{CHECKPOINT_FORMAT}`, found `{}`",
            header.format
        )));
    }
    let file: CheckpointFile =
        serde_json::from_str(text).map_err(|e| MeshError::CorruptFile(e.to_string()))?;
    let h = file.hidden_dim;
    if h < 2 {
        return Err(MeshError::CorruptFile(format!("hidden_dim {h}")));
    }
    let names = super::params::PARAM_NAMES;
    let mut tensors = Vec::with_capacity(12);
    for ((values, (rows, cols)), name) in file.arrays().into_iter().zip(param_shapes(h)).zip(names) {
        if values.len() != rows * cols {
            return Err(MeshError::VersionMismatch(format!(
                "{name} has {} values; hidden_dim {h} needs {}",
                values.len(),
                rows * cols
            )));
        }
        let data = decode_values(name, values)?;
        tensors.push(Tensor::new(rows, cols, data)?);
    }
    let mut it = tensors.into_iter();
    let mut next = || it.next().expect("12 tensors");
    let params = ModelParams {
        hidden: h,
        seed: file.seed,
        w_l: next(),
        b_l: next(),
        gn_gamma: next(),
        gn_beta: next(),
        gn_alpha: next(),
        w_g: next(),
        in_gamma: next(),
        in_beta: next(),
        mlp_w1: next(),
        mlp_b1: next(),
        mlp_w2: next(),
        mlp_b2: next(),
    };
    if !params.all_finite() {
        return Err(MeshError::CorruptFile("non-finite parameter".into()));
    }
    Ok(params)
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_to_string(params)).map_err(|e| MeshError::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
    checkpoint_from_str(&text)
}
