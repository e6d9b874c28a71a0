//! The graph smoothing network: star normalization, a single residual
//! graph-convolution block and a small head that predicts the free node's
//! displacement.

mod checkpoint;
mod forward;
mod frame;
mod graph;
mod params;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT,
};
pub(crate) use checkpoint::{decode_values, encode_values};
pub use forward::{forward, forward_displacement, forward_on_tape, graph_norm, instance_norm, VAR_FLOOR};
pub use frame::{normalize_star, NormalizationFrame};
pub use graph::{normalized_adjacency, normalized_adjacency_from_edges, StarGraph};
pub use params::{init_params, param_shapes, ModelParams, ParamVars, DEFAULT_HIDDEN, PARAM_NAMES};
