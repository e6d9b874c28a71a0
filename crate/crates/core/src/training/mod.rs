//! Label-free training of the graph smoother and the supervised per-degree
//! baseline.

mod gmsnet;
mod nn;
mod trace;

pub use gmsnet::{train_gmsnet, TrainConfig};
pub use nn::{
    load_nn_checkpoint, nn_checkpoint_from_str, nn_checkpoint_to_string, nn_generate_labels,
    save_nn_checkpoint, train_nn_smoothing, DegreeMlp, LabeledStar, NnConfig, NnSmoother,
    NN_CHECKPOINT_FORMAT,
};
pub use trace::{EpochRecord, TrainingTrace};
