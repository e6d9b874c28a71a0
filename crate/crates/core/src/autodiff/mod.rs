//! Reverse-mode automatic differentiation over small dense matrices, and
//! the Adam optimizer.
//!
//! Operations are recorded on a [`Tape`] as they are evaluated; calling
//! [`Tape::backward`] on a scalar result walks the record in reverse and
//! returns the gradient of every tracked leaf. Binary operations broadcast
//! their right operand only when it is a `1 × 1` scalar or a `1 × cols` row.

mod adam;
mod gradcheck;
mod tape;
mod tensor;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use gradcheck::{grad_check, grad_check_with_step, FD_STEP};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("backward needs a scalar output, got shape {0:?}")]
    NonScalarOutput((usize, usize)),
    #[error("variable belongs to a different tape")]
    ForeignVar,
}
