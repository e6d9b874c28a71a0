use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{MeshError, Result};

pub const DEFAULT_HIDDEN: usize = 32;

/// Names of the parameter tensors, in checkpoint and optimizer order.
pub const PARAM_NAMES: [&str; 12] = [
    "W_l", "b_l", "gn_gamma", "gn_beta", "gn_alpha", "W_g", "in_gamma", "in_beta", "mlp_W1", "mlp_b1",
    "mlp_W2", "mlp_b2",
];

/// Weights of the graph smoothing network. Row vectors are `1 × H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hidden: usize,
    pub seed: u64,
    /// Embedding, `2 × H`, and its bias.
    pub w_l: Tensor,
    pub b_l: Tensor,
    pub gn_gamma: Tensor,
    pub gn_beta: Tensor,
    pub gn_alpha: Tensor,
    /// Graph convolution weight, `H × H`.
    pub w_g: Tensor,
    pub in_gamma: Tensor,
    pub in_beta: Tensor,
    pub mlp_w1: Tensor,
    pub mlp_b1: Tensor,
    /// Output layer, `H × 2`.
    pub mlp_w2: Tensor,
    pub mlp_b2: Tensor,
}

/// Expected shape of each tensor in [`PARAM_NAMES`] order.
pub fn param_shapes(hidden: usize) -> [(usize, usize); 12] {
    let h = hidden;
    [
        (2, h),
        (1, h),
        (1, h),
        (1, h),
        (1, h),
        (h, h),
        (1, h),
        (1, h),
        (h, h),
        (1, h),
        (h, 2),
        (1, 2),
    ]
}

fn xavier(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    Tensor::new(fan_in, fan_out, data).expect("shape")
}

/// Xavier-uniform weights, zero biases, unit scales and zero shifts.
pub fn init_params(hidden: usize, seed: u64) -> Result<ModelParams> {
    if hidden < 2 {
        return Err(MeshError::InvalidConfig(format!(
            "hidden dimension must be at least 2, got {hidden}"
        )));
    }
    let h = hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_l = xavier(&mut rng, 2, h);
    let w_g = xavier(&mut rng, h, h);
    let mlp_w1 = xavier(&mut rng, h, h);
    let mlp_w2 = xavier(&mut rng, h, 2);
    Ok(ModelParams {
        hidden,
        seed,
        w_l,
        b_l: Tensor::zeros(1, h),
        gn_gamma: Tensor::filled(1, h, 1.0),
        gn_beta: Tensor::zeros(1, h),
        gn_alpha: Tensor::filled(1, h, 1.0),
        w_g,
        in_gamma: Tensor::filled(1, h, 1.0),
        in_beta: Tensor::zeros(1, h),
        mlp_w1,
        mlp_b1: Tensor::zeros(1, h),
        mlp_w2,
        mlp_b2: Tensor::zeros(1, 2),
    })
}

impl ModelParams {
    pub fn tensors(&self) -> [&Tensor; 12] {
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

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 12] {
        [
            &mut self.w_l,
            &mut self.b_l,
            &mut self.gn_gamma,
            &mut self.gn_beta,
            &mut self.gn_alpha,
            &mut self.w_g,
            &mut self.in_gamma,
            &mut self.in_beta,
            &mut self.mlp_w1,
            &mut self.mlp_b1,
            &mut self.mlp_w2,
            &mut self.mlp_b2,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }

    /// Records every tensor on `tape` as a tracked leaf.
    pub fn on_tape<'t>(&self, tape: &'t Tape) -> ParamVars<'t> {
        let v = |t: &Tensor| tape.param(t.clone());
        ParamVars {
            w_l: v(&self.w_l),
            b_l: v(&self.b_l),
            gn_gamma: v(&self.gn_gamma),
            gn_beta: v(&self.gn_beta),
            gn_alpha: v(&self.gn_alpha),
            w_g: v(&self.w_g),
            in_gamma: v(&self.in_gamma),
            in_beta: v(&self.in_beta),
            mlp_w1: v(&self.mlp_w1),
            mlp_b1: v(&self.mlp_b1),
            mlp_w2: v(&self.mlp_w2),
            mlp_b2: v(&self.mlp_b2),
        }
    }
}

/// [`ModelParams`] recorded on a tape.
#[derive(Debug, Clone, Copy)]
pub struct ParamVars<'t> {
    pub w_l: Var<'t>,
    pub b_l: Var<'t>,
    pub gn_gamma: Var<'t>,
    pub gn_beta: Var<'t>,
    pub gn_alpha: Var<'t>,
    pub w_g: Var<'t>,
    pub in_gamma: Var<'t>,
    pub in_beta: Var<'t>,
    pub mlp_w1: Var<'t>,
    pub mlp_b1: Var<'t>,
    pub mlp_w2: Var<'t>,
    pub mlp_b2: Var<'t>,
}

impl<'t> ParamVars<'t> {
    /// Inverse of [`ParamVars::vars`]; `None` unless given exactly 12 vars.
    pub fn from_vars(vars: &[Var<'t>]) -> Option<Self> {
        let &[w_l, b_l, gn_gamma, gn_beta, gn_alpha, w_g, in_gamma, in_beta, mlp_w1, mlp_b1, mlp_w2, mlp_b2] =
            vars
        else {
            return None;
        };
        Some(ParamVars {
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
        })
    }

    pub fn vars(&self) -> [Var<'t>; 12] {
        [
            self.w_l,
            self.b_l,
            self.gn_gamma,
            self.gn_beta,
            self.gn_alpha,
            self.w_g,
            self.in_gamma,
            self.in_beta,
            self.mlp_w1,
            self.mlp_b1,
            self.mlp_w2,
            self.mlp_b2,
        ]
    }
}
