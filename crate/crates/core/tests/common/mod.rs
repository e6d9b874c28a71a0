//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use meshsmith::autodiff::{grad_check, AutodiffError, Tape, Tensor, Var};
use meshsmith::model::{init_params, ModelParams};
use meshsmith::{Point2, StarPolygon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PRIMITIVE_TRIALS: usize = 100;

pub fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Tensor::new(rows, cols, data).unwrap()
}

/// Random magnitude in `[lo, hi)` with random sign.
pub fn random_away_from_zero(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| {
            let m = rng.gen_range(lo..hi);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    Tensor::new(rows, cols, data).unwrap()
}

pub type PrimitiveOp = for<'t> fn(&[Var<'t>]) -> Result<Var<'t>, AutodiffError>;

pub struct Primitive {
    pub name: &'static str,
    pub inputs: fn(&mut ChaCha8Rng) -> Vec<Tensor>,
    pub op: PrimitiveOp,
}

fn one(r: &mut ChaCha8Rng) -> Vec<Tensor> {
    vec![random(r, 4, 3, -2.0, 2.0)]
}

fn pair(r: &mut ChaCha8Rng) -> Vec<Tensor> {
    vec![random(r, 3, 2, -2.0, 2.0), random(r, 3, 2, -2.0, 2.0)]
}

/// Every differentiable primitive with an input distribution that keeps
/// away from its kinks and singularities.
pub fn primitives() -> Vec<Primitive> {
    vec![
        Primitive {
            name: "matmul",
            inputs: |r| vec![random(r, 3, 4, -2.0, 2.0), random(r, 4, 2, -2.0, 2.0)],
            op: |v| v[0].matmul(v[1]),
        },
        Primitive {
            name: "add",
            inputs: pair,
            op: |v| v[0].add(v[1]),
        },
        Primitive {
            name: "sub",
            inputs: pair,
            op: |v| v[0].sub(v[1]),
        },
        Primitive {
            name: "mul",
            inputs: pair,
            op: |v| v[0].mul(v[1]),
        },
        Primitive {
            name: "div",
            inputs: |r| {
                vec![
                    random(r, 2, 3, -2.0, 2.0),
                    random_away_from_zero(r, 2, 3, 0.5, 2.0),
                ]
            },
            op: |v| v[0].div(v[1]),
        },
        Primitive {
            name: "add_row_broadcast",
            inputs: |r| vec![random(r, 4, 3, -2.0, 2.0), random(r, 1, 3, -2.0, 2.0)],
            op: |v| v[0].add(v[1]),
        },
        Primitive {
            name: "mul_scalar_broadcast",
            inputs: |r| vec![random(r, 4, 3, -2.0, 2.0), random(r, 1, 1, -2.0, 2.0)],
            op: |v| v[0].mul(v[1]),
        },
        Primitive {
            name: "div_row_broadcast",
            inputs: |r| {
                vec![
                    random(r, 4, 3, -2.0, 2.0),
                    random_away_from_zero(r, 1, 3, 0.5, 2.0),
                ]
            },
            op: |v| v[0].div(v[1]),
        },
        Primitive {
            name: "maximum",
            inputs: |r| {
                let a = random(r, 2, 3, -2.0, 2.0);
                let mut b = a.clone();
                b.add_assign(&random_away_from_zero(r, 2, 3, 0.1, 1.0));
                vec![a, b]
            },
            op: |v| v[0].maximum(v[1]),
        },
        Primitive {
            name: "neg",
            inputs: one,
            op: |v| Ok(v[0].neg()),
        },
        Primitive {
            name: "scale",
            inputs: one,
            op: |v| Ok(v[0].scale(-1.7)),
        },
        Primitive {
            name: "add_scalar",
            inputs: one,
            op: |v| Ok(v[0].add_scalar(0.3)),
        },
        Primitive {
            name: "square",
            inputs: one,
            op: |v| Ok(v[0].square()),
        },
        Primitive {
            name: "relu",
            inputs: |r| vec![random_away_from_zero(r, 3, 3, 0.01, 2.0)],
            op: |v| Ok(v[0].relu()),
        },
        Primitive {
            name: "sqrt",
            inputs: |r| vec![random(r, 2, 4, 0.2, 3.0)],
            op: |v| Ok(v[0].sqrt()),
        },
        Primitive {
            name: "acos",
            inputs: |r| vec![random(r, 2, 4, -0.9, 0.9)],
            op: |v| Ok(v[0].acos()),
        },
        Primitive {
            name: "clamp",
            // entries kept at least 0.01 from either bound
            inputs: |r| {
                let data = (0..9)
                    .map(|_| {
                        let v: f64 = r.gen_range(-2.0..2.0);
                        if (v.abs() - 1.0).abs() < 0.01 {
                            v * 1.5
                        } else {
                            v
                        }
                    })
                    .collect();
                vec![Tensor::new(3, 3, data).unwrap()]
            },
            op: |v| Ok(v[0].clamp(-1.0, 1.0)),
        },
        Primitive {
            name: "sum",
            inputs: one,
            op: |v| Ok(v[0].sum()),
        },
        Primitive {
            name: "mean",
            inputs: one,
            op: |v| Ok(v[0].mean()),
        },
        Primitive {
            name: "mean_rows",
            inputs: one,
            op: |v| Ok(v[0].mean_rows()),
        },
        Primitive {
            name: "sum_cols",
            inputs: one,
            op: |v| Ok(v[0].sum_cols()),
        },
        Primitive {
            name: "variance",
            inputs: one,
            op: |v| v[0].variance(),
        },
        Primitive {
            name: "variance_rows",
            inputs: one,
            op: |v| v[0].variance_rows(),
        },
        Primitive {
            name: "concat_rows",
            inputs: |r| vec![random(r, 1, 3, -2.0, 2.0), random(r, 2, 3, -2.0, 2.0)],
            op: |v| v[0].tape().concat_rows(v),
        },
        Primitive {
            name: "select_row",
            inputs: one,
            op: |v| v[0].select_row(2),
        },
    ]
}

/// Largest grad-check error of `p` over [`PRIMITIVE_TRIALS`] random inputs.
/// The output is reduced to a scalar through a fixed random weighting so
/// every output entry contributes a distinct gradient.
pub fn primitive_error(p: &Primitive) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(p.name.bytes().map(u64::from).sum());
    let mut worst = 0.0f64;
    for _ in 0..PRIMITIVE_TRIALS {
        let point = (p.inputs)(&mut rng);
        let shape = {
            let tape = Tape::new();
            let vars: Vec<Var<'_>> = point.iter().map(|t| tape.constant(t.clone())).collect();
            (p.op)(&vars).unwrap().shape()
        };
        let w = random(&mut rng, shape.0, shape.1, -1.0, 1.0);
        let err = grad_check(
            |tape, v| Ok((p.op)(v)?.mul(tape.constant(w.clone()))?.sum()),
            &point,
        )
        .unwrap();
        worst = worst.max(err);
    }
    worst
}

/// A star of degree `n` with jittered angles and radii around a center near
/// the origin.
pub fn random_star(rng: &mut impl Rng, n: usize) -> StarPolygon {
    let ring = (0..n)
        .map(|k| {
            let a = (k as f64 + rng.gen_range(-0.3..0.3)) * std::f64::consts::TAU / n as f64;
            Point2::new(a.cos(), a.sin()) * rng.gen_range(0.6..1.4)
        })
        .collect();
    StarPolygon::new(
        Point2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
        ring,
    )
}

/// Initial parameters with every bias and normalization parameter moved off
/// its default so each path through the network carries signal.
pub fn perturbed_params(hidden: usize, seed: u64) -> ModelParams {
    let mut p = init_params(hidden, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for t in [
        &mut p.b_l,
        &mut p.gn_gamma,
        &mut p.gn_beta,
        &mut p.gn_alpha,
        &mut p.in_gamma,
        &mut p.in_beta,
        &mut p.mlp_b1,
        &mut p.mlp_b2,
    ] {
        for v in t.data_mut() {
            *v += rng.gen_range(-0.5..0.5);
        }
    }
    p
}
