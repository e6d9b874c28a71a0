use crate::autodiff::{AutodiffError, Tape, Var};
use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::StarPolygon;

use super::frame::NormalizationFrame;
use super::graph::StarGraph;
use super::params::{ModelParams, ParamVars};

/// Lower bound on the variances inside both normalization layers
/// (a standard-deviation floor of 1e-6).
pub const VAR_FLOOR: f64 = 1e-12;

/// Per-feature normalization across the rows of `x` with learnable shift
/// fraction `alpha`: `gamma * (x - alpha * mean) / std + beta`.
pub fn graph_norm<'t>(
    x: Var<'t>,
    gamma: Var<'t>,
    beta: Var<'t>,
    alpha: Var<'t>,
) -> Result<Var<'t>, AutodiffError> {
    let centered = x.sub(x.mean_rows().mul(alpha)?)?;
    let std = centered.square().mean_rows().clamp_min(VAR_FLOOR).sqrt();
    centered.div(std)?.mul(gamma)?.add(beta)
}

/// Normalization of a single `1 × H` row across its channels.
pub fn instance_norm<'t>(x: Var<'t>, gamma: Var<'t>, beta: Var<'t>) -> Result<Var<'t>, AutodiffError> {
    let centered = x.sub(x.mean())?;
    let std = centered.square().mean().clamp_min(VAR_FLOOR).sqrt();
    centered.div(std)?.mul(gamma)?.add(beta)
}

/// Recorded forward pass; returns the `1 × 2` displacement of the free node
/// in normalized coordinates.
pub fn forward_on_tape<'t>(
    tape: &'t Tape,
    p: &ParamVars<'t>,
    graph: &StarGraph,
) -> Result<Var<'t>, AutodiffError> {
    let x = tape.constant(graph.features.clone());
    let adj = tape.constant(graph.adjacency.clone());
    let h = x.matmul(p.w_l)?.add(p.b_l)?;
    let h = graph_norm(h, p.gn_gamma, p.gn_beta, p.gn_alpha)?;
    let g = adj.matmul(h.relu())?.matmul(p.w_g)?.add(h)?;
    let free = g.select_row(StarGraph::FREE_NODE)?;
    let z = free.matmul(p.mlp_w1)?.add(p.mlp_b1)?;
    let z = instance_norm(z, p.in_gamma, p.in_beta)?.relu();
    z.matmul(p.mlp_w2)?.add(p.mlp_b2)
}

/// Normalized displacement computed without a tape. Only the free node's row
/// of the graph convolution is evaluated.
pub fn forward_displacement(
    params: &ModelParams,
    star: &StarPolygon,
) -> Result<(Point2, NormalizationFrame)> {
    let n = star.degree();
    if n < 3 {
        return Err(MeshError::InvalidMesh(format!("star of degree {n}")));
    }
    let frame = NormalizationFrame::of_star(star)?;
    let hd = params.hidden;
    let rows = n + 1;
    let wl = params.w_l.data();
    let bl = params.b_l.data();

    // embedding, then per-feature statistics over the star's nodes
    let mut h = vec![0.0; rows * hd];
    for r in 0..rows {
        let p = if r == 0 {
            Point2::ZERO
        } else {
            frame.to_local(star.ring[r - 1])
        };
        let out = &mut h[r * hd..(r + 1) * hd];
        for j in 0..hd {
            out[j] = p.x * wl[j] + p.y * wl[hd + j] + bl[j];
        }
    }
    let (gamma, beta, alpha) = (
        params.gn_gamma.data(),
        params.gn_beta.data(),
        params.gn_alpha.data(),
    );
    for j in 0..hd {
        let mean = (0..rows).map(|r| h[r * hd + j]).sum::<f64>() / rows as f64;
        let shift = mean * alpha[j];
        let var = (0..rows).map(|r| (h[r * hd + j] - shift).powi(2)).sum::<f64>() / rows as f64;
        let std = var.max(VAR_FLOOR).sqrt();
        for r in 0..rows {
            let v = &mut h[r * hd + j];
            *v = (*v - shift) / std * gamma[j] + beta[j];
        }
    }

    // free-node row of Ã·relu(H): the center touches every node; each ring
    // node has the center, two ring neighbours and itself
    let a_cc = 1.0 / rows as f64;
    let a_cr = 1.0 / (4.0 * rows as f64).sqrt();
    let mut agg = vec![0.0; hd];
    for r in 0..rows {
        let w = if r == 0 { a_cc } else { a_cr };
        for j in 0..hd {
            agg[j] += w * h[r * hd + j].max(0.0);
        }
    }
    let wg = params.w_g.data();
    let mut g: Vec<f64> = h[..hd].to_vec();
    for (k, &a) in agg.iter().enumerate() {
        let row = &wg[k * hd..(k + 1) * hd];
        for j in 0..hd {
            g[j] += a * row[j];
        }
    }

    let w1 = params.mlp_w1.data();
    let mut z = params.mlp_b1.data().to_vec();
    for (k, &a) in g.iter().enumerate() {
        let row = &w1[k * hd..(k + 1) * hd];
        for j in 0..hd {
            z[j] += a * row[j];
        }
    }
    let mean = z.iter().sum::<f64>() / hd as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / hd as f64;
    let std = var.max(VAR_FLOOR).sqrt();
    let (ig, ib) = (params.in_gamma.data(), params.in_beta.data());
    let w2 = params.mlp_w2.data();
    let b2 = params.mlp_b2.data();
    let (mut ox, mut oy) = (b2[0], b2[1]);
    for j in 0..hd {
        let a = ((z[j] - mean) / std * ig[j] + ib[j]).max(0.0);
        ox += a * w2[2 * j];
        oy += a * w2[2 * j + 1];
    }
    Ok((Point2::new(ox, oy), frame))
}

/// Proposed free-node position, before shift truncation.
pub fn forward(params: &ModelParams, star: &StarPolygon) -> Result<Point2> {
    let (out, frame) = forward_displacement(params, star)?;
    Ok(frame.to_world(out))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::model::init_params;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_star(rng: &mut impl Rng, n: usize) -> StarPolygon {
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

    fn taped_graph(params: &ModelParams, graph: &StarGraph) -> Point2 {
        let tape = Tape::new();
        let pv = params.on_tape(&tape);
        let out = forward_on_tape(&tape, &pv, graph).unwrap().value();
        graph.frame.to_world(Point2::new(out.data()[0], out.data()[1]))
    }

    fn taped(params: &ModelParams, star: &StarPolygon) -> Point2 {
        taped_graph(params, &StarGraph::new(star).unwrap())
    }

    fn perturbed(seed: u64) -> ModelParams {
        // non-trivial normalization parameters so every path is exercised
        let mut p = init_params(16, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for t in [
            &mut p.b_l,
            &mut p.gn_gamma,
            &mut p.gn_beta,
            &mut p.gn_alpha,
            &mut p.in_gamma,
            &mut p.in_beta,
            &mut p.mlp_b1,
        ] {
            for v in t.data_mut() {
                *v += rng.gen_range(-0.5..0.5);
            }
        }
        p
    }

    #[test]
    fn fast_path_matches_tape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = perturbed(3);
        for n in 3..=12 {
            let star = random_star(&mut rng, n);
            let a = forward(&params, &star).unwrap();
            let b = taped(&params, &star);
            assert!((a - b).norm() < 1e-12, "degree {n}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_head_is_identity() {
        let mut params = init_params(32, 0).unwrap();
        params.mlp_w2 = Tensor::zeros(32, 2);
        let star = random_star(&mut ChaCha8Rng::seed_from_u64(2), 6);
        assert_eq!(forward(&params, &star).unwrap(), star.center);
    }

    /// Relabels ring nodes by `perm` (row `i + 1` moves to `perm[i] + 1`).
    fn permute(graph: &StarGraph, perm: &[usize]) -> StarGraph {
        let n = graph.node_count();
        let map = |i: usize| if i == 0 { 0 } else { perm[i - 1] + 1 };
        let mut features = Tensor::zeros(n, 2);
        let mut adjacency = Tensor::zeros(n, n);
        for i in 0..n {
            for c in 0..2 {
                features.set(map(i), c, graph.features.get(i, c));
            }
            for j in 0..n {
                adjacency.set(map(i), map(j), graph.adjacency.get(i, j));
            }
        }
        StarGraph {
            features,
            adjacency,
            frame: graph.frame,
        }
    }

    #[test]
    fn node_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = perturbed(5);
        for _ in 0..20 {
            let n = rng.gen_range(3..=12);
            let star = random_star(&mut rng, n);
            let graph = StarGraph::new(&star).unwrap();
            let base = taped_graph(&params, &graph);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let other = taped_graph(&params, &permute(&graph, &perm));
            assert!((base - other).norm() < 1e-9);
            // a rotated, reversed ring is a relabeling too
            let mut ring = star.ring.clone();
            ring.rotate_left(rng.gen_range(0..n));
            ring.reverse();
            let flipped = forward(&params, &StarPolygon::new(star.center, ring)).unwrap();
            assert!((forward(&params, &star).unwrap() - flipped).norm() < 1e-9);
        }
    }

    #[test]
    fn graph_norm_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (rows, cols) = (7, 5);
        let x: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.5..1.5)).collect();
        let b: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        let tape = Tape::new();
        let out = graph_norm(
            tape.constant(Tensor::new(rows, cols, x.clone()).unwrap()),
            tape.constant(Tensor::row(&g)),
            tape.constant(Tensor::row(&b)),
            tape.constant(Tensor::row(&a)),
        )
        .unwrap()
        .value();
        for j in 0..cols {
            let col: Vec<f64> = (0..rows).map(|r| x[r * cols + j]).collect();
            let mu = col.iter().sum::<f64>() / rows as f64;
            let var = col.iter().map(|v| (v - a[j] * mu).powi(2)).sum::<f64>() / rows as f64;
            for r in 0..rows {
                let expected = g[j] * (col[r] - a[j] * mu) / var.sqrt() + b[j];
                assert!((out.get(r, j) - expected).abs() < 1e-9);
            }
        }
        // with alpha = 1 each feature's mean lands on beta
        let ones = vec![1.0; cols];
        let out = graph_norm(
            tape.constant(Tensor::new(rows, cols, x).unwrap()),
            tape.constant(Tensor::row(&g)),
            tape.constant(Tensor::row(&b)),
            tape.constant(Tensor::row(&ones)),
        )
        .unwrap()
        .value();
        for j in 0..cols {
            let mean = (0..rows).map(|r| out.get(r, j)).sum::<f64>() / rows as f64;
            assert!((mean - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn every_degree_evaluates() {
        let params = init_params(32, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 3..=12 {
            let p = forward(&params, &random_star(&mut rng, n)).unwrap();
            assert!(p.is_finite());
        }
    }

    #[test]
    fn similarity_equivariance() {
        let params = perturbed(11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = rng.gen_range(3..=12);
            let star = random_star(&mut rng, n);
            let base = forward(&params, &star).unwrap();
            for s in [0.1, 1.0, 10.0] {
                let t = Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
                let moved = StarPolygon::new(
                    star.center * s + t,
                    star.ring.iter().map(|&p| p * s + t).collect(),
                );
                let got = forward(&params, &moved).unwrap();
                assert!((got - (base * s + t)).norm() < 1e-9);
            }
        }
    }
}
