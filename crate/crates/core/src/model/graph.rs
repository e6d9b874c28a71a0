use crate::autodiff::Tensor;
use crate::error::Result;
use crate::mesh::StarPolygon;

use super::frame::{normalize_star, NormalizationFrame};

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` for an undirected graph on `nodes` vertices.
pub fn normalized_adjacency_from_edges(nodes: usize, edges: &[(usize, usize)]) -> Tensor {
    let mut a = Tensor::zeros(nodes, nodes);
    for i in 0..nodes {
        a.set(i, i, 1.0);
    }
    for &(i, j) in edges {
        a.set(i, j, 1.0);
        a.set(j, i, 1.0);
    }
    let inv_sqrt_deg: Vec<f64> = (0..nodes)
        .map(|i| 1.0 / a.row_slice(i).iter().sum::<f64>().sqrt())
        .collect();
    for i in 0..nodes {
        for j in 0..nodes {
            let v = a.get(i, j);
            if v != 0.0 {
                a.set(i, j, v * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
            }
        }
    }
    a
}

/// Normalized adjacency of a star with the free node as vertex 0.
pub fn normalized_adjacency(star: &StarPolygon) -> Tensor {
    normalized_adjacency_from_edges(star.degree() + 1, &star.edges())
}

/// Network input for one star: normalized coordinates (row 0 is the free
/// node), normalized adjacency and the frame to map outputs back.
#[derive(Debug, Clone)]
pub struct StarGraph {
    pub features: Tensor,
    pub adjacency: Tensor,
    pub frame: NormalizationFrame,
}

impl StarGraph {
    pub const FREE_NODE: usize = 0;

    pub fn new(star: &StarPolygon) -> Result<Self> {
        let (pts, frame) = normalize_star(star)?;
        let data = pts.iter().flat_map(|p| [p.x, p.y]).collect();
        Ok(StarGraph {
            features: Tensor::new(pts.len(), 2, data)?,
            adjacency: normalized_adjacency(star),
            frame,
        })
    }

    pub fn node_count(&self) -> usize {
        self.features.rows()
    }
}
