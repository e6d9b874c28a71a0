//! Triangle meshes, one-ring extraction and negative-element checks.

use std::collections::HashMap;

use crate::error::{MeshError, Result};
use crate::geometry::{signed_area, BBox, Point2};

/// Relative area threshold below which a triangle counts as negative.
pub const AREA_EPS_REL: f64 = 1e-12;

/// A 2D triangle mesh with counter-clockwise elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// `true` marks an immovable node.
    pub fixed: Vec<bool>,
}

impl Mesh {
    /// Builds a mesh after checking connectivity. Orientation is not checked
    /// here; see [`Mesh::validate_orientation`].
    pub fn new(nodes: Vec<Point2>, triangles: Vec<[usize; 3]>, fixed: Vec<bool>) -> Result<Self> {
        if fixed.len() != nodes.len() {
            return Err(MeshError::InvalidMesh(format!(
                "{} fixed flags for {} nodes",
                fixed.len(),
                nodes.len()
            )));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nodes.len()) {
                return Err(MeshError::InvalidMesh(format!(
                    "triangle {t} references node {bad} but there are {} nodes",
                    nodes.len()
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::InvalidMesh(format!(
                    "triangle {t} repeats a node: {tri:?}"
                )));
            }
        }
        if let Some(i) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::InvalidMesh(format!("node {i} is not finite")));
        }
        Ok(Mesh {
            nodes,
            triangles,
            fixed,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::from_points(self.nodes.iter().copied())
    }

    /// Absolute area threshold for negative-element tests on this mesh.
    pub fn area_eps(&self) -> f64 {
        self.bbox().map_or(0.0, |b| AREA_EPS_REL * b.area())
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Fails on the first triangle with non-positive signed area.
    pub fn validate_orientation(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.signed_area(t) <= 0.0 {
                return Err(MeshError::InvalidMesh(format!(
                    "triangle {t} {:?} is clockwise or degenerate",
                    self.triangles[t]
                )));
            }
        }
        Ok(())
    }

    /// Number of elements whose signed area is at most [`Mesh::area_eps`].
    pub fn negative_element_count(&self) -> usize {
        let eps = self.area_eps();
        (0..self.triangles.len())
            .filter(|&t| self.signed_area(t) <= eps)
            .count()
    }

    /// Nodes incident to an edge used by exactly one triangle.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut edge_uses: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_uses.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary = vec![false; self.nodes.len()];
        for ((a, b), uses) in edge_uses {
            if uses == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        boundary
    }

    /// Flags every topological boundary node as fixed, in addition to the
    /// nodes already fixed. Nodes not referenced by any triangle are fixed too.
    pub fn fix_boundary(&mut self) {
        let mut used = vec![false; self.nodes.len()];
        for tri in &self.triangles {
            for &i in tri {
                used[i] = true;
            }
        }
        for (i, on_boundary) in self.boundary_nodes().into_iter().enumerate() {
            if on_boundary || !used[i] {
                self.fixed[i] = true;
            }
        }
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.fixed[i]).collect()
    }
}

/// A free node and its counter-clockwise one-ring.
#[derive(Debug, Clone, PartialEq)]
pub struct StarPolygon {
    pub center: Point2,
    pub ring: Vec<Point2>,
}

impl StarPolygon {
    pub fn new(center: Point2, ring: Vec<Point2>) -> Self {
        StarPolygon { center, ring }
    }

    pub fn degree(&self) -> usize {
        self.ring.len()
    }

    /// Local connectivity: node 0 is the center, node `i + 1` is `ring[i]`.
    /// Contains each center–ring spoke and each ring–ring edge once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.ring.len();
        let mut edges = Vec::with_capacity(2 * n);
        edges.extend((1..=n).map(|i| (0, i)));
        edges.extend((0..n).map(|i| (i + 1, (i + 1) % n + 1)));
        edges
    }

    /// Ring edge `i`: `(ring[i], ring[i + 1])` cyclically.
    #[inline]
    pub fn ring_edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.ring.len();
        (self.ring[i], self.ring[(i + 1) % n])
    }

    /// Area threshold for negative-element tests, relative to the ring's
    /// bounding box.
    pub fn area_eps(&self) -> f64 {
        BBox::from_points(self.ring.iter().copied()).map_or(0.0, |b| AREA_EPS_REL * b.area())
    }

    /// Bounding box over the center and the ring.
    pub fn bbox(&self) -> BBox {
        BBox::from_points(std::iter::once(self.center).chain(self.ring.iter().copied()))
            .expect("star contains its center")
    }

    /// Copy of this star with the center moved to `center`.
    pub fn with_center(&self, center: Point2) -> StarPolygon {
        StarPolygon {
            center,
            ring: self.ring.clone(),
        }
    }

    pub fn ring_centroid(&self) -> Point2 {
        let sum = self.ring.iter().fold(Point2::ZERO, |acc, &p| acc + p);
        sum / self.ring.len() as f64
    }
}

/// True iff some fan triangle `(candidate, ringᵢ, ringᵢ₊₁)` has signed area
/// at or below the star's area threshold.
pub fn has_negative_element(star: &StarPolygon, candidate: Point2) -> bool {
    has_element_at_or_below(star, candidate, star.area_eps())
}

/// True iff some fan triangle around `candidate` has signed area at or below `eps`.
pub fn has_element_at_or_below(star: &StarPolygon, candidate: Point2, eps: f64) -> bool {
    (0..star.ring.len()).any(|i| {
        let (a, b) = star.ring_edge(i);
        signed_area(candidate, a, b) <= eps
    })
}

/// Orders the one-ring of `node` counter-clockwise starting at the smallest
/// neighbor index. `incident` lists triangles containing `node`.
fn ordered_ring(node: usize, incident: impl Iterator<Item = [usize; 3]>) -> Result<Vec<usize>> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    for tri in incident {
        let k = tri
            .iter()
            .position(|&v| v == node)
            .expect("triangle is incident to node");
        let a = tri[(k + 1) % 3];
        let b = tri[(k + 2) % 3];
        if next.insert(a, b).is_some() {
            return Err(MeshError::OpenRing(node));
        }
    }
    let start = *next.keys().min().ok_or(MeshError::OpenRing(node))?;
    let mut ring = Vec::with_capacity(next.len());
    let mut cur = start;
    loop {
        ring.push(cur);
        cur = *next.get(&cur).ok_or(MeshError::OpenRing(node))?;
        if cur == start {
            break;
        }
        if ring.len() > next.len() {
            return Err(MeshError::OpenRing(node));
        }
    }
    if ring.len() != next.len() || ring.len() < 3 {
        return Err(MeshError::OpenRing(node));
    }
    Ok(ring)
}

/// Extracts the star polygon of a free node by scanning all triangles.
///
/// Use [`Topology`] when extracting many stars from the same mesh.
pub fn star_polygon(mesh: &Mesh, node: usize) -> Result<StarPolygon> {
    if node >= mesh.nodes.len() {
        return Err(MeshError::InvalidMesh(format!("node {node} out of range")));
    }
    if mesh.fixed[node] {
        return Err(MeshError::BoundaryNode(node));
    }
    let ring = ordered_ring(node, mesh.triangles.iter().copied().filter(|t| t.contains(&node)))?;
    Ok(StarPolygon {
        center: mesh.nodes[node],
        ring: ring.into_iter().map(|i| mesh.nodes[i]).collect(),
    })
}

/// Precomputed one-rings (as node indices) of every free node.
#[derive(Debug, Clone)]
pub struct Topology {
    rings: Vec<Option<Vec<usize>>>,
}

impl Topology {
    /// Fails with [`MeshError::OpenRing`] if any free node's ring is not closed.
    pub fn build(mesh: &Mesh) -> Result<Self> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.nodes.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        let mut rings = Vec::with_capacity(mesh.nodes.len());
        for (node, tris) in incident.iter().enumerate() {
            if mesh.fixed[node] {
                rings.push(None);
                continue;
            }
            let ring = ordered_ring(node, tris.iter().map(|&t| mesh.triangles[t]))?;
            rings.push(Some(ring));
        }
        Ok(Topology { rings })
    }

    /// Ring indices of a free node, `None` for fixed nodes.
    pub fn ring(&self, node: usize) -> Option<&[usize]> {
        self.rings.get(node)?.as_deref()
    }

    pub fn free_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.rings
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|_| i))
    }

    pub fn star(&self, mesh: &Mesh, node: usize) -> Result<StarPolygon> {
        let ring = self.ring(node).ok_or(MeshError::BoundaryNode(node))?;
        Ok(StarPolygon {
            center: mesh.nodes[node],
            ring: ring.iter().map(|&i| mesh.nodes[i]).collect(),
        })
    }

    /// Fills `star` in place, reusing its ring allocation.
    pub fn star_into(&self, mesh: &Mesh, node: usize, star: &mut StarPolygon) -> Result<()> {
        let ring = self.ring(node).ok_or(MeshError::BoundaryNode(node))?;
        star.center = mesh.nodes[node];
        star.ring.clear();
        star.ring.extend(ring.iter().map(|&i| mesh.nodes[i]));
        Ok(())
    }
}
