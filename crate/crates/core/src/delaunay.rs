//! Incremental Bowyer–Watson Delaunay triangulation.
//!
//! The convex hull is closed off with "ghost" triangles that share a single
//! vertex at infinity instead of an explicit finite super-triangle. A point
//! conflicts with the ghost triangle behind hull edge `u → v` when it lies
//! strictly outside that edge (or on the edge's open segment), which is the
//! limit of the circumcircle test as the third vertex moves to infinity.

use std::collections::{HashMap, HashSet};

use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::Mesh;

/// Points closer than this are treated as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

const GHOST: usize = usize::MAX;

#[inline]
fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `abc`.
#[inline]
fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

struct Triangulation<'a> {
    pts: &'a [Point2],
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    /// Directed edge `a → b` to the triangle that contains it.
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Triangulation<'a> {
    fn new(pts: &'a [Point2]) -> Self {
        Triangulation {
            pts,
            tris: Vec::with_capacity(2 * pts.len() + 8),
            alive: Vec::with_capacity(2 * pts.len() + 8),
            edges: HashMap::with_capacity(6 * pts.len() + 16),
        }
    }

    /// Adds a triangle, rotating ghost triangles so the ghost vertex is last.
    fn add(&mut self, mut tri: [usize; 3]) {
        while tri.contains(&GHOST) && tri[2] != GHOST {
            tri.rotate_left(1);
        }
        let id = self.tris.len();
        for k in 0..3 {
            self.edges.insert((tri[k], tri[(k + 1) % 3]), id);
        }
        self.tris.push(tri);
        self.alive.push(true);
    }

    fn remove(&mut self, id: usize) {
        self.alive[id] = false;
        let tri = self.tris[id];
        for k in 0..3 {
            let key = (tri[k], tri[(k + 1) % 3]);
            if self.edges.get(&key) == Some(&id) {
                self.edges.remove(&key);
            }
        }
    }

    fn conflicts(&self, id: usize, p: Point2) -> bool {
        let [a, b, c] = self.tris[id];
        if c == GHOST {
            let (u, v) = (self.pts[a], self.pts[b]);
            let o = orient(u, v, p);
            o > 0.0 || (o == 0.0 && (p - u).dot(v - u) > 0.0 && (p - v).dot(u - v) > 0.0)
        } else {
            incircle(self.pts[a], self.pts[b], self.pts[c], p) > 0.0
        }
    }

    fn locate(&self, p: Point2) -> Option<usize> {
        let mut ghost_hit = None;
        for (id, tri) in self.tris.iter().enumerate() {
            if !self.alive[id] {
                continue;
            }
            let [a, b, c] = *tri;
            if c == GHOST {
                if ghost_hit.is_none() && self.conflicts(id, p) {
                    ghost_hit = Some(id);
                }
            } else {
                let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[c]);
                if orient(pa, pb, p) >= 0.0 && orient(pb, pc, p) >= 0.0 && orient(pc, pa, p) >= 0.0 {
                    return Some(id);
                }
            }
        }
        ghost_hit
    }

    fn insert(&mut self, idx: usize) {
        let p = self.pts[idx];
        let Some(start) = self.locate(p) else {
            return;
        };
        let mut cavity = vec![start];
        let mut in_cavity = HashSet::from([start]);
        let mut i = 0;
        while i < cavity.len() {
            let tri = self.tris[cavity[i]];
            i += 1;
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                if let Some(&nb) = self.edges.get(&(v, u)) {
                    if !in_cavity.contains(&nb) && self.conflicts(nb, p) {
                        in_cavity.insert(nb);
                        cavity.push(nb);
                    }
                }
            }
        }
        let mut boundary = Vec::new();
        for &id in &cavity {
            let tri = self.tris[id];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let twin = self.edges.get(&(v, u));
                if twin.is_none_or(|t| !in_cavity.contains(t)) {
                    boundary.push((u, v));
                }
            }
        }
        for &id in &cavity {
            self.remove(id);
        }
        for (u, v) in boundary {
            self.add([u, v, idx]);
        }
    }
}

fn check_duplicates(points: &[Point2]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > DUPLICATE_TOL {
                break;
            }
            if points[i].distance(points[j]) <= DUPLICATE_TOL {
                return Err(MeshError::DuplicatePoints(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Triangulates `points`; convex hull nodes are flagged fixed.
///
/// Points are inserted in input order; for cocircular configurations the
/// first valid triangulation found is kept.
pub fn delaunay_triangulate(points: &[Point2]) -> Result<Mesh> {
    if points.len() < 3 {
        return Err(MeshError::TooFewPoints(points.len()));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(MeshError::InvalidMesh(format!("point {i} is not finite")));
    }
    check_duplicates(points)?;

    let scale = crate::geometry::BBox::from_points(points.iter().copied()).map_or(0.0, |b| b.extent());
    let collinear_tol = 1e-14 * scale * scale;
    let (i0, i1) = (0, 1);
    let i2 = (2..points.len())
        .find(|&k| orient(points[i0], points[i1], points[k]).abs() > collinear_tol)
        .ok_or(MeshError::DegenerateInput)?;

    let mut tri = Triangulation::new(points);
    let first = if orient(points[i0], points[i1], points[i2]) > 0.0 {
        [i0, i1, i2]
    } else {
        [i0, i2, i1]
    };
    tri.add(first);
    for k in 0..3 {
        tri.add([first[(k + 1) % 3], first[k], GHOST]);
    }
    for idx in 0..points.len() {
        if idx != i0 && idx != i1 && idx != i2 {
            tri.insert(idx);
        }
    }

    let mut fixed = vec![false; points.len()];
    let mut triangles = Vec::new();
    for (id, t) in tri.tris.iter().enumerate() {
        if !tri.alive[id] {
            continue;
        }
        if t[2] == GHOST {
            fixed[t[0]] = true;
            fixed[t[1]] = true;
        } else {
            triangles.push(*t);
        }
    }
    Mesh::new(points.to_vec(), triangles, fixed)
}
