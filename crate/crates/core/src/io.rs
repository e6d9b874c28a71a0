//! The `.m2d` text mesh format.
//!
//! ```text
//! nodes N
//! x y F        (N lines, F = 0 free / 1 fixed)
//! triangles M
//! i j k        (M lines, 0-based, counter-clockwise)
//! ```
//!
//! Coordinates are written with 17 significant digits so that a
//! write/read cycle reproduces every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{MeshError, Result};
use crate::geometry::{signed_area, Point2};
use crate::mesh::Mesh;

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let last = self.last;
        self.next_tokens()
            .ok_or_else(|| parse_err(last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_header(lines: &mut Lines<'_>, keyword: &str) -> Result<usize> {
    let (line, tokens) = lines.expect_tokens(keyword)?;
    match tokens.as_slice() {
        [k, n] if *k == keyword => n
            .parse()
            .map_err(|_| parse_err(line, format!("invalid {keyword} count `{n}`"))),
        _ => Err(parse_err(line, format!("expected `{keyword} <count>`"))),
    }
}

pub fn parse_m2d(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let node_count = parse_header(&mut lines, "nodes")?;
    let mut nodes = Vec::with_capacity(node_count);
    let mut fixed = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let (line, tokens) = lines.expect_tokens("a node line")?;
        let [x, y, f] = tokens.as_slice() else {
            return Err(parse_err(line, "expected `x y F`"));
        };
        let x: f64 = x
            .parse()
            .map_err(|_| parse_err(line, format!("invalid coordinate `{x}`")))?;
        let y: f64 = y
            .parse()
            .map_err(|_| parse_err(line, format!("invalid coordinate `{y}`")))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(line, "non-finite coordinate"));
        }
        let flag = match *f {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(
                    line,
                    format!("fixed flag must be 0 or 1, got `{other}`"),
                ))
            }
        };
        nodes.push(Point2::new(x, y));
        fixed.push(flag);
    }
    let tri_count = parse_header(&mut lines, "triangles")?;
    let mut triangles = Vec::with_capacity(tri_count);
    for _ in 0..tri_count {
        let (line, tokens) = lines.expect_tokens("a triangle line")?;
        if tokens.len() != 3 {
            return Err(parse_err(line, "expected `i j k`"));
        }
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(&tokens) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(line, format!("invalid node index `{tok}`")))?;
            if *slot >= node_count {
                return Err(parse_err(
                    line,
                    format!("node index {slot} out of range (0..{node_count})"),
                ));
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(parse_err(line, "triangle repeats a node"));
        }
        if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) <= 0.0 {
            return Err(parse_err(line, "triangle is clockwise or degenerate"));
        }
        triangles.push(tri);
    }
    if let Some((line, _)) = lines.next_tokens() {
        return Err(parse_err(line, "trailing content after triangles"));
    }
    let mut mesh = Mesh::new(nodes, triangles, fixed)?;
    mesh.fix_boundary();
    Ok(mesh)
}

pub fn to_m2d_string(mesh: &Mesh) -> String {
    let mut out = String::with_capacity(48 * mesh.nodes.len() + 24 * mesh.triangles.len() + 32);
    writeln!(out, "nodes {}", mesh.nodes.len()).unwrap();
    for (p, &f) in mesh.nodes.iter().zip(&mesh.fixed) {
        writeln!(out, "{:.16e} {:.16e} {}", p.x, p.y, u8::from(f)).unwrap();
    }
    writeln!(out, "triangles {}", mesh.triangles.len()).unwrap();
    for [i, j, k] in &mesh.triangles {
        writeln!(out, "{i} {j} {k}").unwrap();
    }
    out
}

pub fn read_m2d(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
    parse_m2d(&text)
}

pub fn write_m2d(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_m2d_string(mesh)).map_err(|e| MeshError::io(path, e))
}
