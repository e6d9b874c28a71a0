//! SVG rendering of a mesh coloured by element quality.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{MeshError, Result};
use crate::geometry::triangle_quality;
use crate::mesh::Mesh;

/// Fill for `f = 0`.
pub const BEST_COLOR: [u8; 3] = [0, 0, 255];
/// Fill for `f = 1`.
pub const WORST_COLOR: [u8; 3] = [255, 255, 0];
/// Edge width relative to the larger bounding-box side.
pub const EDGE_WIDTH_REL: f64 = 0.002;

/// Linear RGB interpolation between [`BEST_COLOR`] and [`WORST_COLOR`].
pub fn quality_color(f: f64) -> [u8; 3] {
    let f = if f.is_finite() { f.clamp(0.0, 1.0) } else { 1.0 };
    let mut rgb = [0u8; 3];
    for k in 0..3 {
        let a = BEST_COLOR[k] as f64;
        let b = WORST_COLOR[k] as f64;
        rgb[k] = (a + (b - a) * f).round() as u8;
    }
    rgb
}

pub fn render_svg_string(mesh: &Mesh) -> Result<String> {
    let bbox = mesh.bbox().ok_or(MeshError::EmptyMesh)?;
    if mesh.triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let extent = bbox.extent();
    let stroke = EDGE_WIDTH_REL * extent;
    let pad = stroke;
    let (w, h) = (bbox.width() + 2.0 * pad, bbox.height() + 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.6} {h:.6}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="{stroke:.6}" stroke-linejoin="round">"#
    );
    for t in 0..mesh.triangles.len() {
        let pts = mesh.triangle_points(t);
        let q = triangle_quality(pts[0], pts[1], pts[2]);
        let [r, g, b] = quality_color(q.transformed);
        svg.push_str(r#"<polygon points=""#);
        for (i, p) in pts.iter().enumerate() {
            // SVG y grows downward
            let x = p.x - bbox.min.x + pad;
            let y = bbox.max.y - p.y + pad;
            let sep = if i == 0 { "" } else { " " };
            let _ = write!(svg, "{sep}{x:.6},{y:.6}");
        }
        let _ = writeln!(svg, r#"" fill="rgb({r},{g},{b})"/>"#);
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

pub fn render_svg(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg_string(mesh)?;
    std::fs::write(path, svg).map_err(|e| MeshError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::random_square_mesh;
    use crate::geometry::Point2;

    fn equilateral_pair() -> Mesh {
        let h = 3f64.sqrt() / 2.0;
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, h),
            Point2::new(1.5, h),
        ];
        Mesh::new(nodes, vec![[0, 1, 2], [1, 3, 2]], vec![true; 4]).unwrap()
    }

    #[test]
    fn endpoint_colors() {
        assert_eq!(quality_color(0.0), BEST_COLOR);
        assert_eq!(quality_color(1.0), WORST_COLOR);
        assert_eq!(quality_color(0.5), [128, 128, 128]);
        assert_eq!(quality_color(f64::NAN), WORST_COLOR);
    }

    #[test]
    fn equilateral_mesh_is_all_blue() {
        let svg = render_svg_string(&equilateral_pair()).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches(r#"fill="rgb(0,0,255)""#).count(), 2);
    }

    #[test]
    fn degenerate_element_is_yellow() {
        let mut mesh = equilateral_pair();
        mesh.nodes[3] = (mesh.nodes[1] + mesh.nodes[2]) * 0.5;
        let svg = render_svg_string(&mesh).unwrap();
        assert_eq!(svg.matches(r#"fill="rgb(255,255,0)""#).count(), 1);
    }

    #[test]
    fn y_axis_is_flipped_and_stroke_scaled() {
        let svg = render_svg_string(&equilateral_pair()).unwrap();
        // extent 1.5 → stroke 0.003; apex (0.5, h) maps to y = pad
        assert!(svg.contains(r#"stroke-width="0.003000""#));
        assert!(svg.contains("0.503000,0.003000"));
    }

    #[test]
    fn byte_identical_output() {
        let mesh = random_square_mesh(120, 3.0, 4).unwrap();
        let a = render_svg_string(&mesh).unwrap();
        let b = render_svg_string(&mesh).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let (p, q) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        render_svg(&mesh, &p).unwrap();
        render_svg(&mesh, &q).unwrap();
        assert_eq!(std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
    }
}
