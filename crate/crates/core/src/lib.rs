//! Mesh smoothing for 2D triangle meshes: classical node-relocation
//! smoothers, a graph-network smoother trained without labels, and the
//! mesh I/O, generation and quality tooling around them.

pub mod autodiff;
pub mod cli;
pub mod dataset;
pub mod delaunay;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod io;
pub mod loss;
pub mod mesh;
pub mod model;
pub mod quality;
pub mod render;
pub mod smoothers;
pub mod training;
pub mod truncation;

pub use error::{MeshError, Result};
pub use geometry::{Point2, TriangleQuality};
pub use mesh::{Mesh, StarPolygon};
pub use quality::{quality_report, weighted_quality, QualityReport};
