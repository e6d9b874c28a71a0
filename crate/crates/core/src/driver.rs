//! Sequential smoothing sweeps and the best-of-runs experiment protocol.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::mesh::{Mesh, StarPolygon, Topology};
use crate::model::{forward, load_checkpoint, ModelParams};
use crate::quality::{quality_report, QualityReport};
use crate::smoothers::{
    angle_based_step, cvt_step, laplacian_step, optimization_step, smart_laplacian_step, OptimConfig,
};
use crate::training::{load_nn_checkpoint, NnSmoother};
use crate::truncation::truncate_shift_with_eps;

pub const DEFAULT_MAX_SWEEPS: usize = 100;
pub const DEFAULT_RUNS: usize = 10;
/// Truncation threshold as a multiple of the mesh's degenerate-area
/// threshold, so rounding differences between the star's and the mesh's
/// area evaluation never let a committed element land at or below it.
pub const TRUNCATION_MARGIN: f64 = 2.0;

/// Sweeps stop once no node moved farther than this fraction of the mesh
/// bounding-box extent.
pub const EARLY_STOP_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmootherKind {
    Laplacian,
    SmartLaplacian,
    Angle,
    Cvt,
    Optim,
    Nn,
    Gmsnet,
}

impl SmootherKind {
    pub const ALL: [SmootherKind; 7] = [
        SmootherKind::Laplacian,
        SmootherKind::SmartLaplacian,
        SmootherKind::Angle,
        SmootherKind::Cvt,
        SmootherKind::Optim,
        SmootherKind::Nn,
        SmootherKind::Gmsnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmootherKind::Laplacian => "laplacian",
            SmootherKind::SmartLaplacian => "smart-laplacian",
            SmootherKind::Angle => "angle",
            SmootherKind::Cvt => "cvt",
            SmootherKind::Optim => "optim",
            SmootherKind::Nn => "nn",
            SmootherKind::Gmsnet => "gmsnet",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, SmootherKind::Nn | SmootherKind::Gmsnet)
    }
}

impl FromStr for SmootherKind {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self> {
        SmootherKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MeshError::UnknownSmoother(s.to_string()))
    }
}

impl fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Smoother {
    Laplacian,
    SmartLaplacian,
    Angle,
    Cvt,
    Optim(OptimConfig),
    Nn(NnSmoother),
    Gmsnet(ModelParams),
}

impl Smoother {
    /// Builds a smoother by name, loading its checkpoint when it needs one.
    pub fn from_name(name: &str, model: Option<&Path>) -> Result<Self> {
        let kind: SmootherKind = name.parse()?;
        match (kind, model) {
            (SmootherKind::Laplacian, _) => Ok(Smoother::Laplacian),
            (SmootherKind::SmartLaplacian, _) => Ok(Smoother::SmartLaplacian),
            (SmootherKind::Angle, _) => Ok(Smoother::Angle),
            (SmootherKind::Cvt, _) => Ok(Smoother::Cvt),
            (SmootherKind::Optim, _) => Ok(Smoother::Optim(OptimConfig::default())),
            (SmootherKind::Nn, Some(path)) => Ok(Smoother::Nn(load_nn_checkpoint(path)?)),
            (SmootherKind::Gmsnet, Some(path)) => Ok(Smoother::Gmsnet(load_checkpoint(path)?)),
            (kind, None) => Err(MeshError::MissingModel(kind.name().to_string())),
        }
    }

    pub fn kind(&self) -> SmootherKind {
        match self {
            Smoother::Laplacian => SmootherKind::Laplacian,
            Smoother::SmartLaplacian => SmootherKind::SmartLaplacian,
            Smoother::Angle => SmootherKind::Angle,
            Smoother::Cvt => SmootherKind::Cvt,
            Smoother::Optim(_) => SmootherKind::Optim,
            Smoother::Nn(_) => SmootherKind::Nn,
            Smoother::Gmsnet(_) => SmootherKind::Gmsnet,
        }
    }

    /// All provided smoothers are deterministic functions of the star.
    pub fn is_stochastic(&self) -> bool {
        false
    }

    /// Proposed position for the star's free node. Smoothers that cannot
    /// handle the star propose the current position.
    pub fn propose(&self, star: &StarPolygon) -> Point2 {
        let proposal = match self {
            Smoother::Laplacian => Ok(laplacian_step(star)),
            Smoother::SmartLaplacian => Ok(smart_laplacian_step(star)),
            Smoother::Angle => angle_based_step(star),
            Smoother::Cvt => cvt_step(star),
            Smoother::Optim(config) => Ok(optimization_step(star, config)),
            Smoother::Nn(nn) => Ok(nn.step(star)),
            Smoother::Gmsnet(params) => forward(params, star),
        };
        match proposal {
            Ok(p) if p.is_finite() => p,
            _ => star.center,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothRunResult {
    pub mesh: Mesh,
    pub sweeps: usize,
    /// Quality after each sweep.
    pub trace: Vec<QualityReport>,
    pub node_updates: usize,
    pub update_time: Duration,
    /// Updates whose proposal was shortened or discarded.
    pub truncations: usize,
    /// Non-positive elements in the mesh after each sweep.
    pub negative_elements: Vec<usize>,
}

impl SmoothRunResult {
    pub fn seconds_per_node(&self) -> f64 {
        if self.node_updates == 0 {
            0.0
        } else {
            self.update_time.as_secs_f64() / self.node_updates as f64
        }
    }

    pub fn final_report(&self) -> Option<&QualityReport> {
        self.trace.last()
    }
}

/// Gauss–Seidel sweeps over the free nodes in ascending index order; each
/// truncated move is written back before the next node is visited.
pub fn smooth_mesh(mesh: &Mesh, smoother: &Smoother, max_sweeps: usize) -> Result<SmoothRunResult> {
    let topo = Topology::build(mesh)?;
    let free: Vec<usize> = topo.free_nodes().collect();
    let mut mesh = mesh.clone();
    let threshold = EARLY_STOP_REL * mesh.bbox().map_or(0.0, |b| b.extent());
    let mesh_eps = TRUNCATION_MARGIN * mesh.area_eps();
    let mut star = StarPolygon::new(Point2::ZERO, Vec::new());
    let mut result = SmoothRunResult {
        mesh: Mesh::new(Vec::new(), Vec::new(), Vec::new())?,
        sweeps: 0,
        trace: Vec::new(),
        node_updates: 0,
        update_time: Duration::ZERO,
        truncations: 0,
        negative_elements: Vec::new(),
    };
    for _ in 0..max_sweeps {
        let mut max_move = 0.0f64;
        let start = Instant::now();
        for &node in &free {
            topo.star_into(&mesh, node, &mut star)?;
            let proposal = smoother.propose(&star);
            let eps = mesh_eps.max(star.area_eps());
            let t = truncate_shift_with_eps(&star, proposal - star.center, eps);
            mesh.nodes[node] += t.delta;
            max_move = max_move.max(t.delta.norm());
            result.truncations += usize::from(t.was_truncated());
        }
        result.update_time += start.elapsed();
        result.node_updates += free.len();
        result.sweeps += 1;
        result.trace.push(quality_report(&mesh)?);
        result.negative_elements.push(mesh.negative_element_count());
        if max_move < threshold {
            break;
        }
    }
    result.mesh = mesh;
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub best: SmoothRunResult,
    /// Zero-based index of the winning run.
    pub best_run: usize,
    pub runs_executed: usize,
    pub initial: QualityReport,
}

impl ExperimentResult {
    pub fn summary(&self) -> &QualityReport {
        self.best.final_report().unwrap_or(&self.initial)
    }
}

/// Index of the highest weighted quality; ties keep the earliest.
pub fn rank_by_weighted_quality(reports: &[QualityReport]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reports.iter().enumerate() {
        let q = r.weighted_quality();
        if best.is_none_or(|(_, b)| q > b) {
            best = Some((i, q));
        }
    }
    best.map(|(i, _)| i)
}

/// Runs the smoother up to `runs` times and keeps the run whose final mesh
/// has the best weighted quality. Deterministic smoothers run once.
pub fn run_experiment(
    mesh: &Mesh,
    smoother: &Smoother,
    runs: usize,
    max_sweeps: usize,
) -> Result<ExperimentResult> {
    let initial = quality_report(mesh)?;
    let runs = if smoother.is_stochastic() { runs.max(1) } else { 1 };
    let mut results = Vec::with_capacity(runs);
    for _ in 0..runs {
        results.push(smooth_mesh(mesh, smoother, max_sweeps)?);
    }
    let reports: Vec<QualityReport> = results
        .iter()
        .map(|r| r.final_report().cloned().unwrap_or_else(|| initial.clone()))
        .collect();
    let best_run = rank_by_weighted_quality(&reports).expect("at least one run");
    Ok(ExperimentResult {
        best: results.swap_remove(best_run),
        best_run,
        runs_executed: runs,
        initial,
    })
}
