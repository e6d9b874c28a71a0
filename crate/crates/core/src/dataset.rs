//! Random square-domain meshes and train/validation/test datasets.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delaunay::delaunay_triangulate;
use crate::error::{MeshError, Result};
use crate::geometry::Point2;
use crate::io::{read_m2d, write_m2d};
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub mesh_count: usize,
    /// Relative sizes of the train, validation and test splits.
    pub split: [u32; 3],
    /// Inclusive node count range per mesh.
    pub node_count_range: (usize, usize),
    /// Inclusive range of the square's side length.
    pub domain_size_range: (f64, f64),
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            mesh_count: 20,
            split: [6, 2, 2],
            node_count_range: (200, 800),
            domain_size_range: (1.0, 10.0),
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MeshError::InvalidConfig(msg.to_string()));
        if self.mesh_count == 0 {
            return bad("mesh_count must be positive");
        }
        if self.split.iter().all(|&s| s == 0) {
            return bad("split ratios must not all be zero");
        }
        let (lo, hi) = self.node_count_range;
        if lo < 4 || hi < lo {
            return bad("node_count_range must satisfy 4 <= min <= max");
        }
        let (lo, hi) = self.domain_size_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad("domain_size_range must satisfy 0 < min <= max");
        }
        Ok(())
    }

    /// Split sizes by largest-remainder rounding; ties go to the earlier split.
    pub fn split_counts(&self) -> [usize; 3] {
        largest_remainder(self.mesh_count, self.split)
    }
}

fn largest_remainder(total: usize, ratios: [u32; 3]) -> [usize; 3] {
    let sum: u64 = ratios.iter().map(|&r| r as u64).sum();
    let mut counts = [0usize; 3];
    let mut remainders = [(0u64, 0usize); 3];
    for k in 0..3 {
        let exact = total as u64 * ratios[k] as u64;
        counts[k] = (exact / sum) as usize;
        remainders[k] = (exact % sum, k);
    }
    let assigned: usize = counts.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in remainders.iter().take(total - assigned) {
        counts[k] += 1;
    }
    counts
}

/// A square mesh: `4·⌈√node_count⌉` evenly spaced fixed boundary nodes, the
/// remaining nodes uniform in the open square, then Delaunay triangulated.
pub fn random_square_mesh(node_count: usize, side: f64, seed: u64) -> Result<Mesh> {
    if node_count < 4 {
        return Err(MeshError::InvalidConfig(format!(
            "node_count must be at least 4, got {node_count}"
        )));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(MeshError::InvalidConfig(format!("invalid side length {side}")));
    }
    let per_side = (node_count as f64).sqrt().ceil() as usize;
    let h = side / per_side as f64;
    let mut points = Vec::with_capacity(node_count.max(4 * per_side));
    for i in 0..per_side {
        let t = i as f64 * h;
        points.push(Point2::new(t, 0.0));
    }
    for i in 0..per_side {
        points.push(Point2::new(side, i as f64 * h));
    }
    for i in 0..per_side {
        points.push(Point2::new(side - i as f64 * h, side));
    }
    for i in 0..per_side {
        points.push(Point2::new(0.0, side - i as f64 * h));
    }
    let interior = node_count.saturating_sub(points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep interior points a hair away from the sides
    let margin = side * 1e-9;
    for _ in 0..interior {
        let x = rng.gen_range(margin..side - margin);
        let y = rng.gen_range(margin..side - margin);
        points.push(Point2::new(x, y));
    }
    let mut mesh = delaunay_triangulate(&points)?;
    mesh.fix_boundary();
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// Parameters a dataset mesh was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshRecipe {
    pub index: usize,
    pub split: Split,
    pub node_count: usize,
    pub side: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<Mesh>,
    pub validation: Vec<Mesh>,
    pub test: Vec<Mesh>,
    pub recipes: Vec<MeshRecipe>,
}

/// Per-mesh generation parameters, drawn from an RNG stream keyed by
/// `(spec.seed, index)`.
pub fn dataset_recipes(spec: &DatasetSpec) -> Result<Vec<MeshRecipe>> {
    spec.validate()?;
    let [n_train, n_val, _] = spec.split_counts();
    Ok((0..spec.mesh_count)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(index as u64);
            let (lo, hi) = spec.node_count_range;
            let node_count = rng.gen_range(lo..=hi);
            let (slo, shi) = spec.domain_size_range;
            let side = if shi > slo { rng.gen_range(slo..=shi) } else { slo };
            let seed = rng.gen();
            let split = if index < n_train {
                Split::Train
            } else if index < n_train + n_val {
                Split::Validation
            } else {
                Split::Test
            };
            MeshRecipe {
                index,
                split,
                node_count,
                side,
                seed,
            }
        })
        .collect())
}

pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let recipes = dataset_recipes(spec)?;
    let mut dataset = Dataset {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        recipes: recipes.clone(),
    };
    for r in &recipes {
        let mesh = random_square_mesh(r.node_count, r.side, r.seed)?;
        match r.split {
            Split::Train => dataset.train.push(mesh),
            Split::Validation => dataset.validation.push(mesh),
            Split::Test => dataset.test.push(mesh),
        }
    }
    Ok(dataset)
}

pub const MANIFEST_FILE: &str = "dataset.json";
pub const MANIFEST_FORMAT: &str = "meshsmith-dataset-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Mesh file name relative to the manifest.
    pub file: String,
    #[serde(flatten)]
    pub recipe: MeshRecipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub spec: DatasetSpec,
    pub meshes: Vec<ManifestEntry>,
}

/// Generates the dataset into `dir` as `<split>_<nnn>.m2d` files plus
/// [`MANIFEST_FILE`].
pub fn write_dataset(spec: &DatasetSpec, dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| MeshError::io(dir, e))?;
    let mut counters = [0usize; 3];
    let mut meshes = Vec::new();
    for recipe in dataset_recipes(spec)? {
        let k = recipe.split as usize;
        let file = format!("{}_{:03}.m2d", recipe.split.as_str(), counters[k]);
        counters[k] += 1;
        let mesh = random_square_mesh(recipe.node_count, recipe.side, recipe.seed)?;
        write_m2d(&mesh, dir.join(&file))?;
        meshes.push(ManifestEntry { file, recipe });
    }
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.to_string(),
        spec: spec.clone(),
        meshes,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| MeshError::io(&path, e))?;
    Ok(manifest)
}

/// Loads the meshes listed in a manifest written by [`write_dataset`].
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset> {
    let path = manifest_path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| MeshError::InvalidConfig(format!("{}: {e}", path.display())))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(MeshError::InvalidConfig(format!(
            "{}: unknown manifest format `{}`",
            path.display(),
            manifest.format
        )));
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut dataset = Dataset {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        recipes: Vec::new(),
    };
    for entry in manifest.meshes {
        let mesh = read_m2d(dir.join(&entry.file))?;
        match entry.recipe.split {
            Split::Train => dataset.train.push(mesh),
            Split::Validation => dataset.validation.push(mesh),
            Split::Test => dataset.test.push(mesh),
        }
        dataset.recipes.push(entry.recipe);
    }
    Ok(dataset)
}
