//! The `meshsmith` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dataset::{load_dataset, write_dataset, DatasetSpec, MANIFEST_FILE};
use crate::driver::{run_experiment, smooth_mesh, Smoother, DEFAULT_MAX_SWEEPS, DEFAULT_RUNS};
use crate::error::MeshError;
use crate::io::{read_m2d, write_m2d};
use crate::loss::LossKind;
use crate::model::save_checkpoint;
use crate::quality::{quality_report, QualityReport, HISTOGRAM_BINS};
use crate::render::render_svg;
use crate::smoothers::OptimConfig;
use crate::training::{
    nn_generate_labels, save_nn_checkpoint, train_gmsnet, train_nn_smoothing, NnConfig, TrainConfig,
};

/// Overrides the default seed of `generate` and `train`.
pub const SEED_ENV: &str = "MESHSMITH_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const BENCH_CSV_HEADER: &str =
    "mesh,algo,min_angle_min,min_angle_mean,max_angle_max,max_angle_mean,inv_ar_min,inv_ar_mean,s_per_node,weighted_quality";

#[derive(Debug, Parser)]
#[command(name = "meshsmith", version, about = "2D triangle mesh smoothing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Arch {
    Gmsnet,
    Nn,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random square meshes and a dataset.json manifest.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        min_nodes: usize,
        #[arg(long, default_value_t = 800)]
        max_nodes: usize,
        #[arg(long, default_value_t = 1.0)]
        min_side: f64,
        #[arg(long, default_value_t = 10.0)]
        max_side: f64,
        /// Train, validation and test ratios.
        #[arg(long, value_delimiter = ',', default_values_t = [6, 2, 2])]
        split: Vec<u32>,
    },
    /// Train a learned smoother on a generated dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Arch::Gmsnet)]
        arch: Arch,
        #[arg(long, default_value = "metric", value_parser = ["metric", "minmax", "ar", "cos"])]
        loss: String,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch CSV; defaults to the checkpoint path with a `.trace.csv` extension.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Smooth one mesh and write the result.
    Smooth {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        algo: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        sweeps: usize,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Benchmark a smoother and print a quality table and CSV.
    Bench {
        #[arg(long, required = true, num_args = 1..)]
        mesh: Vec<PathBuf>,
        #[arg(long)]
        algo: String,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        sweeps: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also list the unsmoothed mesh as algo `origin`.
        #[arg(long)]
        origin: bool,
    },
    /// Render a mesh to SVG coloured by element quality.
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the element quality histogram as CSV.
    Report {
        #[arg(long)]
        mesh: PathBuf,
        /// Print the summary row in the bench CSV schema instead.
        #[arg(long)]
        summary: bool,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::MissingModel(_) => CliError::Usage(format!("{e}; pass --model <checkpoint>")),
            MeshError::UnknownSmoother(_) | MeshError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult = std::result::Result<(), CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn default_seed(flag: Option<u64>) -> std::result::Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Generate {
            out: dir,
            count,
            seed,
            min_nodes,
            max_nodes,
            min_side,
            max_side,
            split,
        } => {
            if split.len() != 3 {
                return Err(CliError::Usage(
                    "--split takes three comma-separated ratios".into(),
                ));
            }
            let spec = DatasetSpec {
                mesh_count: count,
                split: [split[0], split[1], split[2]],
                node_count_range: (min_nodes, max_nodes),
                domain_size_range: (min_side, max_side),
                seed: default_seed(seed)?,
            };
            let manifest = write_dataset(&spec, &dir)?;
            writeln!(
                out,
                "wrote {} meshes and {}",
                manifest.meshes.len(),
                dir.join(MANIFEST_FILE).display()
            )?;
        }
        Command::Train {
            dataset,
            arch,
            loss,
            epochs,
            hidden,
            seed,
            out: path,
            trace,
        } => {
            let data = load_dataset(&dataset)?;
            let seed = default_seed(seed)?;
            match arch {
                Arch::Gmsnet => {
                    let defaults = TrainConfig::default();
                    let config = TrainConfig {
                        epochs: epochs.unwrap_or(defaults.epochs),
                        hidden: hidden.unwrap_or(defaults.hidden),
                        loss: loss.parse::<LossKind>()?,
                        seed,
                        ..defaults
                    };
                    let (params, history) = train_gmsnet(&data.train, &data.validation, &config)?;
                    save_checkpoint(&params, &path)?;
                    let trace_path = trace.unwrap_or_else(|| path.with_extension("trace.csv"));
                    std::fs::write(&trace_path, history.to_csv())
                        .map_err(|e| MeshError::io(&trace_path, e))?;
                    writeln!(
                        out,
                        "best validation loss {:.6e} after {} epochs; wrote {} and {}",
                        history.best_val_loss().unwrap_or(f64::NAN),
                        history.len(),
                        path.display(),
                        trace_path.display()
                    )?;
                }
                Arch::Nn => {
                    let defaults = NnConfig::default();
                    let config = NnConfig {
                        epochs: epochs.unwrap_or(defaults.epochs),
                        hidden: hidden.unwrap_or(defaults.hidden),
                        seed,
                        ..defaults
                    };
                    let labels = nn_generate_labels(&data.train, &OptimConfig::default())?;
                    let model = train_nn_smoothing(&labels, &config)?;
                    save_nn_checkpoint(&model, &path)?;
                    let mse = if data.validation.is_empty() {
                        f64::NAN
                    } else {
                        model.mse(&nn_generate_labels(&data.validation, &OptimConfig::default())?)
                    };
                    writeln!(
                        out,
                        "trained on {} labelled stars; validation mse {mse:.6e}; wrote {}",
                        labels.len(),
                        path.display()
                    )?;
                }
            }
        }
        Command::Smooth {
            mesh,
            algo,
            out: path,
            sweeps,
            model,
        } => {
            let smoother = Smoother::from_name(&algo, model.as_deref())?;
            let input = read_m2d(&mesh)?;
            let result = smooth_mesh(&input, &smoother, sweeps)?;
            write_m2d(&result.mesh, &path)?;
            let q = result
                .final_report()
                .map_or(f64::NAN, QualityReport::weighted_quality);
            writeln!(
                out,
                "{} sweeps, {} truncations, weighted quality {:.6} -> {:.6}",
                result.sweeps,
                result.truncations,
                quality_report(&input)?.weighted_quality(),
                q
            )?;
        }
        Command::Bench {
            mesh,
            algo,
            runs,
            sweeps,
            model,
            origin,
        } => {
            let smoother = Smoother::from_name(&algo, model.as_deref())?;
            let mut rows = Vec::new();
            for path in &mesh {
                let input = read_m2d(path)?;
                let experiment = run_experiment(&input, &smoother, runs, sweeps)?;
                let name = mesh_label(path);
                if origin {
                    rows.push(BenchRow::new(&name, "origin", &experiment.initial, 0.0));
                }
                rows.push(BenchRow::new(
                    &name,
                    smoother.kind().name(),
                    experiment.summary(),
                    experiment.best.seconds_per_node(),
                ));
            }
            out.write_all(bench_table(&rows).as_bytes())?;
            writeln!(out)?;
            out.write_all(bench_csv(&rows).as_bytes())?;
        }
        Command::Render { mesh, out: path } => {
            render_svg(&read_m2d(&mesh)?, &path)?;
        }
        Command::Report { mesh, summary } => {
            let report = quality_report(&read_m2d(&mesh)?)?;
            if summary {
                let row = BenchRow::new(&mesh_label(&mesh), "origin", &report, 0.0);
                out.write_all(bench_csv(&[row]).as_bytes())?;
            } else {
                out.write_all(histogram_csv(&report).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn mesh_label(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub mesh: String,
    pub algo: String,
    pub min_angle_min: f64,
    pub min_angle_mean: f64,
    pub max_angle_max: f64,
    pub max_angle_mean: f64,
    pub inv_ar_min: f64,
    pub inv_ar_mean: f64,
    pub s_per_node: f64,
    pub weighted_quality: f64,
}

impl BenchRow {
    pub fn new(mesh: &str, algo: &str, r: &QualityReport, s_per_node: f64) -> Self {
        BenchRow {
            mesh: mesh.to_string(),
            algo: algo.to_string(),
            min_angle_min: r.min_angle_min,
            min_angle_mean: r.min_angle_mean,
            max_angle_max: r.max_angle_max,
            max_angle_mean: r.max_angle_mean,
            inv_ar_min: r.inv_ar_min,
            inv_ar_mean: r.inv_ar_mean,
            s_per_node,
            weighted_quality: r.weighted_quality(),
        }
    }

    /// Parses one data line of [`bench_csv`] output.
    pub fn parse_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 10 {
            return None;
        }
        let num = |i: usize| f[i].parse::<f64>().ok();
        Some(BenchRow {
            mesh: f[0].to_string(),
            algo: f[1].to_string(),
            min_angle_min: num(2)?,
            min_angle_mean: num(3)?,
            max_angle_max: num(4)?,
            max_angle_mean: num(5)?,
            inv_ar_min: num(6)?,
            inv_ar_mean: num(7)?,
            s_per_node: num(8)?,
            weighted_quality: num(9)?,
        })
    }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BENCH_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6e},{:.6}",
            r.mesh,
            r.algo,
            r.min_angle_min,
            r.min_angle_mean,
            r.max_angle_max,
            r.max_angle_mean,
            r.inv_ar_min,
            r.inv_ar_mean,
            r.s_per_node,
            r.weighted_quality
        );
    }
    s
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mesh_w = rows.iter().map(|r| r.mesh.len()).max().unwrap_or(0).max(4);
    let algo_w = rows.iter().map(|r| r.algo.len()).max().unwrap_or(0).max(4);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<mesh_w$}  {:<algo_w$}  {:>9} {:>9}  {:>9} {:>9}  {:>7} {:>7}  {:>10}  {:>7}",
        "mesh",
        "algo",
        "minA min",
        "minA mean",
        "maxA max",
        "maxA mean",
        "1/q min",
        "1/q mean",
        "s/node",
        "q_w"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<mesh_w$}  {:<algo_w$}  {:>9.2} {:>9.2}  {:>9.2} {:>9.2}  {:>7.4} {:>7.4}  {:>10.3e}  {:>7.4}",
            r.mesh,
            r.algo,
            r.min_angle_min,
            r.min_angle_mean,
            r.max_angle_max,
            r.max_angle_mean,
            r.inv_ar_min,
            r.inv_ar_mean,
            r.s_per_node,
            r.weighted_quality
        );
    }
    s
}

/// `bin,f_lo,f_hi,count` over the transformed metric.
pub fn histogram_csv(report: &QualityReport) -> String {
    let mut s = String::from("bin,f_lo,f_hi,count\n");
    let width = 1.0 / HISTOGRAM_BINS as f64;
    for (i, count) in report.histogram.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{:.2},{:.2},{count}",
            i as f64 * width,
            (i + 1) as f64 * width
        );
    }
    s
}
