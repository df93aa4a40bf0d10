use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hollowfield::fixtures::Fixture;
use hollowfield::optimizer::OptimConfig;
use hollowfield::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hollowfield", version, about = "Optimize solid shapes into lightweight, self-supporting hollow designs")]
pub struct Cli {
    /// Worker thread cap. Results do not depend on it.
    #[arg(long, global = true, env = "HOLLOWFIELD_THREADS")]
    pub threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Voxelize a mesh or fixture into a DFD1 grid.
    Voxelize(VoxelizeArgs),
    /// Optimize the logits of a grid.
    Optimize(OptimizeArgs),
    /// Extract and merge outer and inner shells.
    Hollow(HollowArgs),
    /// Quasi-static stability report for a grid, mesh or fixture.
    Stability(StabilityArgs),
    /// Chamfer distance and F-score between two meshes.
    Metrics(MetricsArgs),
    /// Sweep one hyperparameter and tabulate mass and stability.
    Sweep(SweepArgs),
    /// Voxelize, optimize, hollow and report in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    /// Built-in shape instead of an input file.
    #[arg(long, value_parser = parse_fixture)]
    pub fixture: Option<Fixture>,

    /// Cells per axis.
    #[arg(long, default_value_t = hollowfield::grid::DEFAULT_RESOLUTION)]
    pub resolution: usize,

    /// Use mesh coordinates as given instead of fitting them into the unit cube.
    #[arg(long)]
    pub no_normalize: bool,
}

fn parse_fixture(s: &str) -> std::result::Result<Fixture, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    /// Input mesh (.stl or .obj).
    #[arg(required_unless_present = "fixture")]
    pub mesh: Option<PathBuf>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Basal layer thickness in cells.
    #[arg(long, default_value_t = 2)]
    pub epsilon: usize,
    /// Logit magnitude of saturated cells.
    #[arg(long, default_value_t = hollowfield::field::DEFAULT_THETA_SAT)]
    pub theta_sat: f64,
    /// Zero-area triangles tolerated before rejecting the mesh.
    #[arg(long, default_value_t = 0)]
    pub max_degenerate: usize,
    /// Output grid.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Summary JSON path; printed to stdout either way.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Optimizer settings. Explicit flags override values from `--config`.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// JSON file with optimizer settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight of the mass term.
    #[arg(long)]
    pub lambda_mass: Option<f64>,
    /// Optimization steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Recorded with the run; initialization is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Soft support sharpness k.
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Basal layer thickness in cells, used when building masks.
    #[arg(long)]
    pub epsilon: Option<usize>,
    /// Logit magnitude of saturated cells.
    #[arg(long)]
    pub theta_sat: Option<f64>,
    /// Adam first moment decay.
    #[arg(long)]
    pub beta1: Option<f64>,
    /// Adam second moment decay.
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Adam denominator guard.
    #[arg(long)]
    pub adam_eps: Option<f64>,
    /// Trace every n steps.
    #[arg(long)]
    pub log_interval: Option<usize>,
    /// Disable the local smoothing operator.
    #[arg(long)]
    pub no_smoothing: bool,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<OptimConfig> {
        let mut c: OptimConfig = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => OptimConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag { c.$field = v; }
            )*};
        }
        set!(lambda_mass => lambda_mass, steps => steps, lr => learning_rate, seed => seed,
             sharpness => sharpness, epsilon => epsilon, theta_sat => theta_sat, beta1 => beta1,
             beta2 => beta2, adam_eps => adam_eps, log_interval => log_interval);
        if self.no_smoothing {
            c.smoothing = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Input grid.
    pub grid: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output grid.
    #[arg(short, long)]
    pub output: PathBuf,
    /// JSONL loss trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HollowArgs {
    /// Optimized grid.
    #[arg(required_unless_present_all = ["outer_mesh", "inner_mesh"])]
    pub grid: Option<PathBuf>,
    /// Merge these two shells instead of extracting them from a grid; the
    /// inner shell is given with outward normals and gets inverted.
    #[arg(long, requires = "inner_mesh", conflicts_with = "grid")]
    pub outer_mesh: Option<PathBuf>,
    #[arg(long, requires = "outer_mesh")]
    pub inner_mesh: Option<PathBuf>,
    /// Merged mesh (.stl or .obj).
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub outer: Option<PathBuf>,
    #[arg(long)]
    pub inner: Option<PathBuf>,
    /// Region split report; printed to stdout either way.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub no_smoothing: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Grid (.dfd) or mesh (.stl/.obj).
    #[arg(required_unless_present = "fixture")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// For grids, analyze the solid input shape instead of the design.
    #[arg(long)]
    pub solid: bool,
    /// Use cell corners for the support polygon.
    #[arg(long)]
    pub inflate_half_cell: bool,
    #[arg(long)]
    pub no_smoothing: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub mesh_a: PathBuf,
    pub mesh_b: PathBuf,
    /// F-score distance threshold.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_TAU)]
    pub tau: f64,
    /// Surface samples per mesh.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Surface sampling seed.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLE_SEED)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid whose object occupancy is swept.
    #[arg(required_unless_present = "fixture")]
    pub grid: Option<PathBuf>,
    /// Built-in shape instead of an input file.
    #[arg(long, value_parser = parse_fixture)]
    pub fixture: Option<Fixture>,
    /// Cells per axis.
    #[arg(long, default_value_t = hollowfield::grid::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// lambda_mass or epsilon.
    #[arg(long)]
    pub param: String,
    /// Comma-separated parameter values.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Surface samples per mesh.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// F-score distance threshold.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_TAU)]
    pub tau: f64,
    /// Surface sampling seed.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLE_SEED)]
    pub sample_seed: u64,
    /// CSV path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Input mesh (.stl/.obj) or grid (.dfd).
    #[arg(required_unless_present = "fixture")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory, replaced atomically.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Stop after optimization.
    #[arg(long)]
    pub skip_hollow: bool,
    /// Surface samples per mesh.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// F-score distance threshold.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_TAU)]
    pub tau: f64,
    /// Surface sampling seed.
    #[arg(long, default_value_t = hollowfield::metrics::DEFAULT_SAMPLE_SEED)]
    pub sample_seed: u64,
    #[arg(long)]
    pub inflate_half_cell: bool,
}
