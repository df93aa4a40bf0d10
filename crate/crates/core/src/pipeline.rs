//! End-to-end orchestration shared by the command line and the Python
//! bindings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{init_theta, DensityField};
use crate::fixtures::Fixture;
use crate::grid::{GridSpec, Occupancy};
use crate::hollow::{hollow_pipeline, marching_cubes, HollowResult, ISO_LEVEL};
use crate::io::{self, GridFile};
use crate::masks::derive_masks;
use crate::mesh::TriangleMesh;
use crate::metrics::{material_mass, mesh_fidelity, split_mass, FidelityReport, MaterialMass, SweepRow};
use crate::objective::{smoothed_density, total_loss, LossBreakdown};
use crate::optimizer::{optimize, OptimConfig, RunTrace};
use crate::stability::{evaluate_stability, StabilityOptions, StabilityReport};
use crate::voxelize::{voxelize_with, VoxelizeOptions};

/// Initial grid for an occupancy: masks plus saturated logits.
pub fn grid_from_occupancy(occ: &Occupancy, epsilon: usize, theta_sat: f64) -> Result<GridFile> {
    if epsilon < 1 {
        return Err(Error::InvalidConfig("epsilon must be >= 1".into()));
    }
    let masks = derive_masks(occ, epsilon)?;
    let field = init_theta(&masks, theta_sat)?;
    Ok(quantize(GridFile { field, masks }))
}

/// Voxelizes a mesh, optionally rescaling it into the unit cube first.
pub fn occupancy_from_mesh(mesh: &TriangleMesh, spec: GridSpec, normalize: bool, opts: &VoxelizeOptions) -> Result<Occupancy> {
    let mut mesh = mesh.clone();
    if normalize {
        mesh.normalize_to_unit_cube()?;
    }
    voxelize_with(&mesh, &spec, opts)
}

/// Rounds the logits to the precision stored in grid files so in-memory and
/// on-disk results agree.
pub fn quantize(grid: GridFile) -> GridFile {
    let GridFile { field, masks } = grid;
    let theta = field.theta().iter().map(|&t| t as f32 as f64).collect();
    let theta_sat = field.theta_sat() as f32 as f64;
    let field = DensityField::new(*field.spec(), theta, theta_sat).expect("same shape");
    GridFile { field, masks }
}

pub fn optimize_grid(grid: &GridFile, config: &OptimConfig) -> Result<(GridFile, RunTrace)> {
    let (field, trace) = optimize(&grid.field, &grid.masks, config)?;
    Ok((quantize(GridFile { field, masks: grid.masks.clone() }), trace))
}

/// Smoothed design density of a grid.
pub fn design_density(grid: &GridFile, smoothing: bool) -> Vec<f64> {
    smoothed_density(grid.field.theta(), &grid.masks, smoothing)
}

pub fn hollow_grid(grid: &GridFile, smoothing: bool) -> Result<HollowResult> {
    hollow_pipeline(&design_density(grid, smoothing), &grid.masks.occupancy())
}

/// Stability of the solid input shape.
pub fn solid_stability(occ: &Occupancy, opts: &StabilityOptions) -> Result<StabilityReport> {
    evaluate_stability(&occ.indicator(), occ.spec(), occ.z_min(), opts)
}

/// Stability of the printed design: the hard solid region `V` with unit
/// density.
pub fn design_stability(grid: &GridFile, smoothing: bool, opts: &StabilityOptions) -> Result<StabilityReport> {
    let rho_t = design_density(grid, smoothing);
    let solid: Vec<f64> = rho_t.iter().map(|&r| if r > ISO_LEVEL { 1.0 } else { 0.0 }).collect();
    evaluate_stability(&solid, grid.field.spec(), grid.masks.z_min(), opts)
}

/// Outer surface of the solid input shape.
pub fn solid_shell(occ: &Occupancy) -> Result<TriangleMesh> {
    marching_cubes(&occ.indicator(), occ.spec(), ISO_LEVEL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    LambdaMass,
    Epsilon,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaMass => "lambda_mass",
            SweepParam::Epsilon => "epsilon",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lambda_mass" => Ok(SweepParam::LambdaMass),
            "epsilon" => Ok(SweepParam::Epsilon),
            _ => Err(Error::InvalidConfig(format!("unknown sweep parameter {s:?}"))),
        }
    }

    /// Config with the swept value applied.
    pub fn apply(self, base: &OptimConfig, value: f64) -> Result<OptimConfig> {
        let mut config = base.clone();
        match self {
            SweepParam::LambdaMass => config.lambda_mass = value,
            SweepParam::Epsilon => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::InvalidConfig(format!("epsilon must be a positive integer, got {value}")));
                }
                config.epsilon = value as usize;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityOptions {
    pub samples: usize,
    pub tau: f64,
    pub seed: u64,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        Self {
            samples: crate::metrics::DEFAULT_SAMPLES,
            tau: crate::metrics::DEFAULT_TAU,
            seed: crate::metrics::DEFAULT_SAMPLE_SEED,
        }
    }
}

/// Result of optimizing and hollowing one occupancy.
#[derive(Debug, Clone)]
pub struct DesignRun {
    pub initial: GridFile,
    pub optimized: GridFile,
    pub trace: RunTrace,
    pub hollow: HollowResult,
    pub mass: MaterialMass,
    pub stability: StabilityReport,
}

/// Initializes, optimizes and hollows an occupancy.
pub fn design(occ: &Occupancy, config: &OptimConfig, stability: &StabilityOptions) -> Result<DesignRun> {
    config.validate()?;
    let initial = grid_from_occupancy(occ, config.epsilon, config.theta_sat)?;
    let (optimized, trace) = optimize_grid(&initial, config)?;
    let rho_t = design_density(&optimized, config.smoothing);
    let hollow = hollow_pipeline(&rho_t, occ)?;
    let mass = material_mass(&rho_t, occ.spec());
    let stability = design_stability(&optimized, config.smoothing, stability)?;
    Ok(DesignRun { initial, optimized, trace, hollow, mass, stability })
}

/// Runs one full design per value, always starting from the initial logits
/// of `occ`.
pub fn sweep(
    occ: &Occupancy,
    param: SweepParam,
    values: &[f64],
    base: &OptimConfig,
    fidelity: Option<&FidelityOptions>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let reference = match fidelity {
        Some(_) => Some(solid_shell(occ)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let config = param.apply(base, value)?;
        let run = design(occ, &config, &StabilityOptions::default())?;
        let chamfer = match (fidelity, &reference) {
            (Some(f), Some(r)) => Some(mesh_fidelity(r, &run.hollow.outer, f.samples, f.tau, f.seed)?.chamfer),
            _ => None,
        };
        log::info!("{} = {value}: hard mass {:.6}", param.name(), run.mass.hard);
        rows.push(SweepRow {
            param: param.name().into(),
            value,
            mass: split_mass(&run.hollow.split, occ.spec()),
            soft_mass: run.mass.soft,
            stable: run.stability.stable,
            critical_tilt_deg: run.stability.critical_tilt_deg,
            rot_deg: run.stability.rot_deg,
            com_z: run.stability.com[2],
            hollow_components: run.hollow.report.hollow_components,
            chamfer,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PipelineInput {
    Mesh { path: PathBuf, normalize: bool },
    Grid { path: PathBuf },
    Fixture { name: Fixture },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageToggles {
    pub optimize: bool,
    pub hollow: bool,
}

/// Everything a pipeline run was asked to do, echoed into its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub input: PipelineInput,
    pub output_dir: PathBuf,
    pub resolution: usize,
    pub config: OptimConfig,
    pub stages: StageToggles,
    pub samples: usize,
    pub tau: f64,
    pub sample_seed: u64,
    pub inflate_half_cell: bool,
    /// Report name to file name inside the output directory.
    #[serde(default)]
    pub reports: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
struct PipelineSummary {
    resolution: usize,
    occupied_cells: usize,
    initial_hard_mass: f64,
    final_hard_mass: Option<f64>,
    final_soft_mass: Option<f64>,
    initial_loss: LossBreakdown,
    final_loss: Option<LossBreakdown>,
}

#[derive(Debug, Clone, Serialize)]
struct StabilityPair {
    solid: StabilityReport,
    design: StabilityReport,
}

fn partial_dir(target: &Path) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    target.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

fn load_input(manifest: &PipelineManifest) -> Result<(Occupancy, GridFile)> {
    let epsilon = manifest.config.epsilon;
    let theta_sat = manifest.config.theta_sat;
    match &manifest.input {
        PipelineInput::Mesh { path, normalize } => {
            let spec = GridSpec::new(manifest.resolution)?;
            let mesh = io::read_mesh(path)?;
            let occ = occupancy_from_mesh(&mesh, spec, *normalize, &VoxelizeOptions::default())?;
            let grid = grid_from_occupancy(&occ, epsilon, theta_sat)?;
            Ok((occ, grid))
        }
        PipelineInput::Grid { path } => {
            let grid = quantize(io::read_grid(path)?);
            Ok((grid.masks.occupancy(), grid))
        }
        PipelineInput::Fixture { name } => {
            let occ = name.occupancy(GridSpec::new(manifest.resolution)?)?;
            let grid = grid_from_occupancy(&occ, epsilon, theta_sat)?;
            Ok((occ, grid))
        }
    }
}

/// Runs the configured stages into a scratch directory, then moves it into
/// place. An existing output directory is replaced only after every stage
/// succeeded.
pub fn run_pipeline(manifest: &PipelineManifest) -> Result<PipelineManifest> {
    manifest.config.validate()?;
    let target = manifest.output_dir.clone();
    let scratch = partial_dir(&target);
    if scratch.exists() {
        fs::remove_dir_all(&scratch)?;
    }
    if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::create_dir(&scratch)?;
    let result = run_stages(manifest, &scratch);
    let manifest = match result {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&scratch);
            return Err(e);
        }
    };
    if target.exists() {
        let old = target.with_file_name(format!(
            ".{}.old-{}",
            target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            std::process::id()
        ));
        fs::rename(&target, &old)?;
        fs::rename(&scratch, &target)?;
        fs::remove_dir_all(&old)?;
    } else {
        fs::rename(&scratch, &target)?;
    }
    Ok(manifest)
}

fn run_stages(request: &PipelineManifest, dir: &Path) -> Result<PipelineManifest> {
    let mut manifest = request.clone();
    let mut reports = Vec::new();
    let mut record = |name: &str, file: &str| reports.push((name.to_string(), file.to_string()));
    let config = &manifest.config;
    let (occ, initial) = load_input(&manifest)?;
    manifest.resolution = occ.spec().resolution();
    io::write_grid(&initial.field, &initial.masks, &dir.join("initial.dfd"))?;
    record("initial_grid", "initial.dfd");

    let objective = config.objective();
    let mut summary = PipelineSummary {
        resolution: manifest.resolution,
        occupied_cells: occ.count(),
        initial_hard_mass: occ.count() as f64 * occ.spec().cell_volume(),
        final_hard_mass: None,
        final_soft_mass: None,
        initial_loss: total_loss(initial.field.theta(), &initial.masks, &objective)?,
        final_loss: None,
    };

    if manifest.stages.optimize {
        let (optimized, trace) = optimize_grid(&initial, config)?;
        log::info!("optimization finished in {:.2}s", trace.wall_time_secs);
        io::write_grid(&optimized.field, &optimized.masks, &dir.join("optimized.dfd"))?;
        fs::write(dir.join("trace.jsonl"), trace.to_jsonl()?)?;
        record("optimized_grid", "optimized.dfd");
        record("trace", "trace.jsonl");
        summary.final_loss = Some(total_loss(optimized.field.theta(), &optimized.masks, &objective)?);

        if manifest.stages.hollow {
            let rho_t = design_density(&optimized, config.smoothing);
            let hollow = hollow_pipeline(&rho_t, &occ)?;
            let mass = material_mass(&rho_t, occ.spec());
            summary.final_hard_mass = Some(split_mass(&hollow.split, occ.spec()));
            summary.final_soft_mass = Some(mass.soft);
            io::write_stl(&hollow.merged, &dir.join("hollow.stl"))?;
            io::write_stl(&hollow.outer, &dir.join("outer.stl"))?;
            io::write_json(&hollow.report, &dir.join("hollow.json"))?;
            record("hollow_mesh", "hollow.stl");
            record("outer_mesh", "outer.stl");
            record("hollow_report", "hollow.json");
            if !hollow.inner.is_empty() {
                io::write_stl(&hollow.inner, &dir.join("inner.stl"))?;
                record("inner_mesh", "inner.stl");
            }

            let opts = StabilityOptions { inflate_half_cell: manifest.inflate_half_cell };
            let pair = StabilityPair {
                solid: solid_stability(&occ, &opts)?,
                design: design_stability(&optimized, config.smoothing, &opts)?,
            };
            io::write_json(&pair, &dir.join("stability.json"))?;
            record("stability", "stability.json");

            let fidelity: FidelityReport =
                mesh_fidelity(&solid_shell(&occ)?, &hollow.outer, manifest.samples, manifest.tau, manifest.sample_seed)?;
            io::write_json(&fidelity, &dir.join("fidelity.json"))?;
            record("fidelity", "fidelity.json");
        }
    }

    io::write_json(&summary, &dir.join("summary.json"))?;
    record("summary", "summary.json");
    record("manifest", "manifest.json");
    manifest.reports = reports;
    io::write_json(&manifest, &dir.join("manifest.json"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> OptimConfig {
        OptimConfig { steps: 30, ..OptimConfig::default() }
    }

    #[test]
    fn sweep_rows_follow_values() {
        let occ = Fixture::Cube.occupancy(GridSpec::new(12).unwrap()).unwrap();
        let rows = sweep(&occ, SweepParam::LambdaMass, &[0.0, 100.0], &quick_config(), None).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].value, 100.0);
        assert!(rows.iter().all(|r| r.chamfer.is_none()));
        assert!(SweepParam::Epsilon.apply(&quick_config(), 1.5).is_err());
    }

    #[test]
    fn pipeline_writes_reports_into_place() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let manifest = PipelineManifest {
            input: PipelineInput::Fixture { name: Fixture::Mushroom },
            output_dir: out.clone(),
            resolution: 16,
            config: quick_config(),
            stages: StageToggles { optimize: true, hollow: true },
            samples: 500,
            tau: 0.01,
            sample_seed: 1,
            inflate_half_cell: false,
            reports: Vec::new(),
        };
        let done = run_pipeline(&manifest).unwrap();
        for (_, file) in &done.reports {
            assert!(out.join(file).is_file(), "{file}");
        }
        let echoed: PipelineManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(echoed, done);
        // Re-running replaces the directory and leaves no scratch behind.
        run_pipeline(&manifest).unwrap();
        let names: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("run")]);
    }
}
