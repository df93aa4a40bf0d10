use std::fs;
use std::path::Path;

use hollowfield::grid::{GridSpec, Occupancy};
use hollowfield::hollow::merge;
use hollowfield::io::{self, GridFile};
use hollowfield::metrics::{mesh_fidelity, sweep_csv};
use hollowfield::pipeline::{
    self, FidelityOptions, PipelineInput, PipelineManifest, StageToggles, SweepParam,
};
use hollowfield::stability::StabilityOptions;
use hollowfield::voxelize::VoxelizeOptions;
use hollowfield::{Error, Result};
use serde::Serialize;

use crate::args::*;

fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        io::write_json(value, p)?;
    }
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn is_grid(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("dfd"))
}

fn shape_occupancy(input: Option<&Path>, shape: &ShapeArgs, opts: &VoxelizeOptions) -> Result<Occupancy> {
    let spec = GridSpec::new(shape.resolution)?;
    match (shape.fixture, input) {
        (Some(f), _) => f.occupancy(spec),
        (None, Some(path)) => pipeline::occupancy_from_mesh(&io::read_mesh(path)?, spec, !shape.no_normalize, opts),
        (None, None) => Err(Error::InvalidConfig("an input file or --fixture is required".into())),
    }
}

#[derive(Serialize)]
struct VoxelSummary {
    resolution: usize,
    epsilon: usize,
    theta_sat: f64,
    occupied: usize,
    boundary: usize,
    interior: usize,
    basal: usize,
    z_min: usize,
    output: String,
}

pub fn voxelize(a: &VoxelizeArgs) -> Result<()> {
    let opts = VoxelizeOptions { max_degenerate: a.max_degenerate };
    let occ = shape_occupancy(a.mesh.as_deref(), &a.shape, &opts)?;
    let grid = pipeline::grid_from_occupancy(&occ, a.epsilon, a.theta_sat)?;
    io::write_grid(&grid.field, &grid.masks, &a.output)?;
    use hollowfield::masks::CellClass::*;
    let summary = VoxelSummary {
        resolution: occ.spec().resolution(),
        epsilon: a.epsilon,
        theta_sat: grid.field.theta_sat(),
        occupied: occ.count(),
        boundary: grid.masks.count(Boundary),
        interior: grid.masks.count(Interior),
        basal: grid.masks.count(Basal),
        z_min: occ.z_min(),
        output: a.output.display().to_string(),
    };
    emit(&summary, a.summary.as_deref())
}

pub fn optimize(a: &OptimizeArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let grid = pipeline::quantize(io::read_grid(&a.grid)?);
    let (out, trace) = pipeline::optimize_grid(&grid, &config)?;
    log::info!("optimized {} steps in {:.2}s", config.steps, trace.wall_time_secs);
    io::write_grid(&out.field, &out.masks, &a.output)?;
    if let Some(path) = &a.trace {
        fs::write(path, trace.to_jsonl()?)?;
    }
    emit(&trace.last(), None)
}

pub fn hollow(a: &HollowArgs) -> Result<()> {
    if let (Some(outer), Some(inner)) = (&a.outer_mesh, &a.inner_mesh) {
        let outer = io::read_mesh(outer)?;
        let inner = io::read_mesh(inner)?.inverted();
        let merged = merge(&outer, &inner)?;
        io::write_mesh(&merged, &a.output)?;
        #[derive(Serialize)]
        struct MergeReport {
            triangles: usize,
            net_volume: f64,
        }
        let report = MergeReport { triangles: merged.triangles.len(), net_volume: merged.signed_volume() };
        return emit(&report, a.report.as_deref());
    }
    let path = a.grid.as_deref().ok_or_else(|| Error::InvalidConfig("grid input required".into()))?;
    let grid = io::read_grid(path)?;
    let result = pipeline::hollow_grid(&grid, !a.no_smoothing)?;
    io::write_mesh(&result.merged, &a.output)?;
    if let Some(p) = &a.outer {
        io::write_mesh(&result.outer, p)?;
    }
    if let Some(p) = &a.inner {
        io::write_mesh(&result.inner, p)?;
    }
    emit(&result.report, a.report.as_deref())
}

pub fn stability(a: &StabilityArgs) -> Result<()> {
    let opts = StabilityOptions { inflate_half_cell: a.inflate_half_cell };
    let report = match a.input.as_deref() {
        Some(path) if a.shape.fixture.is_none() && is_grid(path) => {
            let grid: GridFile = io::read_grid(path)?;
            if a.solid {
                pipeline::solid_stability(&grid.masks.occupancy(), &opts)?
            } else {
                pipeline::design_stability(&grid, !a.no_smoothing, &opts)?
            }
        }
        input => pipeline::solid_stability(&shape_occupancy(input, &a.shape, &VoxelizeOptions::default())?, &opts)?,
    };
    emit(&report, a.output.as_deref())
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let ma = io::read_mesh(&a.mesh_a)?;
    let mb = io::read_mesh(&a.mesh_b)?;
    let report = mesh_fidelity(&ma, &mb, a.samples, a.tau, a.seed)?;
    emit(&report, a.output.as_deref())
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let param = SweepParam::parse(&a.param)?;
    let base = a.config.resolve()?;
    let occ = match (a.fixture, &a.grid) {
        (Some(f), _) => f.occupancy(GridSpec::new(a.resolution)?)?,
        (None, Some(path)) => io::read_grid(path)?.masks.occupancy(),
        (None, None) => return Err(Error::InvalidConfig("a grid or --fixture is required".into())),
    };
    let fidelity = FidelityOptions { samples: a.samples, tau: a.tau, seed: a.sample_seed };
    let rows = pipeline::sweep(&occ, param, &a.values, &base, Some(&fidelity))?;
    let csv = sweep_csv(&rows)?;
    match &a.output {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn run_pipeline(a: &PipelineArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let input = match (a.shape.fixture, &a.input) {
        (Some(name), _) => PipelineInput::Fixture { name },
        (None, Some(p)) if is_grid(p) => PipelineInput::Grid { path: p.clone() },
        (None, Some(p)) => PipelineInput::Mesh { path: p.clone(), normalize: !a.shape.no_normalize },
        (None, None) => return Err(Error::InvalidConfig("an input file or --fixture is required".into())),
    };
    let manifest = PipelineManifest {
        input,
        output_dir: a.output.clone(),
        resolution: a.shape.resolution,
        config,
        stages: StageToggles { optimize: true, hollow: !a.skip_hollow },
        samples: a.samples,
        tau: a.tau,
        sample_seed: a.sample_seed,
        inflate_half_cell: a.inflate_half_cell,
        reports: Vec::new(),
    };
    let done = pipeline::run_pipeline(&manifest)?;
    emit(&done, None)
}
