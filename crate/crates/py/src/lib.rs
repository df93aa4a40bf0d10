//! Python bindings.

use std::path::PathBuf;

use hollowfield::fixtures::Fixture;
use hollowfield::grid::GridSpec;
use hollowfield::io::{self, GridFile};
use hollowfield::masks::CellClass;
use hollowfield::mesh::TriangleMesh;
use hollowfield::metrics;
use hollowfield::optimizer::OptimConfig;
use hollowfield::pipeline::{self, PipelineInput, PipelineManifest, StageToggles};
use hollowfield::stability::{self, StabilityOptions};
use hollowfield::voxelize::VoxelizeOptions;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(hollowfield, HollowfieldError, PyException);

fn to_py(e: hollowfield::Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        HollowfieldError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for hollowfield::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Serializes through JSON into native Python objects.
fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| HollowfieldError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config_from(py: Python<'_>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<OptimConfig> {
    let config: OptimConfig = match kwargs {
        Some(k) => {
            let text: String = py.import("json")?.call_method1("dumps", (k,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| HollowfieldError::new_err(e.to_string()))?
        }
        None => OptimConfig::default(),
    };
    config.validate().py()?;
    Ok(config)
}

fn fixture(name: &str) -> PyResult<Fixture> {
    name.parse().py()
}

/// Indexed triangle mesh.
#[pyclass(name = "Mesh", module = "hollowfield", skip_from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: TriangleMesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> PyResult<Self> {
        Ok(Self { inner: TriangleMesh::new(vertices, triangles).py()? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: io::read_mesh(&path).py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (name, resolution=64))]
    fn fixture(name: &str, resolution: usize) -> PyResult<Self> {
        Ok(Self { inner: fixture(name)?.mesh(GridSpec::new(resolution).py()?).py()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::write_mesh(&self.inner, &path).py()
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices.clone()
    }

    #[getter]
    fn triangles(&self) -> Vec<[u32; 3]> {
        self.inner.triangles.clone()
    }

    fn signed_volume(&self) -> f64 {
        self.inner.signed_volume()
    }

    fn surface_area(&self) -> f64 {
        self.inner.surface_area()
    }

    fn is_closed_manifold(&self) -> bool {
        self.inner.edge_audit().is_closed_manifold()
    }

    fn inverted(&self) -> Self {
        Self { inner: self.inner.inverted() }
    }

    #[pyo3(signature = (n, seed=42))]
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<[f64; 3]>> {
        metrics::surface_sample(&self.inner, n, seed).py()
    }

    fn __len__(&self) -> usize {
        self.inner.triangles.len()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(vertices={}, triangles={})", self.inner.vertices.len(), self.inner.triangles.len())
    }
}

/// Hollowing result: merged, outer and inner shells plus the region report.
#[pyclass(name = "Hollow", module = "hollowfield")]
struct PyHollow {
    #[pyo3(get)]
    merged: PyMesh,
    #[pyo3(get)]
    outer: PyMesh,
    #[pyo3(get)]
    inner: PyMesh,
    report: hollowfield::hollow::HollowReport,
}

#[pymethods]
impl PyHollow {
    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &self.report)
    }
}

/// Voxel grid with masks and logits.
#[pyclass(name = "Grid", module = "hollowfield", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: GridFile,
}

#[pymethods]
impl PyGrid {
    #[staticmethod]
    #[pyo3(signature = (name, resolution=64, epsilon=2, theta_sat=8.0))]
    fn from_fixture(name: &str, resolution: usize, epsilon: usize, theta_sat: f64) -> PyResult<Self> {
        let occ = fixture(name)?.occupancy(GridSpec::new(resolution).py()?).py()?;
        Ok(Self { inner: pipeline::grid_from_occupancy(&occ, epsilon, theta_sat).py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (mesh, resolution=64, epsilon=2, theta_sat=8.0, normalize=true))]
    fn from_mesh(mesh: &PyMesh, resolution: usize, epsilon: usize, theta_sat: f64, normalize: bool) -> PyResult<Self> {
        let spec = GridSpec::new(resolution).py()?;
        let occ = pipeline::occupancy_from_mesh(&mesh.inner, spec, normalize, &VoxelizeOptions::default()).py()?;
        Ok(Self { inner: pipeline::grid_from_occupancy(&occ, epsilon, theta_sat).py()? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: io::read_grid(&path).py()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::write_grid(&self.inner.field, &self.inner.masks, &path).py()
    }

    #[getter]
    fn resolution(&self) -> usize {
        self.inner.field.spec().resolution()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.field.theta().to_vec()
    }

    /// Mask values per cell: 0 exterior, 1 boundary, 2 interior, 3 basal.
    #[getter]
    fn masks(&self) -> Vec<u8> {
        self.inner.masks.classes().iter().map(|&c| c as u8).collect()
    }

    fn counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let m = &self.inner.masks;
        for (name, class) in [
            ("exterior", CellClass::Exterior),
            ("boundary", CellClass::Boundary),
            ("interior", CellClass::Interior),
            ("basal", CellClass::Basal),
        ] {
            d.set_item(name, m.count(class))?;
        }
        Ok(d)
    }

    #[pyo3(signature = (smoothing=true))]
    fn density(&self, smoothing: bool) -> Vec<f64> {
        pipeline::design_density(&self.inner, smoothing)
    }

    /// Runs the optimizer; keyword arguments override the default config.
    /// Returns the optimized grid and the loss trace.
    #[pyo3(signature = (**kwargs))]
    fn optimize<'py>(&self, py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<(Self, Bound<'py, PyAny>)> {
        let config = config_from(py, kwargs)?;
        let (out, trace) = py.detach(|| pipeline::optimize_grid(&self.inner, &config)).py()?;
        Ok((Self { inner: out }, to_object(py, &trace.records)?))
    }

    #[pyo3(signature = (smoothing=true))]
    fn hollow(&self, py: Python<'_>, smoothing: bool) -> PyResult<PyHollow> {
        let r = py.detach(|| pipeline::hollow_grid(&self.inner, smoothing)).py()?;
        Ok(PyHollow {
            merged: PyMesh { inner: r.merged },
            outer: PyMesh { inner: r.outer },
            inner: PyMesh { inner: r.inner },
            report: r.report,
        })
    }

    #[pyo3(signature = (solid=false, smoothing=true, inflate_half_cell=false))]
    fn stability<'py>(&self, py: Python<'py>, solid: bool, smoothing: bool, inflate_half_cell: bool) -> PyResult<Bound<'py, PyAny>> {
        let opts = StabilityOptions { inflate_half_cell };
        let report = if solid {
            pipeline::solid_stability(&self.inner.masks.occupancy(), &opts)
        } else {
            pipeline::design_stability(&self.inner, smoothing, &opts)
        }
        .py()?;
        to_object(py, &report)
    }

    #[pyo3(signature = (smoothing=true))]
    fn mass<'py>(&self, py: Python<'py>, smoothing: bool) -> PyResult<Bound<'py, PyAny>> {
        let rho_t = pipeline::design_density(&self.inner, smoothing);
        to_object(py, &metrics::material_mass(&rho_t, self.inner.field.spec()))
    }

    fn __repr__(&self) -> String {
        format!("Grid(resolution={})", self.resolution())
    }
}

#[pyfunction]
fn chamfer_distance(a: Vec<[f64; 3]>, b: Vec<[f64; 3]>) -> PyResult<f64> {
    metrics::chamfer_distance(&a, &b).py()
}

#[pyfunction]
#[pyo3(signature = (a, b, tau=metrics::DEFAULT_TAU))]
fn f_score(a: Vec<[f64; 3]>, b: Vec<[f64; 3]>, tau: f64) -> PyResult<f64> {
    Ok(metrics::f_score(&a, &b, tau).py()?.f_score)
}

#[pyfunction]
#[pyo3(signature = (a, b, samples=metrics::DEFAULT_SAMPLES, tau=metrics::DEFAULT_TAU, seed=metrics::DEFAULT_SAMPLE_SEED))]
fn mesh_fidelity<'py>(py: Python<'py>, a: &PyMesh, b: &PyMesh, samples: usize, tau: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let r = metrics::mesh_fidelity(&a.inner, &b.inner, samples, tau, seed).py()?;
    to_object(py, &r)
}

#[pyfunction]
fn convex_hull_2d(points: Vec<[f64; 2]>) -> PyResult<Vec<[f64; 2]>> {
    if points.is_empty() {
        return Err(HollowfieldError::new_err("convex hull of an empty set"));
    }
    Ok(stability::convex_hull_2d(&points).vertices)
}

/// Full pipeline into `output_dir` from a fixture name or a mesh/grid path.
#[pyfunction]
#[pyo3(signature = (output_dir, fixture=None, path=None, resolution=64, skip_hollow=false, samples=metrics::DEFAULT_SAMPLES, **kwargs))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline<'py>(
    py: Python<'py>,
    output_dir: PathBuf,
    fixture: Option<&str>,
    path: Option<PathBuf>,
    resolution: usize,
    skip_hollow: bool,
    samples: usize,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let input = match (fixture, path) {
        (Some(name), _) => PipelineInput::Fixture { name: self::fixture(name)? },
        (None, Some(p)) if p.extension().is_some_and(|e| e == "dfd") => PipelineInput::Grid { path: p },
        (None, Some(p)) => PipelineInput::Mesh { path: p, normalize: true },
        (None, None) => return Err(HollowfieldError::new_err("fixture or path is required")),
    };
    let manifest = PipelineManifest {
        input,
        output_dir,
        resolution,
        config: config_from(py, kwargs)?,
        stages: StageToggles { optimize: true, hollow: !skip_hollow },
        samples,
        tau: metrics::DEFAULT_TAU,
        sample_seed: metrics::DEFAULT_SAMPLE_SEED,
        inflate_half_cell: false,
        reports: Vec::new(),
    };
    let done = py.detach(|| pipeline::run_pipeline(&manifest)).py()?;
    to_object(py, &done)
}

#[pymodule]
#[pyo3(name = "hollowfield")]
fn hollowfield_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HollowfieldError", m.py().get_type::<HollowfieldError>())?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyHollow>()?;
    m.add_function(wrap_pyfunction!(chamfer_distance, m)?)?;
    m.add_function(wrap_pyfunction!(f_score, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(convex_hull_2d, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
