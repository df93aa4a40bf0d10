//! Regular voxel grid over the normalized cube `[-0.5, 0.5]^3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 64;

/// Cell layout of an `N^3` grid. Linear index is `x + y*N + z*N^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!("grid resolution must be >= 4, got {n}")));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_size(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let h = self.cell_size();
        h * h * h
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.cell_size();
        h * h
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// World coordinate of the center of cell `i` along one axis.
    #[inline]
    pub fn axis_center(&self, i: usize) -> f64 {
        -0.5 + (i as f64 + 0.5) / self.n as f64
    }

    #[inline]
    pub fn center(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        [self.axis_center(x), self.axis_center(y), self.axis_center(z)]
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> [f64; 3] {
        let [x, y, z] = self.coords(idx);
        self.center(x, y, z)
    }

    /// World z of the bottom face of layer `z`.
    #[inline]
    pub fn layer_bottom(&self, z: usize) -> f64 {
        -0.5 + z as f64 / self.n as f64
    }

    /// Face neighbors of a cell; `None` where the neighbor would leave the grid.
    pub fn neighbors6(&self, idx: usize) -> [Option<usize>; 6] {
        let [x, y, z] = self.coords(idx);
        let n = self.n;
        [
            (x > 0).then(|| idx - 1),
            (x + 1 < n).then(|| idx + 1),
            (y > 0).then(|| idx - n),
            (y + 1 < n).then(|| idx + n),
            (z > 0).then(|| idx - n * n),
            (z + 1 < n).then(|| idx + n * n),
        ]
    }
}

/// Solid object `O` as a boolean voxel grid. Always holds at least one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    spec: GridSpec,
    cells: Vec<bool>,
}

impl Occupancy {
    pub fn new(spec: GridSpec, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != spec.len() {
            return Err(Error::SizeMismatch { expected: spec.len(), actual: cells.len() });
        }
        if !cells.iter().any(|&c| c) {
            return Err(Error::EmptyResult);
        }
        Ok(Self { spec, cells })
    }

    /// Occupies every cell whose center satisfies `inside`.
    pub fn from_fn(spec: GridSpec, inside: impl Fn([f64; 3]) -> bool) -> Result<Self> {
        let cells = (0..spec.len()).map(|i| inside(spec.center_of(i))).collect();
        Self::new(spec, cells)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Lowest z-layer holding an occupied cell.
    pub fn z_min(&self) -> usize {
        let layer = self.spec.n * self.spec.n;
        let first = self.cells.iter().position(|&c| c).expect("occupancy is non-empty");
        first / layer
    }

    /// Density field that is 1 on occupied cells and 0 elsewhere.
    pub fn indicator(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }
}
