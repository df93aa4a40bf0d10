//! Hollow structure generation from an optimized density field.
//!
//! The solid region `V` holds cells with `rho~ > 0.5`; the hollow region `H`
//! holds object cells with `rho~ <= 0.5`. The outer shell is extracted from
//! the filled envelope `V + H`, the inner shell from the complement density
//! `1 - rho~` restricted to the object, then inverted and merged.

mod marching_cubes;
mod merge;
mod tables;

pub use marching_cubes::marching_cubes;
pub use merge::{find_shell_intersection, merge, triangles_intersect, INTERSECTION_EPS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Occupancy};
use crate::mesh::TriangleMesh;

pub const ISO_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSplit {
    pub solid: Vec<bool>,
    pub hollow: Vec<bool>,
}

impl RegionSplit {
    pub fn solid_count(&self) -> usize {
        self.solid.iter().filter(|&&s| s).count()
    }

    pub fn hollow_count(&self) -> usize {
        self.hollow.iter().filter(|&&s| s).count()
    }

    /// Solid region plus cavities, i.e. everything inside the outer surface.
    pub fn envelope(&self) -> Vec<bool> {
        self.solid.iter().zip(&self.hollow).map(|(&s, &h)| s || h).collect()
    }
}

pub fn split_regions(rho_t: &[f64], occ: &Occupancy) -> Result<RegionSplit> {
    if rho_t.len() != occ.spec().len() {
        return Err(Error::SizeMismatch { expected: occ.spec().len(), actual: rho_t.len() });
    }
    let solid = rho_t.iter().map(|&r| r > ISO_LEVEL).collect();
    let hollow = rho_t
        .iter()
        .zip(occ.cells())
        .map(|(&r, &o)| o && r <= ISO_LEVEL)
        .collect();
    Ok(RegionSplit { solid, hollow })
}

/// Number of 6-connected components of a cell set.
pub fn count_components(cells: &[bool], spec: &GridSpec) -> usize {
    let mut seen = vec![false; cells.len()];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..cells.len() {
        if !cells[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in spec.neighbors6(i).into_iter().flatten() {
                if cells[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct HollowReport {
    pub solid_cells: usize,
    pub hollow_cells: usize,
    pub hollow_components: usize,
    pub outer_triangles: usize,
    pub inner_triangles: usize,
    pub outer_volume: f64,
    pub cavity_volume: f64,
    pub net_volume: f64,
}

#[derive(Debug, Clone)]
pub struct HollowResult {
    pub outer: TriangleMesh,
    /// Inner shell, already inverted. Empty when nothing was carved.
    pub inner: TriangleMesh,
    pub merged: TriangleMesh,
    pub split: RegionSplit,
    pub report: HollowReport,
}

fn indicator(cells: &[bool]) -> Vec<f64> {
    cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
}

/// Outer surface of the filled envelope of `V`.
pub fn outer_shell(split: &RegionSplit, spec: &GridSpec) -> Result<TriangleMesh> {
    marching_cubes(&indicator(&split.envelope()), spec, ISO_LEVEL)
}

/// Region split, outer and inner extraction, inversion and merge.
pub fn hollow_pipeline(rho_t: &[f64], occ: &Occupancy) -> Result<HollowResult> {
    let spec = occ.spec();
    let split = split_regions(rho_t, occ)?;
    let outer = outer_shell(&split, spec)?;

    let inner = if split.hollow_count() == 0 {
        TriangleMesh::default()
    } else {
        let complement: Vec<f64> = rho_t
            .iter()
            .zip(occ.cells())
            .map(|(&r, &o)| if o { 1.0 - r } else { 0.0 })
            .collect();
        match marching_cubes(&complement, spec, ISO_LEVEL) {
            Ok(m) => m.inverted(),
            Err(Error::EmptyField) => TriangleMesh::default(),
            Err(e) => return Err(e),
        }
    };
    let merged = merge(&outer, &inner)?;

    let outer_volume = outer.signed_volume();
    let cavity_volume = -inner.signed_volume();
    let report = HollowReport {
        solid_cells: split.solid_count(),
        hollow_cells: split.hollow_count(),
        hollow_components: count_components(&split.hollow, spec),
        outer_triangles: outer.triangles.len(),
        inner_triangles: inner.triangles.len(),
        outer_volume,
        cavity_volume,
        net_volume: merged.signed_volume(),
    };
    Ok(HollowResult { outer, inner, merged, split, report })
}
