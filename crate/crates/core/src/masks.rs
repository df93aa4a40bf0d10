//! Per-cell classification of the voxel domain.
//!
//! Every cell is exactly one of: boundary shell of the object, object
//! interior, basal layer (optimizable support cells just outside the object
//! near the ground), or exterior. Interior and basal cells together form the
//! optimization domain; the boundary shell is frozen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Occupancy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellClass {
    Exterior = 0,
    Boundary = 1,
    Interior = 2,
    Basal = 3,
}

impl CellClass {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::Exterior),
            1 => Some(Self::Boundary),
            2 => Some(Self::Interior),
            3 => Some(Self::Basal),
            _ => None,
        }
    }

    #[inline]
    pub fn is_trainable(self) -> bool {
        matches!(self, Self::Interior | Self::Basal)
    }

    #[inline]
    pub fn in_object(self) -> bool {
        matches!(self, Self::Boundary | Self::Interior)
    }

    /// Cells whose density is ever non-zero.
    #[inline]
    pub fn carries_density(self) -> bool {
        self != Self::Exterior
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainMasks {
    spec: GridSpec,
    classes: Vec<CellClass>,
    z_min: usize,
}

impl DomainMasks {
    /// Rebuilds masks from a stored classification. `z_min` is recovered as the
    /// lowest layer holding an object cell.
    pub fn from_classes(spec: GridSpec, classes: Vec<CellClass>) -> Result<Self> {
        if classes.len() != spec.len() {
            return Err(Error::SizeMismatch { expected: spec.len(), actual: classes.len() });
        }
        let first = classes
            .iter()
            .position(|c| c.in_object())
            .ok_or(Error::EmptyResult)?;
        let z_min = spec.coords(first)[2];
        Ok(Self { spec, classes, z_min })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn classes(&self) -> &[CellClass] {
        &self.classes
    }

    #[inline]
    pub fn class(&self, idx: usize) -> CellClass {
        self.classes[idx]
    }

    /// Ground layer of the original object.
    pub fn z_min(&self) -> usize {
        self.z_min
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Indices of the optimization domain in ascending order.
    pub fn trainable_indices(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.classes[i].is_trainable()).collect()
    }

    /// The original object `O` (boundary plus interior).
    pub fn occupancy(&self) -> Occupancy {
        let cells = self.classes.iter().map(|c| c.in_object()).collect();
        Occupancy::new(self.spec, cells).expect("masks hold at least one object cell")
    }
}

/// Splits the grid into boundary, interior, basal and exterior cells.
///
/// Boundary uses 6-connectivity: an occupied cell with an unoccupied face
/// neighbor, or one on the grid border, belongs to the shell. The basal layer
/// holds unoccupied cells in layers `z_min..=z_min + epsilon` whose L1 index
/// distance to some occupied cell is strictly below `epsilon`.
pub fn derive_masks(occ: &Occupancy, epsilon: usize) -> Result<DomainMasks> {
    if epsilon < 1 {
        return Err(Error::InvalidConfig("basal layer thickness must be >= 1".into()));
    }
    let spec = *occ.spec();
    let n = spec.resolution();
    let z_min = occ.z_min();

    let mut classes: Vec<CellClass> = (0..spec.len())
        .map(|idx| {
            if !occ.get(idx) {
                return CellClass::Exterior;
            }
            let exposed = spec
                .neighbors6(idx)
                .iter()
                .any(|nb| nb.is_none_or(|j| !occ.get(j)));
            if exposed {
                CellClass::Boundary
            } else {
                CellClass::Interior
            }
        })
        .collect();

    // Offsets with |dx|+|dy|+|dz| < epsilon.
    let e = epsilon as i64;
    let mut offsets = Vec::new();
    for dz in -(e - 1)..e {
        for dy in -(e - 1)..e {
            for dx in -(e - 1)..e {
                if dx.abs() + dy.abs() + dz.abs() < e {
                    offsets.push((dx, dy, dz));
                }
            }
        }
    }

    let z_hi = (z_min + epsilon).min(n - 1);
    for z in z_min..=z_hi {
        for y in 0..n {
            for x in 0..n {
                let idx = spec.index(x, y, z);
                if occ.get(idx) {
                    continue;
                }
                let near = offsets.iter().any(|&(dx, dy, dz)| {
                    let (px, py, pz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    let inside = |v: i64| v >= 0 && v < n as i64;
                    inside(px)
                        && inside(py)
                        && inside(pz)
                        && occ.get(spec.index(px as usize, py as usize, pz as usize))
                });
                if near {
                    classes[idx] = CellClass::Basal;
                }
            }
        }
    }

    let masks = DomainMasks { spec, classes, z_min };
    if masks.count(CellClass::Interior) == 0 && masks.count(CellClass::Basal) == 0 {
        log::warn!("optimization domain is empty; optimization will be a no-op");
    }
    Ok(masks)
}
