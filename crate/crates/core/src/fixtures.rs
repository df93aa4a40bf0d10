//! Built-in synthetic shapes, defined in world coordinates so they scale
//! with the grid resolution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Occupancy};
use crate::hollow::{marching_cubes, ISO_LEVEL};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    /// Solid cube, side 0.625, centered.
    Cube,
    /// Wide cap on a narrow stem, top heavy.
    Mushroom,
    /// Post with a long horizontal arm; the center of mass overhangs the
    /// footprint.
    Lshape,
    /// Thin vertical column.
    Column,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [Fixture::Cube, Fixture::Mushroom, Fixture::Lshape, Fixture::Column];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Cube => "cube",
            Fixture::Mushroom => "mushroom",
            Fixture::Lshape => "lshape",
            Fixture::Column => "column",
        }
    }

    pub fn contains(self, p: [f64; 3]) -> bool {
        let [x, y, z] = p;
        let inside = |v: f64, lo: f64, hi: f64| v > lo && v < hi;
        match self {
            Fixture::Cube => x.abs() < 0.3125 && y.abs() < 0.3125 && z.abs() < 0.3125,
            Fixture::Mushroom => {
                let stem = x.abs() < 0.09375 && y.abs() < 0.09375 && inside(z, -0.4375, 0.0625);
                let cap = x.abs() < 0.3125 && y.abs() < 0.3125 && inside(z, 0.0625, 0.3125);
                stem || cap
            }
            Fixture::Lshape => {
                let band = y.abs() < 0.125;
                let post = inside(x, -0.375, -0.25) && inside(z, -0.4375, 0.3125);
                let arm = inside(x, -0.25, 0.375) && inside(z, 0.125, 0.3125);
                band && (post || arm)
            }
            Fixture::Column => x.abs() < 0.0625 && y.abs() < 0.0625 && z.abs() < 0.4375,
        }
    }

    pub fn occupancy(self, spec: GridSpec) -> Result<Occupancy> {
        Occupancy::from_fn(spec, |p| self.contains(p))
    }

    /// Voxel surface of the fixture at resolution `n`.
    pub fn mesh(self, spec: GridSpec) -> Result<TriangleMesh> {
        let occ = self.occupancy(spec)?;
        marching_cubes(&occ.indicator(), &spec, ISO_LEVEL)
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown fixture {s:?}")))
    }
}
