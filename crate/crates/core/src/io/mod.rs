//! Mesh, grid and report serialization.

pub mod dfd;
pub mod obj;
pub mod stl;

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

pub use dfd::{read_grid, write_grid, GridFile};
pub use obj::{read_obj, write_obj};
pub use stl::{read_stl, write_stl};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Stl,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("stl") => Ok(Self::Stl),
            Some("obj") => Ok(Self::Obj),
            _ => Err(Error::InvalidConfig(format!("unknown mesh extension: {}", path.display()))),
        }
    }
}

pub fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Stl => read_stl(path),
        MeshFormat::Obj => read_obj(path),
    }
}

pub fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Stl => write_stl(mesh, path),
        MeshFormat::Obj => write_obj(mesh, path),
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
