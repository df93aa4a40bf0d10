//! DFD1 density grids.
//!
//! Little-endian layout: magic `DFD1`, u32 version, u32 N, f32 theta_sat,
//! then N^3 records of (f32 theta, u8 mask) with x varying fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::GridSpec;
use crate::masks::{CellClass, DomainMasks};

pub const MAGIC: &[u8; 4] = b"DFD1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
const RECORD_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub field: DensityField,
    pub masks: DomainMasks,
}

/// Parameters are stored as f32; callers needing a lossless round trip keep
/// theta on the f32 lattice.
pub fn encode_grid(field: &DensityField, masks: &DomainMasks) -> Result<Vec<u8>> {
    let spec = field.spec();
    if masks.spec() != spec {
        return Err(Error::SizeMismatch { expected: spec.len(), actual: masks.spec().len() });
    }
    let n = spec.resolution();
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * spec.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(field.theta_sat() as f32).to_le_bytes());
    for (theta, class) in field.theta().iter().zip(masks.classes()) {
        out.extend_from_slice(&(*theta as f32).to_le_bytes());
        out.push(*class as u8);
    }
    Ok(out)
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridFile> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::SizeMismatch { expected: HEADER_LEN, actual: bytes.len() });
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let n = u32_at(8) as usize;
    let theta_sat = f32::from_le_bytes(bytes[12..16].try_into().unwrap()) as f64;
    let cells = n.checked_pow(3).ok_or(Error::SizeMismatch { expected: usize::MAX, actual: bytes.len() })?;
    let expected = HEADER_LEN + RECORD_LEN * cells;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch { expected, actual: bytes.len() });
    }
    let spec = GridSpec::new(n)?;
    let mut theta = Vec::with_capacity(cells);
    let mut classes = Vec::with_capacity(cells);
    for record in bytes[HEADER_LEN..].chunks_exact(RECORD_LEN) {
        theta.push(f32::from_le_bytes(record[..4].try_into().unwrap()) as f64);
        let class = CellClass::from_u8(record[4])
            .ok_or_else(|| Error::MalformedFile(format!("unknown mask value {}", record[4])))?;
        classes.push(class);
    }
    Ok(GridFile {
        field: DensityField::new(spec, theta, theta_sat)?,
        masks: DomainMasks::from_classes(spec, classes)?,
    })
}

pub fn write_grid(field: &DensityField, masks: &DomainMasks, path: &Path) -> Result<()> {
    fs::write(path, encode_grid(field, masks)?)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFile> {
    decode_grid(&fs::read(path)?)
}
