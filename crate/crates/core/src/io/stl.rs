//! Binary STL.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

pub fn encode_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * mesh.triangles.len());
    let mut header = [0u8; HEADER_LEN];
    let tag = b"hollowfield binary stl";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let normal = mesh.face_normal(t);
        for v in std::iter::once(normal).chain(mesh.triangle(t)) {
            for c in v {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Decodes a binary STL and welds bit-identical vertices.
pub fn decode_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(Error::MalformedFile(format!("{} bytes is shorter than the STL header", bytes.len())));
    }
    let count = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + 4 + RECORD_LEN * count;
    if bytes.len() != expected {
        return Err(Error::MalformedFile(format!(
            "expected {expected} bytes for {count} triangles, found {}",
            bytes.len()
        )));
    }
    let read_f32 = |at: usize| f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as f64;
    let mut vertices = Vec::with_capacity(3 * count);
    let mut triangles = Vec::with_capacity(count);
    for t in 0..count {
        let base = HEADER_LEN + 4 + RECORD_LEN * t + 12;
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let at = base + 12 * k;
            *slot = vertices.len() as u32;
            vertices.push([read_f32(at), read_f32(at + 4), read_f32(at + 8)]);
        }
        triangles.push(tri);
    }
    let mut mesh = TriangleMesh { vertices, triangles };
    mesh.weld();
    Ok(mesh)
}

pub fn write_stl(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    fs::write(path, encode_stl(mesh))?;
    Ok(())
}

pub fn read_stl(path: &Path) -> Result<TriangleMesh> {
    decode_stl(&fs::read(path)?)
}
