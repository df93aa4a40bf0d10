//! Table-driven marching cubes over cell-centered samples.
//!
//! The grid is padded with one layer of zeros on every side so that surfaces
//! close at the domain border. Vertices live on lattice edges and are shared
//! between neighboring cubes, which makes the output watertight.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mesh::{TriangleMesh, Vec3};

use super::tables::TRI_TABLE;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Extracts the `iso` level set of a per-cell field. Cells strictly above
/// `iso` are inside; the resulting mesh has outward (counter-clockwise)
/// winding.
pub fn marching_cubes(values: &[f64], spec: &GridSpec, iso: f64) -> Result<TriangleMesh> {
    if values.len() != spec.len() {
        return Err(Error::SizeMismatch { expected: spec.len(), actual: values.len() });
    }
    let n = spec.resolution();
    let m = n + 2;
    let h = spec.cell_size();

    let sample = |a: usize, b: usize, c: usize| -> f64 {
        if a == 0 || b == 0 || c == 0 || a > n || b > n || c > n {
            0.0
        } else {
            values[spec.index(a - 1, b - 1, c - 1)]
        }
    };
    let position = |a: usize, b: usize, c: usize| -> Vec3 {
        [
            -0.5 + (a as f64 - 0.5) * h,
            -0.5 + (b as f64 - 0.5) * h,
            -0.5 + (c as f64 - 0.5) * h,
        ]
    };

    let mut edge_vertex = vec![u32::MAX; 3 * m * m * m];
    let mut mesh = TriangleMesh::default();

    for c in 0..m - 1 {
        for b in 0..m - 1 {
            for a in 0..m - 1 {
                let corner_pos = CORNERS.map(|o| [a + o[0], b + o[1], c + o[2]]);
                let corner_val = corner_pos.map(|p| sample(p[0], p[1], p[2]));
                let mut case = 0usize;
                for (bit, &v) in corner_val.iter().enumerate() {
                    if v > iso {
                        case |= 1 << bit;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRI_TABLE[case];
                let mut k = 0;
                while k < 16 && row[k] >= 0 {
                    let mut tri = [0u32; 3];
                    for (slot, &e) in row[k..k + 3].iter().enumerate() {
                        let [u, v] = EDGES[e as usize];
                        let (pu, pv) = (corner_pos[u], corner_pos[v]);
                        let lo = if pu <= pv { pu } else { pv };
                        let axis = (0..3).find(|&ax| pu[ax] != pv[ax]).expect("edge spans one axis");
                        let key = 3 * (lo[0] + m * (lo[1] + m * lo[2])) + axis;
                        if edge_vertex[key] == u32::MAX {
                            let (vu, vv) = (corner_val[u], corner_val[v]);
                            let t = (iso - vu) / (vv - vu);
                            let (xu, xv) = (position(pu[0], pu[1], pu[2]), position(pv[0], pv[1], pv[2]));
                            let p = [
                                xu[0] + t * (xv[0] - xu[0]),
                                xu[1] + t * (xv[1] - xu[1]),
                                xu[2] + t * (xv[2] - xu[2]),
                            ];
                            mesh.vertices.push(p);
                            edge_vertex[key] = (mesh.vertices.len() - 1) as u32;
                        }
                        tri[slot] = edge_vertex[key];
                    }
                    // The table winds around corners below the iso level; we
                    // treat values above it as inside, so flip.
                    mesh.triangles.push([tri[0], tri[2], tri[1]]);
                    k += 3;
                }
            }
        }
    }

    if mesh.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(mesh)
}
