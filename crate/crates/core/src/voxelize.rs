//! Inside/outside classification of cell centers by ray parity.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Occupancy};
use crate::mesh::TriangleMesh;

/// Jitter applied to rays that graze an edge or vertex, in cell units.
const JITTER: f64 = 1e-7;
const MAX_JITTER_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoxelizeOptions {
    /// Zero-area triangles allowed before the mesh is rejected.
    pub max_degenerate: usize,
}

pub fn voxelize(mesh: &TriangleMesh, spec: &GridSpec) -> Result<Occupancy> {
    voxelize_with(mesh, spec, &VoxelizeOptions::default())
}

/// Marks a cell occupied when a ray cast from its center along +x crosses
/// the mesh an odd number of times.
pub fn voxelize_with(mesh: &TriangleMesh, spec: &GridSpec, opts: &VoxelizeOptions) -> Result<Occupancy> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let audit = mesh.edge_audit();
    if audit.bad_edges > 0 {
        return Err(Error::NonWatertight { open_edges: audit.bad_edges });
    }
    let degenerate = mesh.degenerate_count();
    if degenerate > opts.max_degenerate {
        return Err(Error::DegenerateMesh { count: degenerate, tolerance: opts.max_degenerate });
    }

    let n = spec.resolution();
    let h = spec.cell_size();
    let margin = 1e-6 * h;

    // Bucket triangles by the (y, z) rows whose ray may hit them.
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n * n];
    let to_row = |v: f64| ((v + 0.5) / h - 0.5).clamp(-1.0, n as f64);
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangle(t);
        let (ylo, yhi) = minmax(tri.iter().map(|p| p[1]));
        let (zlo, zhi) = minmax(tri.iter().map(|p| p[2]));
        let j0 = to_row(ylo - margin).ceil().max(0.0) as usize;
        let j1 = to_row(yhi + margin).floor();
        let k0 = to_row(zlo - margin).ceil().max(0.0) as usize;
        let k1 = to_row(zhi + margin).floor();
        if j1 < 0.0 || k1 < 0.0 {
            continue;
        }
        let (j1, k1) = ((j1 as usize).min(n - 1), (k1 as usize).min(n - 1));
        for k in k0..=k1 {
            for j in j0..=j1 {
                rows[j + k * n].push(t as u32);
            }
        }
    }

    let mut cells = vec![false; spec.len()];
    let mut hits = Vec::new();
    for k in 0..n {
        for j in 0..n {
            let candidates = &rows[j + k * n];
            if candidates.is_empty() {
                continue;
            }
            let (y, z) = (spec.axis_center(j), spec.axis_center(k));
            cast_row(mesh, candidates, y, z, h, &mut hits);
            hits.sort_by(f64::total_cmp);
            // Centers lying exactly on a face are nudged by the jitter in +x.
            let mut above = hits.len();
            let mut cursor = 0;
            for i in 0..n {
                let x = spec.axis_center(i) + JITTER * h;
                while cursor < hits.len() && hits[cursor] <= x {
                    cursor += 1;
                    above -= 1;
                }
                if above % 2 == 1 {
                    cells[spec.index(i, j, k)] = true;
                }
            }
        }
    }
    Occupancy::new(*spec, cells)
}

fn minmax(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[inline]
fn orient(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
}

/// Collects the x coordinates where the +x ray through `(y, z)` crosses the
/// candidate triangles, re-casting with a small deterministic offset whenever
/// the ray touches an edge or a vertex.
fn cast_row(mesh: &TriangleMesh, candidates: &[u32], y: f64, z: f64, h: f64, hits: &mut Vec<f64>) {
    'attempt: for attempt in 0..MAX_JITTER_ATTEMPTS {
        hits.clear();
        let d = JITTER * h * attempt as f64;
        let q = [y + d, z + 0.618_033_988_7 * d];
        for &t in candidates {
            let [a, b, c] = mesh.triangle(t as usize);
            let (pa, pb, pc) = ([a[1], a[2]], [b[1], b[2]], [c[1], c[2]]);
            let area = orient(pa, pb, pc);
            if area == 0.0 {
                // Parallel to the ray.
                continue;
            }
            let wa = orient(pb, pc, q);
            let wb = orient(pc, pa, q);
            let wc = orient(pa, pb, q);
            let all_pos = wa > 0.0 && wb > 0.0 && wc > 0.0;
            let all_neg = wa < 0.0 && wb < 0.0 && wc < 0.0;
            if all_pos || all_neg {
                let x = (wa * a[0] + wb * b[0] + wc * c[0]) / area;
                hits.push(x);
                continue;
            }
            let touching = (wa == 0.0 || wb == 0.0 || wc == 0.0)
                && (wa >= 0.0 && wb >= 0.0 && wc >= 0.0 || wa <= 0.0 && wb <= 0.0 && wc <= 0.0);
            if touching {
                continue 'attempt;
            }
        }
        return;
    }
    log::warn!("ray at y={y}, z={z} still degenerate after jitter; using last cast");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{box_mesh, icosphere};

    #[test]
    fn full_cube_fills_every_cell() {
        let spec = GridSpec::new(4).unwrap();
        let occ = voxelize(&box_mesh([-0.5; 3], [0.5; 3]), &spec).unwrap();
        assert_eq!(occ.count(), 64);
    }

    #[test]
    fn lower_slab_leaves_upper_half_empty() {
        let spec = GridSpec::new(8).unwrap();
        let occ = voxelize(&box_mesh([-0.5, -0.5, -0.5], [0.5, 0.5, 0.0]), &spec).unwrap();
        assert_eq!(occ.count(), 8 * 8 * 4);
        for i in 0..spec.len() {
            if spec.coords(i)[2] >= 4 {
                assert!(!occ.get(i));
            }
        }
    }

    #[test]
    fn sphere_cell_count_matches_volume() {
        let spec = GridSpec::new(32).unwrap();
        let occ = voxelize(&icosphere([0.0; 3], 0.4, 5), &spec).unwrap();
        let expected = 4.0 / 3.0 * std::f64::consts::PI * 0.4f64.powi(3) / spec.cell_volume();
        let rel = (occ.count() as f64 - expected).abs() / expected;
        assert!(rel < 0.02, "count {} vs {expected:.1} ({rel:.4})", occ.count());
    }

    #[test]
    fn winding_does_not_matter() {
        let spec = GridSpec::new(16).unwrap();
        let m = icosphere([0.05, -0.02, 0.03], 0.33, 3);
        let a = voxelize(&m, &spec).unwrap();
        let b = voxelize(&m.inverted(), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn open_mesh_rejected() {
        let spec = GridSpec::new(8).unwrap();
        let mut m = box_mesh([-0.3; 3], [0.3; 3]);
        m.triangles.pop();
        assert!(matches!(voxelize(&m, &spec), Err(Error::NonWatertight { .. })));
    }

    #[test]
    fn tiny_mesh_between_centers_is_empty() {
        let spec = GridSpec::new(4).unwrap();
        let m = box_mesh([0.01; 3], [0.02; 3]);
        assert!(matches!(voxelize(&m, &spec), Err(Error::EmptyResult)));
    }

    #[test]
    fn degenerate_triangles_rejected() {
        let spec = GridSpec::new(8).unwrap();
        let mut m = box_mesh([-0.3; 3], [0.3; 3]);
        // Two zero-area triangles sharing their three edges pairwise.
        let base = m.vertices.len() as u32;
        m.vertices.extend([[0.0; 3], [0.1, 0.0, 0.0], [0.2, 0.0, 0.0]]);
        m.triangles.extend([[base, base + 1, base + 2], [base + 2, base + 1, base]]);
        assert!(matches!(voxelize(&m, &spec), Err(Error::DegenerateMesh { count: 2, .. })));
        let ok = voxelize_with(&m, &spec, &VoxelizeOptions { max_degenerate: 2 });
        assert!(ok.is_ok());
    }
}
