//! Material and geometric-fidelity metrics: mass, Chamfer distance and
//! F-score between sampled surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hollow::RegionSplit;
use crate::mesh::{TriangleMesh, Vec3};

pub const DEFAULT_TAU: f64 = 0.01;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SAMPLE_SEED: u64 = 42;

/// Area-weighted uniform surface samples.
pub fn surface_sample(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        total += mesh.area(t);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        let [a, b, c] = mesh.triangle(t);
        let s = rng.gen::<f64>().sqrt();
        let r2 = rng.gen::<f64>();
        let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
        out.push([
            u * a[0] + v * b[0] + w * c[0],
            u * a[1] + v * b[1] + w * c[1],
            u * a[2] + v * b[2] + w * c[2],
        ]);
    }
    Ok(out)
}

#[inline]
fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

const LEAF_SIZE: usize = 8;

/// Static kd-tree stored as a permuted point array. Each subtree is a
/// contiguous range whose median element splits it on `axes[mid]`.
pub struct KdTree {
    points: Vec<Vec3>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut pts = points.to_vec();
        let mut axes = vec![0u8; pts.len()];
        Self::build(&mut pts, &mut axes);
        Self { points: pts, axes }
    }

    fn build(pts: &mut [Vec3], axes: &mut [u8]) {
        if pts.len() <= LEAF_SIZE {
            return;
        }
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in pts.iter() {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        let mid = pts.len() / 2;
        pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
        axes[mid] = axis as u8;
        let (left, rest) = pts.split_at_mut(mid);
        let (left_axes, rest_axes) = axes.split_at_mut(mid);
        Self::build(left, left_axes);
        Self::build(&mut rest[1..], &mut rest_axes[1..]);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Euclidean distance from `q` to its nearest stored point.
    pub fn nearest_distance(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, self.points.len(), q, &mut best);
        best.sqrt()
    }

    fn search(&self, lo: usize, hi: usize, q: &Vec3, best: &mut f64) {
        if hi - lo <= LEAF_SIZE {
            for p in &self.points[lo..hi] {
                *best = best.min(dist2(p, q));
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = self.axes[mid] as usize;
        *best = best.min(dist2(&self.points[mid], q));
        let diff = q[axis] - self.points[mid][axis];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, best);
        if diff * diff <= *best {
            self.search(far.0, far.1, q, best);
        }
    }
}

fn nearest_distances(from: &[Vec3], to: &[Vec3]) -> Vec<f64> {
    let tree = KdTree::new(to);
    from.par_iter().map(|p| tree.nearest_distance(p)).collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn check_sets(a: &[Vec3], b: &[Vec3]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Symmetric Chamfer distance: half the sum of both mean nearest-neighbor
/// distances.
pub fn chamfer_distance(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    check_sets(a, b)?;
    Ok(0.5 * (mean(&nearest_distances(a, b)) + mean(&nearest_distances(b, a))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FScore {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

fn within(distances: &[f64], tau: f64) -> f64 {
    distances.iter().filter(|&&d| d <= tau).count() as f64 / distances.len() as f64
}

fn harmonic(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn f_score(a: &[Vec3], b: &[Vec3], tau: f64) -> Result<FScore> {
    check_sets(a, b)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig("tau must be positive".into()));
    }
    let precision = within(&nearest_distances(a, b), tau);
    let recall = within(&nearest_distances(b, a), tau);
    Ok(FScore { precision, recall, f_score: harmonic(precision, recall) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport {
    pub chamfer: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub sample_count: usize,
    pub threshold: f64,
    pub seed: u64,
}

/// Chamfer distance and F-score between two meshes. Both meshes are sampled
/// with the same seed.
pub fn mesh_fidelity(a: &TriangleMesh, b: &TriangleMesh, samples: usize, tau: f64, seed: u64) -> Result<FidelityReport> {
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig("tau must be positive".into()));
    }
    let pa = surface_sample(a, samples, seed)?;
    let pb = surface_sample(b, samples, seed)?;
    let ab = nearest_distances(&pa, &pb);
    let ba = nearest_distances(&pb, &pa);
    let precision = within(&ab, tau);
    let recall = within(&ba, tau);
    Ok(FidelityReport {
        chamfer: 0.5 * (mean(&ab) + mean(&ba)),
        f_score: harmonic(precision, recall),
        precision,
        recall,
        sample_count: samples,
        threshold: tau,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialMass {
    /// Cells with `rho~ > 0.5` times the cell volume.
    pub hard: f64,
    /// Density-weighted volume.
    pub soft: f64,
}

pub fn material_mass(rho_t: &[f64], spec: &GridSpec) -> MaterialMass {
    let dv = spec.cell_volume();
    let hard = rho_t.iter().filter(|&&r| r > 0.5).count() as f64 * dv;
    let soft = rho_t.iter().sum::<f64>() * dv;
    MaterialMass { hard, soft }
}

pub fn split_mass(split: &RegionSplit, spec: &GridSpec) -> f64 {
    split.solid_count() as f64 * spec.cell_volume()
}

/// One row of a parameter sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub mass: f64,
    pub soft_mass: f64,
    pub stable: bool,
    pub critical_tilt_deg: Option<f64>,
    pub rot_deg: f64,
    pub com_z: f64,
    pub hollow_components: usize,
    pub chamfer: Option<f64>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
