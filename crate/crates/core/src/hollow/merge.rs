//! Combining the outer and inverted inner shells, with a mandatory audit
//! for triangle-triangle contacts between them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{cross, dot, norm, sub, TriangleMesh, Vec3};

/// Triangles closer than this (world units) count as intersecting.
pub const INTERSECTION_EPS: f64 = 1e-9;

/// Concatenates both shells after checking that no outer triangle touches
/// an inner one. `inner` is expected to be inverted already.
pub fn merge(outer: &TriangleMesh, inner: &TriangleMesh) -> Result<TriangleMesh> {
    if inner.is_empty() {
        return Ok(outer.clone());
    }
    if let Some((o, i)) = find_shell_intersection(outer, inner, INTERSECTION_EPS) {
        return Err(Error::ShellIntersection { outer: o, inner: i });
    }
    let mut merged = outer.clone();
    merged.append(inner);
    Ok(merged)
}

fn tri_bounds(t: &[Vec3; 3], pad: f64) -> (Vec3, Vec3) {
    let mut lo = t[0];
    let mut hi = t[0];
    for p in &t[1..] {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    for a in 0..3 {
        lo[a] -= pad;
        hi[a] += pad;
    }
    (lo, hi)
}

/// First `(outer, inner)` triangle pair, in outer-index order, whose
/// separation is below `eps`.
pub fn find_shell_intersection(outer: &TriangleMesh, inner: &TriangleMesh, eps: f64) -> Option<(usize, usize)> {
    if outer.is_empty() || inner.is_empty() {
        return None;
    }
    let inner_boxes: Vec<(Vec3, Vec3)> =
        (0..inner.triangles.len()).map(|t| tri_bounds(&inner.triangle(t), eps)).collect();
    let extent: f64 = inner_boxes
        .iter()
        .map(|(lo, hi)| (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max))
        .sum::<f64>()
        / inner_boxes.len() as f64;
    let bucket = (2.0 * extent).max(1e-6);
    let key = |v: f64| (v / bucket).floor() as i64;

    let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (t, (lo, hi)) in inner_boxes.iter().enumerate() {
        for z in key(lo[2])..=key(hi[2]) {
            for y in key(lo[1])..=key(hi[1]) {
                for x in key(lo[0])..=key(hi[0]) {
                    buckets.entry((x, y, z)).or_default().push(t as u32);
                }
            }
        }
    }

    let mut candidates = Vec::new();
    for o in 0..outer.triangles.len() {
        let tri_o = outer.triangle(o);
        let (lo, hi) = tri_bounds(&tri_o, eps);
        candidates.clear();
        for z in key(lo[2])..=key(hi[2]) {
            for y in key(lo[1])..=key(hi[1]) {
                for x in key(lo[0])..=key(hi[0]) {
                    if let Some(list) = buckets.get(&(x, y, z)) {
                        candidates.extend_from_slice(list);
                    }
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for &i in &candidates {
            let (ilo, ihi) = inner_boxes[i as usize];
            let overlap = (0..3).all(|a| lo[a] <= ihi[a] && ilo[a] <= hi[a]);
            if overlap && triangles_intersect(&tri_o, &inner.triangle(i as usize), eps) {
                return Some((o, i as usize));
            }
        }
    }
    None
}

/// Separating-axis test between two triangles. Returns true unless some axis
/// separates their projections by more than `eps`.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3], eps: f64) -> bool {
    let ea = [sub(a[1], a[0]), sub(a[2], a[1]), sub(a[0], a[2])];
    let eb = [sub(b[1], b[0]), sub(b[2], b[1]), sub(b[0], b[2])];
    let na = cross(ea[0], ea[1]);
    let nb = cross(eb[0], eb[1]);

    let mut axes: Vec<Vec3> = Vec::with_capacity(17);
    axes.push(na);
    axes.push(nb);
    for u in &ea {
        for v in &eb {
            axes.push(cross(*u, *v));
        }
    }
    for e in &ea {
        axes.push(cross(na, *e));
    }
    for e in &eb {
        axes.push(cross(nb, *e));
    }

    let scale = ea.iter().chain(eb.iter()).map(|e| norm(*e)).fold(0.0, f64::max);
    let tiny = 1e-12 * scale * scale;
    for axis in axes {
        let len = norm(axis);
        if len <= tiny {
            continue;
        }
        let project = |t: &[Vec3; 3]| {
            let p = [dot(t[0], axis), dot(t[1], axis), dot(t[2], axis)];
            (p[0].min(p[1]).min(p[2]), p[0].max(p[1]).max(p[2]))
        };
        let (amin, amax) = project(a);
        let (bmin, bmax) = project(b);
        let gap = (bmin - amax).max(amin - bmax) / len;
        if gap > eps {
            return false;
        }
    }
    true
}
