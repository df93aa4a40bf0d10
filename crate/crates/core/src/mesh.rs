//! Indexed triangle meshes.
//!
//! Winding is counter-clockwise when viewed from outside, so a closed mesh
//! with outward normals has positive signed volume.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

/// Result of an edge-manifold audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeAudit {
    pub edges: usize,
    /// Undirected edges used by a number of triangles other than two.
    pub bad_edges: usize,
    /// Directed edges used more than once (inconsistent winding).
    pub misoriented: usize,
}

impl EdgeAudit {
    pub fn is_closed_manifold(&self) -> bool {
        self.bad_edges == 0 && self.misoriented == 0
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len() as u64;
        if triangles.iter().flatten().any(|&i| i as u64 >= n) {
            return Err(Error::MalformedFile("triangle index out of range".into()));
        }
        Ok(Self { vertices, triangles })
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    /// Unnormalized normal, twice the area in length.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        cross(sub(b, a), sub(c, a))
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * norm(self.face_normal(t))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Signed enclosed volume via the divergence theorem.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        Some((lo, hi))
    }

    pub fn edge_audit(&self) -> EdgeAudit {
        let mut undirected: HashMap<(u32, u32), u32> = HashMap::new();
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        EdgeAudit {
            edges: undirected.len(),
            bad_edges: undirected.values().filter(|&&c| c != 2).count(),
            misoriented: directed.values().filter(|&&c| c > 1).count(),
        }
    }

    pub fn check_watertight(&self) -> Result<()> {
        let audit = self.edge_audit();
        if audit.is_closed_manifold() {
            Ok(())
        } else {
            Err(Error::NonWatertight { open_edges: audit.bad_edges + audit.misoriented })
        }
    }

    /// `V - E + F` over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for &i in self.triangles.iter().flatten() {
            used[i as usize] = true;
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edge_audit().edges as i64 + self.triangles.len() as i64
    }

    pub fn degenerate_count(&self) -> usize {
        (0..self.triangles.len()).filter(|&t| self.area(t) == 0.0).count()
    }

    /// Drops zero-area triangles.
    pub fn remove_degenerate(&mut self) -> usize {
        let before = self.triangles.len();
        let keep: Vec<[u32; 3]> = (0..before)
            .filter(|&t| self.area(t) > 0.0)
            .map(|t| self.triangles[t])
            .collect();
        self.triangles = keep;
        before - self.triangles.len()
    }

    /// Merges vertices with bit-identical coordinates.
    pub fn weld(&mut self) {
        let mut map: HashMap<[u64; 3], u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let key = v.map(|c| if c == 0.0 { 0 } else { c.to_bits() });
            let id = *map.entry(key).or_insert_with(|| {
                vertices.push(*v);
                (vertices.len() - 1) as u32
            });
            remap.push(id);
        }
        for tri in &mut self.triangles {
            *tri = tri.map(|i| remap[i as usize]);
        }
        self.vertices = vertices;
    }

    /// Reverses every triangle's winding.
    pub fn inverted(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            triangles: self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    /// Centers the bounding box at the origin and scales uniformly so the
    /// longest side spans `[-0.5, 0.5]`.
    pub fn normalize_to_unit_cube(&mut self) -> Result<()> {
        let (lo, hi) = self.bounds().ok_or(Error::EmptyMesh)?;
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        if !(extent > 0.0) {
            return Err(Error::DegenerateMesh { count: self.triangles.len(), tolerance: 0 });
        }
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, (lo[2] + hi[2]) / 2.0];
        for v in &mut self.vertices {
            for a in 0..3 {
                v[a] = (v[a] - mid[a]) / extent;
            }
        }
        Ok(())
    }

    /// Appends `other`, rebasing its indices.
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }
}

/// Axis-aligned box with outward winding, two triangles per face.
pub fn box_mesh(lo: Vec3, hi: Vec3) -> TriangleMesh {
    let v = |i: usize| -> Vec3 {
        [
            if i & 1 == 0 { lo[0] } else { hi[0] },
            if i & 2 == 0 { lo[1] } else { hi[1] },
            if i & 4 == 0 { lo[2] } else { hi[2] },
        ]
    };
    let vertices = (0..8).map(v).collect();
    #[rustfmt::skip]
    let triangles = vec![
        [0, 2, 3], [0, 3, 1], // -z
        [4, 5, 7], [4, 7, 6], // +z
        [0, 1, 5], [0, 5, 4], // -y
        [2, 6, 7], [2, 7, 3], // +y
        [0, 4, 6], [0, 6, 2], // -x
        [1, 3, 7], [1, 7, 5], // +x
    ];
    TriangleMesh { vertices, triangles }
}

/// Icosphere obtained by repeated midpoint subdivision of an icosahedron.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = vec![
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let unit = |v: Vec3| {
        let l = norm(v);
        [v[0] / l, v[1] / l, v[2] / l]
    };
    for v in &mut verts {
        *v = unit(*v);
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a as usize], verts[b as usize]);
                verts.push(unit([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts
        .into_iter()
        .map(|v| [center[0] + radius * v[0], center[1] + radius * v[1], center[2] + radius * v[2]])
        .collect();
    TriangleMesh { vertices, triangles: faces }
}
