//! Wavefront OBJ, vertices and faces only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// Nine significant digits per coordinate.
pub fn encode_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(40 * (mesh.vertices.len() + mesh.triangles.len()));
    for v in &mesh.vertices {
        out.push_str(&format!("v {:.8e} {:.8e} {:.8e}\n", v[0], v[1], v[2]));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError { line, message: message.into() }
}

/// Parses `v` and `f` records. Polygons are fan-triangulated; texture and
/// normal references are dropped. Negative indices count back from the
/// latest vertex.
pub fn decode_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| parse_error(line_no, format!("bad coordinate {t:?}: {e}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(parse_error(line_no, "vertex needs three coordinates"));
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let mut face = Vec::new();
                for t in tokens {
                    let head = t.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|e| parse_error(line_no, format!("bad index {t:?}: {e}")))?;
                    let resolved = match idx {
                        0 => return Err(parse_error(line_no, "face indices are 1-based")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(parse_error(line_no, format!("index {idx} out of range")));
                    }
                    face.push(resolved as u32);
                }
                if face.len() < 3 {
                    return Err(parse_error(line_no, "face needs at least three vertices"));
                }
                for i in 1..face.len() - 1 {
                    triangles.push([face[0], face[i], face[i + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles)
}

pub fn write_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    fs::write(path, encode_obj(mesh))?;
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    decode_obj(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_triangle_lines() {
        let mesh = TriangleMesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let text = encode_obj(&mesh);
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
        assert!(text.contains("f 1 2 3"));
    }

    #[test]
    fn zero_index_is_rejected_with_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n";
        match decode_obj(text) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quads_normals_and_negative_indices() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2/1/1 3/1/1 4/1/1\nf -4 -3 -1\n";
        let mesh = decode_obj(text).unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3], [0, 1, 3]]);
    }

    #[test]
    fn bad_coordinate_reports_line() {
        assert!(matches!(decode_obj("v 0 0\n"), Err(Error::ParseError { line: 1, .. })));
        assert!(matches!(decode_obj("v 0 0 0\nv a 0 0\n"), Err(Error::ParseError { line: 2, .. })));
        assert!(matches!(decode_obj("v 0 0 0\nf 1 2 3\n"), Err(Error::ParseError { line: 2, .. })));
    }
}
