use hollowfield::field::DensityField;
use hollowfield::fixtures::Fixture;
use hollowfield::grid::GridSpec;
use hollowfield::io::{dfd, obj, read_grid, read_obj, read_stl, stl, write_grid, write_obj, write_stl};
use hollowfield::masks::{CellClass, DomainMasks};
use hollowfield::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn stl_round_trip_of_extracted_shell_is_bitwise() {
    let spec = GridSpec::new(32).unwrap();
    let mesh = Fixture::Cube.mesh(spec).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cube.stl");
    write_stl(&mesh, &path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 84 + 50 * mesh.triangles.len() as u64);
    let back = read_stl(&path).unwrap();
    assert_eq!(back.triangles.len(), mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let (a, b) = (mesh.triangle(t), back.triangle(t));
        for k in 0..3 {
            for c in 0..3 {
                assert_eq!(a[k][c].to_bits(), b[k][c].to_bits());
            }
        }
    }
    assert!(back.edge_audit().is_closed_manifold(), "welding restores shared vertices");
    assert_eq!(stl::encode_stl(&back), stl::encode_stl(&mesh));
}

#[test]
fn obj_round_trip_within_print_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mesh = hollowfield::mesh::icosphere([0.01, -0.02, 0.03], 0.37, 2);
    for v in &mut mesh.vertices {
        for c in v.iter_mut() {
            *c += rng.gen_range(-1e-3..1e-3);
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("sphere.obj");
    write_obj(&mesh, &path).unwrap();
    let back = read_obj(&path).unwrap();
    assert_eq!(back.triangles, mesh.triangles);
    for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
        for c in 0..3 {
            assert!((a[c] - b[c]).abs() <= 1e-9, "{} vs {}", a[c], b[c]);
        }
    }
    assert!(obj::encode_obj(&back).lines().all(|l| l.starts_with("v ") || l.starts_with("f ")));
}

fn random_grid(n: usize, seed: u64) -> (DensityField, DomainMasks) {
    let spec = GridSpec::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = (0..spec.len()).map(|_| rng.gen_range(-10.0f32..10.0) as f64).collect();
    let mut classes: Vec<CellClass> = (0..spec.len())
        .map(|_| CellClass::from_u8(rng.gen_range(0..4)).unwrap())
        .collect();
    classes[0] = CellClass::Boundary;
    let masks = DomainMasks::from_classes(spec, classes).unwrap();
    (DensityField::new(spec, theta, 8.0).unwrap(), masks)
}

#[test]
fn grid_round_trip_is_bitwise() {
    let (field, masks) = random_grid(8, 17);
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("g.dfd");
    write_grid(&field, &masks, &path).unwrap();
    let back = read_grid(&path).unwrap();
    assert_eq!(back.masks, masks);
    assert_eq!(back.field.theta_sat().to_bits(), field.theta_sat().to_bits());
    for (a, b) in field.theta().iter().zip(back.field.theta()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 5 * 512);
}

#[test]
fn grid_header_errors() {
    let (field, masks) = random_grid(6, 2);
    let bytes = dfd::encode_grid(&field, &masks).unwrap();

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(dfd::decode_grid(&bad_magic), Err(Error::BadMagic)));

    let mut bad_version = bytes.clone();
    bad_version[4..8].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(dfd::decode_grid(&bad_version), Err(Error::BadVersion(2))));

    let mut wrong_n = bytes.clone();
    wrong_n[8..12].copy_from_slice(&7u32.to_le_bytes());
    assert!(matches!(dfd::decode_grid(&wrong_n), Err(Error::SizeMismatch { .. })));
    assert!(matches!(dfd::decode_grid(&bytes[..bytes.len() - 3]), Err(Error::SizeMismatch { .. })));
}
