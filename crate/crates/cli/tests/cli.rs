use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hollowfield::field::DensityField;
use hollowfield::fixtures::Fixture;
use hollowfield::grid::GridSpec;
use hollowfield::io::{write_grid, write_obj};
use hollowfield::masks::derive_masks;
use hollowfield::mesh::{box_mesh, TriangleMesh};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hollowfield")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }
    fn at(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

#[test]
fn voxelize_cube_at_defaults() {
    let d = Dir::new();
    let mesh = d.at("cube.obj");
    write_obj(&box_mesh([-1.0; 3], [1.0; 3]), &mesh).unwrap();
    let grid = d.at("cube.dfd");
    let summary = d.at("cube.json");
    let v = ok_json(&["voxelize", p(&mesh), "-o", p(&grid), "--summary", p(&summary)]);
    assert_eq!(v["resolution"], 64);
    assert_eq!(v["occupied"], 64 * 64 * 64);
    assert_eq!(v["interior"], 62 * 62 * 62);
    assert_eq!(std::fs::metadata(&grid).unwrap().len(), 16 + 5 * 64 * 64 * 64);
    assert!(summary.is_file());
}

#[test]
fn voxelize_errors_map_to_exit_codes() {
    let d = Dir::new();
    let mut open = box_mesh([-1.0; 3], [1.0; 3]);
    open.triangles.pop();
    let mesh = d.at("open.obj");
    write_obj(&open, &mesh).unwrap();
    let (c, err) = code(&["voxelize", p(&mesh), "-o", p(&d.at("g.dfd"))]);
    assert_eq!(c, 2);
    assert!(err.contains("not watertight"), "{err}");

    let (c, _) = code(&["voxelize", p(&d.at("missing.obj")), "-o", p(&d.at("g.dfd"))]);
    assert_eq!(c, 3);
}

fn fixture_grid(d: &Dir, fixture: &str, n: &str) -> PathBuf {
    let grid = d.at(&format!("{fixture}.dfd"));
    ok_json(&["voxelize", "--fixture", fixture, "--resolution", n, "-o", p(&grid)]);
    grid
}

#[test]
fn optimize_writes_grid_and_trace() {
    let d = Dir::new();
    let grid = fixture_grid(&d, "cube", "12");
    let out = d.at("opt.dfd");
    let trace = d.at("trace.jsonl");
    let last = ok_json(&["optimize", p(&grid), "-o", p(&out), "--trace", p(&trace), "--steps", "20", "--log-interval", "5"]);
    assert_eq!(last["step"], 20);
    let lines: Vec<Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.iter().map(|l| l["step"].as_u64().unwrap()).collect::<Vec<_>>(), vec![0, 5, 10, 15, 20]);
    assert!(out.is_file());

    let zero = ok_json(&["optimize", p(&grid), "-o", p(&out), "--steps", "3", "--lambda-mass", "0"]);
    let (l_total, l_phy, l_mass) = (zero["l_total"].as_f64().unwrap(), zero["l_center"].as_f64().unwrap()
        + zero["l_region"].as_f64().unwrap()
        + zero["l_z"].as_f64().unwrap(), zero["l_mass"].as_f64().unwrap());
    assert!(l_mass > 0.0);
    assert!((l_total - l_phy).abs() < 1e-12);

    let (c, _) = code(&["optimize", p(&grid), "-o", p(&out), "--steps", "0"]);
    assert_eq!(c, 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = Dir::new();
    let grid = fixture_grid(&d, "cube", "10");
    let cfg = d.at("cfg.json");
    std::fs::write(&cfg, r#"{"steps": 4, "log_interval": 2}"#).unwrap();
    let last = ok_json(&["optimize", p(&grid), "-o", p(&d.at("o.dfd")), "--config", p(&cfg)]);
    assert_eq!(last["step"], 4);
    let last = ok_json(&["optimize", p(&grid), "-o", p(&d.at("o.dfd")), "--config", p(&cfg), "--steps", "6"]);
    assert_eq!(last["step"], 6);

    std::fs::write(&cfg, "{ not json").unwrap();
    let (c, _) = code(&["optimize", p(&grid), "-o", p(&d.at("o.dfd")), "--config", p(&cfg)]);
    assert_eq!(c, 2);
}

#[test]
fn hollow_solid_and_optimized_grids() {
    let d = Dir::new();
    let column = fixture_grid(&d, "column", "32");
    let r = ok_json(&["hollow", p(&column), "-o", p(&d.at("column.stl"))]);
    assert_eq!(r["hollow_cells"], 0);
    assert_eq!(r["inner_triangles"], 0);

    let cube = fixture_grid(&d, "cube", "16");
    let opt = d.at("cube_opt.dfd");
    ok_json(&["optimize", p(&cube), "-o", p(&opt), "--steps", "50"]);
    let r = ok_json(&["hollow", p(&opt), "-o", p(&d.at("cube.obj")), "--outer", p(&d.at("outer.stl"))]);
    assert!(r["cavity_volume"].as_f64().unwrap() > 0.0);
    assert!(d.at("cube.obj").is_file() && d.at("outer.stl").is_file());
}

#[test]
fn hollow_rejects_intersecting_shells() {
    let d = Dir::new();
    write_obj(&box_mesh([-0.5; 3], [0.5; 3]), &d.at("a.obj")).unwrap();
    write_obj(&box_mesh([0.0; 3], [0.8; 3]), &d.at("b.obj")).unwrap();
    let (c, err) = code(&[
        "hollow",
        "--outer-mesh",
        p(&d.at("a.obj")),
        "--inner-mesh",
        p(&d.at("b.obj")),
        "-o",
        p(&d.at("m.stl")),
    ]);
    assert_eq!(c, 2);
    assert!(err.contains("intersects"), "{err}");

    write_obj(&box_mesh([-0.2; 3], [0.2; 3]), &d.at("c.obj")).unwrap();
    let r = ok_json(&["hollow", "--outer-mesh", p(&d.at("a.obj")), "--inner-mesh", p(&d.at("c.obj")), "-o", p(&d.at("m.stl"))]);
    assert!((r["net_volume"].as_f64().unwrap() - (1.0 - 0.064)).abs() < 1e-12);
}

#[test]
fn stability_reports() {
    let d = Dir::new();
    write_obj(&box_mesh([-0.5; 3], [0.5; 3]), &d.at("cube.obj")).unwrap();
    let r = ok_json(&["stability", p(&d.at("cube.obj")), "--resolution", "16", "--inflate-half-cell"]);
    assert_eq!(r["stable"], true);
    assert!((r["critical_tilt_deg"].as_f64().unwrap() - 45.0).abs() < 1e-9);
    for key in ["mass", "com", "hull", "stable", "margin", "critical_tilt_deg", "inertia"] {
        assert!(r.get(key).is_some(), "{key}");
    }

    let r = ok_json(&["stability", "--fixture", "lshape", "--resolution", "32"]);
    assert_eq!(r["stable"], false);
    assert!(r["margin"].as_f64().unwrap() < 0.0);
    assert!(r["rot_deg"].as_f64().unwrap() > 0.0);

    // A design with every logit saturated low has no solid cell at all.
    let spec = GridSpec::new(8).unwrap();
    let masks = derive_masks(&Fixture::Cube.occupancy(spec).unwrap(), 2).unwrap();
    let field = DensityField::new(spec, vec![-8.0; spec.len()], 8.0).unwrap();
    write_grid(&field, &masks, &d.at("empty.dfd")).unwrap();
    let (c, err) = code(&["stability", p(&d.at("empty.dfd"))]);
    assert_eq!(c, 2, "{err}");
    let r = ok_json(&["stability", p(&d.at("empty.dfd")), "--solid"]);
    assert_eq!(r["stable"], true);
}

#[test]
fn metrics_identity_and_empty() {
    let d = Dir::new();
    write_obj(&box_mesh([-0.3; 3], [0.3; 3]), &d.at("a.obj")).unwrap();
    let r = ok_json(&["metrics", p(&d.at("a.obj")), p(&d.at("a.obj")), "--samples", "5000"]);
    assert_eq!(r["chamfer"], 0.0);
    assert_eq!(r["f_score"], 1.0);
    assert_eq!(r["threshold"], 0.01);

    let empty = TriangleMesh::new(vec![[0.0; 3]], vec![]).unwrap();
    write_obj(&empty, &d.at("e.obj")).unwrap();
    let (c, _) = code(&["metrics", p(&d.at("a.obj")), p(&d.at("e.obj"))]);
    assert_eq!(c, 2);
}

#[test]
fn sweep_single_value_gives_one_row() {
    let out = run(&[
        "sweep", "--fixture", "mushroom", "--resolution", "12", "--param", "lambda_mass", "--values", "10", "--steps", "10",
        "--samples", "500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("param,value,mass"));
    assert!(lines[1].starts_with("lambda_mass,10"));

    let (c, _) = code(&["sweep", "--fixture", "cube", "--param", "sharpness", "--values", "1"]);
    assert_eq!(c, 2);
}

#[test]
fn pipeline_runs_and_skips_hollow() {
    let d = Dir::new();
    let mesh = d.at("mushroom.obj");
    write_obj(&Fixture::Mushroom.mesh(GridSpec::new(16).unwrap()).unwrap(), &mesh).unwrap();
    let out = d.at("run");
    let m = ok_json(&[
        "pipeline", p(&mesh), "--no-normalize", "--resolution", "16", "--steps", "30", "--samples", "2000", "-o", p(&out),
    ]);
    assert_eq!(m["input"]["kind"], "mesh");
    for name in ["hollow.stl", "outer.stl", "stability.json", "fidelity.json", "optimized.dfd", "manifest.json"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let fidelity: Value = serde_json::from_str(&std::fs::read_to_string(out.join("fidelity.json")).unwrap()).unwrap();
    assert!(fidelity["chamfer"].as_f64().unwrap() < 0.01);

    let skip = d.at("skip");
    ok_json(&["pipeline", "--fixture", "cube", "--resolution", "12", "--steps", "5", "--skip-hollow", "-o", p(&skip)]);
    assert!(skip.join("optimized.dfd").is_file());
    assert!(!skip.join("hollow.stl").exists());

    let cfg = d.at("bad.json");
    std::fs::write(&cfg, r#"{"steps": "many"}"#).unwrap();
    let (c, _) = code(&["pipeline", "--fixture", "cube", "--config", p(&cfg), "-o", p(&d.at("bad"))]);
    assert_eq!(c, 2);
    assert!(!d.at("bad").exists());
}
