use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CHAIR: &str = "\
; seat, back and four legs
(program
  (block (draw chair_seat -0.5 0 -0.5 1 0.1 1 0))
  (block (draw chair_back -0.5 0.1 -0.5 1 1 0.1 0))
  (block (for 2 trans 0.9 0 0 (draw chair_leg -0.45 0 -0.45 -0.45 -1 -0.45 0.04)))
  (block (for 2 trans 0.9 0 0 (draw chair_leg -0.45 0 0.45 -0.45 -1 0.45 0.04))))
";

fn shapeprog(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeprog"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("chair.sp"), CHAIR).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn render_writes_exactly_the_requested_points() {
    let dir = setup();
    let o = shapeprog(dir.path(), &["render", "chair.sp", "--points", "5000", "--out", "chair.xyz"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("chair.xyz")).unwrap();
    assert_eq!(text.lines().count(), 5000);

    let o = shapeprog(dir.path(), &["render", "chair.sp", "--points", "300", "--out", "chair.ply"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("chair.ply")).unwrap();
    assert!(text.contains("element vertex 300\n"));
}

#[test]
fn render_is_deterministic() {
    let dir = setup();
    shapeprog(dir.path(), &["render", "chair.sp", "--points", "500", "--seed", "9", "--out", "a.xyz"]);
    shapeprog(dir.path(), &["render", "chair.sp", "--points", "500", "--seed", "9", "--out", "b.xyz"]);
    assert_eq!(fs::read(dir.path().join("a.xyz")).unwrap(), fs::read(dir.path().join("b.xyz")).unwrap());
}

#[test]
fn coverage_of_own_render_is_zero() {
    let dir = setup();
    shapeprog(dir.path(), &["render", "chair.sp", "--points", "5000", "--out", "t.xyz"]);
    let o = shapeprog(
        dir.path(),
        &["loss", "--program", "chair.sp", "--target", "t.xyz", "--loss", "coverage"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.000000");

    let o = shapeprog(
        dir.path(),
        &["loss", "--program", "chair.sp", "--target", "t.xyz", "--loss", "coverage", "--full-precision"],
    );
    assert!(stdout(&o).trim().parse::<f64>().unwrap() < 1e-9);
}

#[test]
fn chamfer_against_own_render_with_same_seed_is_zero() {
    let dir = setup();
    shapeprog(dir.path(), &["render", "chair.sp", "--points", "800", "--seed", "4", "--out", "t.ply"]);
    let o = shapeprog(
        dir.path(),
        &["loss", "--program", "chair.sp", "--target", "t.ply", "--points", "800", "--seed", "4", "--full-precision"],
    );
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn gradcheck_passes_and_writes_report() {
    let dir = setup();
    fs::write(dir.path().join("t.xyz"), "0.1 0.2 0.3\n-0.6 0.5 0.1\n0.3 -0.8 0.7\n0.9 0.9 -0.2\n").unwrap();
    for loss in ["chamfer", "coverage"] {
        let o = shapeprog(
            dir.path(),
            &[
                "gradcheck", "--program", "chair.sp", "--target", "t.xyz", "--loss", loss, "--points", "400", "--json",
                "report.json",
            ],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report["slots"].as_array().unwrap().len(), 4 * 7 + 2 * 3);
    }
}

#[test]
fn fit_writes_program_and_trace() {
    let dir = setup();
    shapeprog(dir.path(), &["render", "chair.sp", "--points", "400", "--out", "t.xyz"]);
    let o = shapeprog(
        dir.path(),
        &[
            "fit", "--program", "chair.sp", "--target", "t.xyz", "--points", "400", "--steps", "5", "--out", "fit.sp",
            "--trace", "trace.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fitted = fs::read_to_string(dir.path().join("fit.sp")).unwrap();
    assert!(fitted.starts_with("(program"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("step,loss"));
    assert_eq!(trace.lines().count(), 6);
}

#[test]
fn compile_and_voxelize() {
    let dir = setup();
    let o = shapeprog(dir.path(), &["compile", "chair.sp"]);
    assert_eq!(o.status.code(), Some(0));
    let set: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(set["primitives"].as_array().map(Vec::len), Some(6));

    let o = shapeprog(dir.path(), &["voxelize", "chair.sp", "--dim", "32", "--out", "chair.binvox"]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = fs::read(dir.path().join("chair.binvox")).unwrap();
    let grid = shapeprog::io::read_binvox(&bytes).unwrap();
    assert_eq!(grid.dim, 32);
    assert!(grid.count_occupied() > 0);
}

#[test]
fn exit_codes() {
    let dir = setup();
    fs::write(dir.path().join("bad.sp"), "(program (block (draw cuboid 1 2)))").unwrap();
    fs::write(dir.path().join("t.xyz"), "0 0 0\n").unwrap();
    fs::write(dir.path().join("broken.xyz"), "0 0\n").unwrap();

    assert_eq!(shapeprog(dir.path(), &["render"]).status.code(), Some(1));
    assert_eq!(shapeprog(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(shapeprog(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(shapeprog(dir.path(), &["compile", "bad.sp"]).status.code(), Some(2));
    assert_eq!(shapeprog(dir.path(), &["compile", "missing.sp"]).status.code(), Some(2));
    assert_eq!(
        shapeprog(dir.path(), &["loss", "--program", "chair.sp", "--target", "broken.xyz"]).status.code(),
        Some(2)
    );
    assert_eq!(
        shapeprog(dir.path(), &["gradcheck", "--program", "chair.sp", "--target", "t.xyz", "--h", "0"]).status.code(),
        Some(1)
    );
}

#[test]
fn obj_targets_are_sampled() {
    let dir = setup();
    fs::write(
        dir.path().join("quad.obj"),
        "v -0.5 0 -0.5\nv 0.5 0 -0.5\nv 0.5 0 0.5\nv -0.5 0 0.5\nf 1 2 3 4\n",
    )
    .unwrap();
    let o = shapeprog(
        dir.path(),
        &["loss", "--program", "chair.sp", "--target", "quad.obj", "--loss", "coverage", "--points", "200"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).trim().parse::<f64>().unwrap() < 1e-9);
}
