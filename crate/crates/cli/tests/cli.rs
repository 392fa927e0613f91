use std::path::Path;
use std::process::{Command, Output};

use polyexp::bench::{read_csv, Method, CSV_HEADER};
use polyexp::field::{read_field, Grid3};
use polyexp::linalg::{norm_2, Mat4};
use polyexp::synth::{fixture, joint_scene};
use polyexp::transform_json::{read_transform, write_transform, TransformFile};

fn polyexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyexp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth_fixtures(dir: &Path) {
    let out = polyexp(&["synth", "--what", "fixtures", "--out", p(dir)]);
    assert_eq!(code(&out), 0, "{out:?}");
}

fn read_mat(path: &Path) -> Mat4 {
    read_transform(path).unwrap().mat().unwrap()
}

#[test]
fn exp_at_zero_is_identity_and_at_one_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let input = dir.path().join("T1.json");
    for backend in ["squaring", "eigen"] {
        let zero = dir.path().join(format!("zero_{backend}.json"));
        let out = polyexp(&["exp", "--in", p(&input), "--backend", backend, "--t", "0", "--out", p(&zero)]);
        assert_eq!(code(&out), 0, "{out:?}");
        assert!(norm_2(&(read_mat(&zero) - Mat4::identity())) < 1e-14);
        let one = dir.path().join(format!("one_{backend}.json"));
        let out = polyexp(&["exp", "--in", p(&input), "--backend", backend, "--t", "1", "--out", p(&one)]);
        assert_eq!(code(&out), 0, "{out:?}");
        assert!(norm_2(&(read_mat(&one) - fixture("T1").unwrap())) < 1e-10);
    }
}

#[test]
fn backends_agree_on_half_step_and_log() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let input = dir.path().join("T1.json");
    let mut halves = Vec::new();
    let mut logs = Vec::new();
    for backend in ["squaring", "eigen"] {
        let half = dir.path().join(format!("half_{backend}.json"));
        assert_eq!(code(&polyexp(&["exp", "--in", p(&input), "--backend", backend, "--t", "0.5", "--out", p(&half)])), 0);
        halves.push(read_mat(&half));
        let log = dir.path().join(format!("log_{backend}.json"));
        let out = polyexp(&["log", "--in", p(&input), "--backend", backend, "--s", "8", "--out", p(&log)]);
        assert_eq!(code(&out), 0, "{out:?}");
        assert!(!out.stderr.is_empty());
        logs.push(read_mat(&log));
    }
    assert!(norm_2(&(halves[0] - halves[1])) < 1e-9);
    assert!(norm_2(&(logs[0] - logs[1])) < 1e-9);
    assert!(norm_2(&(halves[0] * halves[0] - fixture("T1").unwrap())) < 1e-9);
}

#[test]
fn eig_reports_and_rejects_screws() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let out = polyexp(&["eig", "--in", p(&dir.path().join("T2.json"))]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("verdict: repeated λ=1, diagonalizable"));
    assert_eq!(stdout(&out).matches("lambda").count(), 4);

    let out = polyexp(&["eig", "--in", p(&dir.path().join("T0.json")), "--report"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("cond2(P)"));

    let out = polyexp(&["eig", "--in", p(&dir.path().join("screw.json"))]);
    assert_eq!(code(&out), 2, "{out:?}");

    let identity = dir.path().join("identity.json");
    write_transform(&TransformFile::new(&Mat4::identity()), &identity).unwrap();
    let out = polyexp(&["eig", "--in", p(&identity)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("near_identity"));
}

#[test]
fn eig_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let input = dir.path().join("T0.json");
    let a = polyexp(&["eig", "--in", p(&input), "--report"]);
    let b = polyexp(&["eig", "--in", p(&input), "--report"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flow_identity_at_zero_and_halfway_frame() {
    let dir = tempfile::tempdir().unwrap();
    let scene_dir = dir.path().join("scene");
    let out = polyexp(&["synth", "--what", "scene", "--seed", "3", "--n", "20", "--out", p(&scene_dir)]);
    assert_eq!(code(&out), 0, "{out:?}");
    let prefix = dir.path().join("out");
    let out = polyexp(&[
        "flow",
        "--scene",
        p(&scene_dir.join("scene.json")),
        "--t",
        "0,0.5",
        "--backend",
        "eigen",
        "--out-prefix",
        p(&prefix),
        "--warp",
        p(&scene_dir.join("volume_t0.pgf")),
        "--fill",
        "0.1",
        "--threads",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("fallback voxels 0"));

    let zero = read_field(dir.path().join("out_t0.pgf")).unwrap().into_vector().unwrap();
    assert!(zero.data.iter().flatten().all(|v| v.abs() < 1e-12));

    let scene = joint_scene(&Grid3::cube(20), 3);
    let truth = scene.render(0.5);
    let warped = read_field(dir.path().join("out_t0.5_warped.pgf")).unwrap().into_scalar().unwrap();
    let (lo, hi) = truth.min_max();
    let mae = warped.data.iter().zip(&truth.data).map(|(a, b)| (a - b).abs()).sum::<f64>() / truth.data.len() as f64;
    assert!(mae / (hi - lo) < 0.02, "{}", mae / (hi - lo));
}

#[test]
fn flow_rejects_out_of_range_times_and_missing_scene() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = polyexp(&["flow", "--scene", p(&missing), "--t", "0.5", "--out-prefix", p(&dir.path().join("x"))]);
    assert_eq!(code(&out), 1);

    let scene_dir = dir.path().join("scene");
    assert_eq!(code(&polyexp(&["synth", "--what", "scene", "--n", "8", "--out", p(&scene_dir)])), 0);
    let out = polyexp(&["flow", "--scene", p(&scene_dir.join("scene.json")), "--t", "1.5", "--out-prefix", p(&dir.path().join("x"))]);
    assert_eq!(code(&out), 1, "{out:?}");
}

#[test]
fn bench_sweep_writes_csv_and_honours_memory_cap() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    std::fs::write(&config, r#"{"methods": ["squaring", "eigen"], "sizes": [30], "s": 6, "repeats": 1}"#).unwrap();
    let csv = dir.path().join("out.csv");
    let out = polyexp(&["bench", "--config", p(&config), "--csv", p(&csv)]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let records = read_csv(text.as_bytes()).unwrap();
    assert_eq!(records.iter().map(|r| r.method).collect::<Vec<_>>(), [Method::Squaring, Method::Eigen]);
    assert!(records.iter().all(|r| r.n == 30 && r.max_error <= 1e-12));

    let capped = Command::new(env!("CARGO_BIN_EXE_polyexp"))
        .args(["bench", "--config", p(&config), "--csv", p(&dir.path().join("capped.csv"))])
        .env("POLYEXP_MEMORY_CAP_BYTES", "1000000")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 2, "{capped:?}");
}

#[test]
fn synth_fixtures_match_embedded_values() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    for name in ["T0", "T1", "T2"] {
        assert_eq!(read_mat(&dir.path().join(format!("{name}.json"))), fixture(name).unwrap());
    }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let target = dir.path().join(sub);
        assert_eq!(code(&polyexp(&["synth", "--what", "scene", "--seed", seed, "--n", "10", "--out", p(&target)])), 0);
        let mut files: Vec<_> = std::fs::read_dir(&target).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run("a", "4"), run("b", "4"));
    assert_ne!(run("c", "4"), run("d", "5"));

    let grids = dir.path().join("grids");
    assert_eq!(code(&polyexp(&["synth", "--what", "grids", "--n", "6", "--out", p(&grids)])), 0);
    let v = read_field(grids.join("velocity_n6.pgf")).unwrap().into_mat().unwrap();
    assert_eq!(v.grid.dims, [6, 6, 6]);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&polyexp(&["exp", "--bogus"])), 1);
    assert_eq!(code(&polyexp(&["nonsense"])), 1);
    assert_eq!(code(&polyexp(&["exp", "--in", "/does/not/exist.json", "--out", "/tmp/x.json"])), 1);
    assert_eq!(code(&polyexp(&["--help"])), 0);
    assert_eq!(code(&polyexp(&["--version"])), 0);
}
