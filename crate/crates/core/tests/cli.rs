use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dsm_core::cli::{files, run, RunManifest};
use dsm_core::imaging::io::read_csv;
use dsm_core::scene::{benchmark_scene, distance};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crackdsm"))
}

fn scenes_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes")
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn write_scene(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn load_map(p: &Path) -> dsm_core::imaging::IndicatorMap {
    read_csv(fs::read(p).unwrap().as_slice(), "test").unwrap()
}

#[test]
fn sample_scene_is_the_benchmark() {
    let text = fs::read_to_string(scenes_dir().join("three_cracks.txt")).unwrap();
    let scene = files::parse_scene(&text, "three_cracks.txt").unwrap();
    let want = benchmark_scene([0.05; 3]);
    for (a, b) in scene.cracks.iter().zip(&want.cracks) {
        assert!(distance(a.center, b.center) < 1e-15);
        assert_eq!(a.half_length, b.half_length);
        assert!((a.rotation - b.rotation).abs() < 1e-15);
    }
}

#[test]
fn simulate_writes_a_tensor_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let a = dir.path().join("a.tensor");
    let b = dir.path().join("b.tensor");
    for out in [&a, &b] {
        run([
            "simulate", "--scene", &s(&scene), "--lambda", "0.5", "--n-obs", "30",
            "--generator", "order1", "--out", &s(out),
        ])
        .unwrap();
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let t = files::parse_tensor(std::str::from_utf8(&bytes).unwrap(), "a").unwrap();
    assert_eq!(
        (t.config().frequency_count(), t.config().incident_count(), t.config().observation_count()),
        (1, 1, 30)
    );
    assert_eq!(files::format_tensor(&t).as_bytes(), &bytes[..]);
    let m = RunManifest::read(&RunManifest::path_for(&a)).unwrap();
    assert_eq!(m.command, "simulate");
    assert_eq!(m.parameters["observations"], 30);
}

#[test]
fn full_solver_on_empty_scene_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "empty.txt", "# nothing here\n");
    let out = dir.path().join("e.tensor");
    run(["simulate", "--scene", &s(&scene), "--lambda", "0.5", "--out", &s(&out)]).unwrap();
    let t = files::parse_tensor(&fs::read_to_string(&out).unwrap(), "e").unwrap();
    assert!(t.values().iter().all(|v| v.re == 0.0 && v.im == 0.0));
}

#[test]
fn full_solver_tensor_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let out = dir.path().join("full.tensor");
    run([
        "simulate", "--scene", &s(&scene), "--lambda", "0.5", "--n-incident", "2",
        "--quad-nodes", "32", "--out", &s(&out),
    ])
    .unwrap();
    let again = dir.path().join("again.tensor");
    run(["replay", &s(&RunManifest::path_for(&out)), "--out", &s(&again)]).unwrap();
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn hard_violations_exit_nonzero_with_the_list() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "close.txt", "0 0 0.01 0\n0.05 0 0.01 1.5\n");
    let out = bin()
        .args(["simulate", "--scene", &s(&scene), "--lambda", "0.5", "--out", &s(&dir.path().join("x"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scene rejected"), "{err}");
    assert!(!dir.path().join("x").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let bad = dir.path().join("no/such/dir/t.tensor");
    let out = bin()
        .args(["simulate", "--scene", &s(&scene), "--lambda", "0.5", "--generator", "order1", "--out", &s(&bad)])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write"));
}

#[test]
fn image_single_crack_peaks_at_center() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "one.txt", "0.3 -0.2 0.05 0.4\n");
    let t = dir.path().join("one.tensor");
    run(["simulate", "--scene", &s(&scene), "--lambda", "0.5", "--generator", "order1", "--out", &s(&t)]).unwrap();
    let map = dir.path().join("one.csv");
    run(["image", "--tensor", &s(&t), "--method", "single", "--grid", "-1,1,-1,1,101,101", "--out", &s(&map)]).unwrap();
    let m = load_map(&map);
    assert!(distance(m.argmax().0, [0.3, -0.2]) < 1e-12);
    let pgm = fs::read(dir.path().join("one.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n101 101\n65535\n"));
    assert_eq!(pgm.len(), 17 + 2 * 101 * 101);
    // write → read → write
    let mut again = Vec::new();
    dsm_core::imaging::io::write_csv(&m, &mut again).unwrap();
    assert_eq!(again, fs::read(&map).unwrap());
}

#[test]
fn mif_on_a_single_frequency_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let t = dir.path().join("t.tensor");
    run(["simulate", "--scene", &s(&scene), "--lambda", "0.5", "--generator", "order1", "--out", &s(&t)]).unwrap();
    let out = bin()
        .args(["image", "--tensor", &s(&t), "--method", "mif", "--out", &s(&dir.path().join("m.csv"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 2 wavenumbers"));
}

#[test]
fn aif_map_then_peaks_finds_all_cracks() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let t = dir.path().join("t.tensor");
    run([
        "simulate", "--scene", &s(&scene), "--lambda", "0.5", "--n-incident", "8",
        "--generator", "order1", "--out", &s(&t),
    ])
    .unwrap();
    let map = dir.path().join("aif.csv");
    run(["image", "--tensor", &s(&t), "--method", "aif", "--out", &s(&map)]).unwrap();
    let report = run(["peaks", &s(&map), "--scene", &s(&scene)]).unwrap();
    let cracks: Vec<Vec<f64>> = report
        .lines()
        .filter(|l| l.starts_with("crack "))
        .map(|l| l.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(cracks.len(), 3, "{report}");
    for c in cracks {
        assert!(c[3] < 0.125, "{report}");
    }
}

#[test]
fn predictions_and_comparisons() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_scene(dir.path(), "one.txt", "0.2 0.1 0.05 0\n");
    let grid = "-1,1,-1,1,61,61";
    let s1 = dir.path().join("s1.csv");
    let s2 = dir.path().join("s2.csv");
    run(["predict", "--scene", &s(&one), "--theorem", "s1", "--lambda", "0.5", "--grid", grid, "--out", &s(&s1)]).unwrap();
    // d = [0, 1] is normal to the crack
    run([
        "predict", "--scene", &s(&one), "--theorem", "s2", "--lambda", "0.5", "--incident-deg", "90",
        "--grid", grid, "--out", &s(&s2),
    ])
    .unwrap();
    let text = run(["compare", &s(&s1), &s(&s2)]).unwrap();
    let linf: f64 = text.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(linf < 1e-12, "{text}");
    assert_eq!(run(["compare", &s(&s1), &s(&s1)]).unwrap(), "linf 0\nl2 0\n");

    let peaks = run(["peaks", &s(&s1)]).unwrap();
    assert!(peaks.contains("peaks 1\n"), "{peaks}");

    let mif = dir.path().join("mif.csv");
    run([
        "predict", "--scene", &s(&one), "--theorem", "mif", "--lambda-range", "0.3,0.7,10",
        "--grid", grid, "--out", &s(&mif),
    ])
    .unwrap();
    assert!(distance(load_map(&mif).argmax().0, [0.2, 0.1]) < 0.04);

    let aif = dir.path().join("aif.csv");
    run([
        "predict", "--scene", &s(&one), "--theorem", "aif", "--lambda", "0.5", "--n-incident", "4",
        "--series-trunc", "40", "--grid", grid, "--out", &s(&aif),
    ])
    .unwrap();
    assert!(RunManifest::path_for(&aif).exists());

    let other = dir.path().join("other.csv");
    run(["predict", "--scene", &s(&one), "--theorem", "s1", "--lambda", "0.5", "--grid", "-1,1,-1,1,11,11", "--out", &s(&other)]).unwrap();
    let out = bin().args(["compare", &s(&s1), &s(&other)]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("different grids"));
}

#[test]
fn second_order_prediction_needs_equal_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "mixed.txt", "0.6 0.2 0.05 0\n-0.5 -0.5 0.03 1\n");
    let out = bin()
        .args([
            "predict", "--scene", &s(&scene), "--theorem", "s2", "--lambda", "0.5",
            "--out", &s(&dir.path().join("s2.csv")),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("half-length"));
}

#[test]
fn constant_map_has_no_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    let g = dsm_core::imaging::ImagingGrid::square(1.0, 5).unwrap();
    let m = dsm_core::imaging::IndicatorMap::from_raw(g, vec![0.3; 25]).unwrap();
    let mut bytes = Vec::new();
    dsm_core::imaging::io::write_csv(&m, &mut bytes).unwrap();
    fs::write(&p, bytes).unwrap();
    let text = run(["peaks", &s(&p), "--floor", "0"]).unwrap();
    assert!(text.contains("peaks 0\n"));
    let r = dir.path().join("r.txt");
    run(["peaks", &s(&p), "--out", &s(&r)]).unwrap();
    assert_eq!(fs::read_to_string(&r).unwrap(), run(["peaks", &s(&p)]).unwrap());
}

#[test]
fn dense_observations_match_the_first_structure() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_scene(dir.path(), "one.txt", "-0.4 0.3 0.05 0.7\n");
    let t = dir.path().join("t.tensor");
    run([
        "simulate", "--scene", &s(&one), "--lambda", "0.5", "--n-obs", "360",
        "--generator", "order1", "--out", &s(&t),
    ])
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run(["image", "--tensor", &s(&t), "--method", "single", "--grid", "-1,1,-1,1,81,81", "--out", &s(&a)]).unwrap();
    run(["predict", "--scene", &s(&one), "--theorem", "s1", "--lambda", "0.5", "--grid", "-1,1,-1,1,81,81", "--out", &s(&b)]).unwrap();
    let text = run(["compare", &s(&a), &s(&b)]).unwrap();
    let linf: f64 = text.lines().next().unwrap()[5..].parse().unwrap();
    assert!(linf < 0.05, "{text}");
}

#[test]
fn image_and_predict_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let scene = scenes_dir().join("three_cracks.txt");
    let t = dir.path().join("t.tensor");
    run([
        "simulate", "--scene", &s(&scene), "--lambda-range", "0.3,0.7,3", "--generator", "order2",
        "--snr-db", "20", "--seed", "11", "--out", &s(&t),
    ])
    .unwrap();
    let t2 = dir.path().join("t2.tensor");
    run(["replay", &s(&RunManifest::path_for(&t)), "--out", &s(&t2)]).unwrap();
    assert_eq!(fs::read(&t).unwrap(), fs::read(&t2).unwrap());

    let m = dir.path().join("m.csv");
    run(["image", "--tensor", &s(&t), "--method", "mif", "--grid", "-1,1,-1,1,41,41", "--out", &s(&m)]).unwrap();
    let m2 = dir.path().join("m2.csv");
    run(["replay", &s(&RunManifest::path_for(&m)), "--out", &s(&m2)]).unwrap();
    assert_eq!(fs::read(&m).unwrap(), fs::read(&m2).unwrap());
    assert_eq!(fs::read(dir.path().join("m.pgm")).unwrap(), fs::read(dir.path().join("m2.pgm")).unwrap());

    let p = dir.path().join("p.csv");
    run([
        "predict", "--scene", &s(&scene), "--theorem", "mif", "--lambda-range", "0.3,0.7,5",
        "--grid", "-1,1,-1,1,21,21", "--out", &s(&p),
    ])
    .unwrap();
    let p2 = dir.path().join("p2.csv");
    run(["replay", &s(&RunManifest::path_for(&p)), "--out", &s(&p2)]).unwrap();
    assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
}

#[test]
fn help_and_usage_errors() {
    assert!(bin().arg("--help").output().unwrap().status.success());
    let out = bin().args(["simulate", "--lambda", "0.5"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
