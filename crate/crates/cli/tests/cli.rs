use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use entwit::{Measurement64, PureVector64};
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn entwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entwit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn record(args: &[&str], dir: &Path, name: &str) -> (Output, Value) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    full.extend(["--out", &out_s]);
    let o = entwit(&full);
    let text =
        std::fs::read_to_string(&out).unwrap_or_else(|_| panic!("no record: {}", stdout(&o)));
    (o, serde_json::from_str(&text).unwrap())
}

#[test]
fn classify_bundled_files() {
    let o = entwit(&["classify", scenario("bell_basis.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("entangled (4/4 elements)"));

    let o = entwit(&[
        "classify",
        scenario("computational_basis.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("separable"));

    let o = entwit(&[
        "classify",
        scenario("broken_measurement.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum to the identity"));
}

#[test]
fn syntax_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"dims\": [2, 2],\n  \"effects\": [ oops ]\n}\n").unwrap();
    let o = entwit(&["classify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

/// Complement of the tiles product basis: PPT, entangled, and out of reach
/// of the PPT test.
fn tiles_measurement() -> Measurement64 {
    let v = |a: [f64; 3], b: [f64; 3]| {
        let amps: Vec<f64> = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect();
        PureVector64::from_real(vec![3, 3], &amps)
            .unwrap()
            .normalized()
            .unwrap()
    };
    let upb = [
        v([1.0, 0.0, 0.0], [1.0, -1.0, 0.0]),
        v([1.0, -1.0, 0.0], [0.0, 0.0, 1.0]),
        v([0.0, 0.0, 1.0], [0.0, 1.0, -1.0]),
        v([0.0, 1.0, -1.0], [1.0, 0.0, 0.0]),
        v([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]),
    ];
    let mut p = entwit::Operator64::zeros(vec![3, 3]).unwrap();
    for u in &upb {
        p = &p + &u.projector();
    }
    let rest = &entwit::Operator64::identity(vec![3, 3]).unwrap() - &p;
    Measurement64::new(vec![3, 3], vec![rest, p], "tiles").unwrap()
}

#[test]
fn undetermined_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tiles.json");
    std::fs::write(&p, serde_json::to_string(&tiles_measurement()).unwrap()).unwrap();
    let o = entwit(&["classify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("undetermined"));
}

#[test]
fn witness_commands() {
    let dir = tempfile::tempdir().unwrap();
    let bell = scenario("bell_basis.json");
    let (o, rec) = record(
        &["witness", bell.to_str().unwrap(), "--element", "0"],
        dir.path(),
        "w.json",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(rec["outputs"]["beta_residual"].as_f64().unwrap() <= 1e-10);
    let re: Vec<f64> =
        serde_json::from_value(rec["outputs"]["witness"]["operator"]["re"].clone()).unwrap();
    let expected = [
        0.0, 0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0,
    ];
    for (a, b) in re.iter().zip(expected) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(rec["input_digest"].as_str().unwrap().len(), 64);

    let o = entwit(&["witness", "--builtin", "wbm-prime"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 correlation terms"));

    let comp = scenario("computational_basis.json");
    let o = entwit(&["witness", comp.to_str().unwrap(), "--element", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PPT"));
}

#[test]
fn emitted_witness_feeds_product_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("wit.json");
    let bell = scenario("bell_basis.json");
    let o = entwit(&[
        "witness",
        bell.to_str().unwrap(),
        "--emit",
        w.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rec) = record(
        &[
            "oracle",
            "product-min",
            w.to_str().unwrap(),
            "--restarts",
            "50",
        ],
        dir.path(),
        "pm.json",
    );
    assert!(rec["outputs"]["value"].as_f64().unwrap() >= -1e-6);
}

#[test]
fn steer_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("bm_steer.json");
    let csv = dir.path().join("sweep.csv");
    let (o, rec) = record(
        &[
            "steer",
            sc.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ],
        dir.path(),
        "s.json",
    );
    assert_eq!(o.status.code(), Some(0));
    let s = rec["outputs"]["S_value"].as_f64().unwrap();
    assert!((s - 0.125).abs() < 1e-9);
    assert!(rec["outputs"]["sohs_max"].as_f64().unwrap() <= 1e-9);
    let t = rec["outputs"]["threshold_visibility"].as_f64().unwrap();
    assert!((t - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 12);
    assert!(rows.starts_with("visibility,S,argmax_b"));
}

#[test]
fn di_bundled_scenario_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("bm_star.json");
    let target = (2.0 * 2f64.sqrt() - 2.0) / 4.0;
    for mode in ["on", "off"] {
        let (o, rec) = record(
            &[
                "di",
                sc.to_str().unwrap(),
                "--restarts",
                "10",
                "--per-b-settings",
                mode,
            ],
            dir.path(),
            "d.json",
        );
        assert_eq!(o.status.code(), Some(0));
        let e = rec["outputs"]["report"]["value"].as_f64().unwrap();
        assert!((e - target).abs() < 1e-4, "{mode}: {e}");
        assert_eq!(rec["outputs"]["report"]["verdict"], "certified");
    }
}

#[test]
fn replay_is_bit_exact_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("bm_star.json");
    let args = [
        "di",
        sc.to_str().unwrap(),
        "--restarts",
        "6",
        "--seed",
        "11",
    ];
    let (_, a) = record(&args, dir.path(), "a.json");
    let out = dir.path().join("b.json");
    let o = Command::new(env!("CARGO_BIN_EXE_entwit"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .env("ENTWIT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let b: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["seed"], 11);
}

#[test]
fn lhv_oracle() {
    let o = entwit(&["oracle", "lhv", "chsh"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("LHV bound 2"));
    let o = entwit(&["oracle", "lhv", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_flag_is_validated() {
    let bell = scenario("bell_basis.json");
    let o = entwit(&["classify", bell.to_str().unwrap(), "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = entwit(&["classify", bell.to_str().unwrap(), "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
}
