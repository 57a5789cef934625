use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LN2: f64 = std::f64::consts::LN_2;

fn thermoform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoform")).args(args).output().expect("binary runs")
}

fn demo(name: &str, dir: &Path) -> Output {
    let out = thermoform(&["demo", name, "-o", dir.to_str().unwrap()]);
    assert!(out.status.success(), "demo {name}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn curve(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,p,class,Dp,G,enclosure_width"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn write_config(dir: &TempDir, body: &str) -> String {
    let path = dir.path().join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lists_all_demos() {
    let out = thermoform(&["list-demos"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["nonmixing", "hofbauer-rows", "grid-df", "grid-dfu", "chebyshev", "mp", "base-set-pathology"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn shipped_schema_is_current() {
    let out = thermoform(&["schema"]);
    let shipped = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/config.schema.json")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), shipped);
}

#[test]
fn nonmixing_curve_matches_formula() {
    let dir = TempDir::new().unwrap();
    demo("nonmixing", dir.path());
    let rows = curve(&dir.path().join("curve.csv"));
    assert_eq!(rows.len(), 41);
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let p: f64 = r[1].parse().unwrap();
        assert!((p - (f64::max(-t, -2.0 * t) + LN2)).abs() < 1e-10, "t = {t}");
    }
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["outputs"]["classify"]["unique_equilibrium"], false);
    let tr = json(&dir.path().join("transitions.json"));
    let records = tr["transitions"].as_array().unwrap();
    assert!(records.iter().any(|r| r["t_lower"].as_f64().unwrap().abs() < 1e-9));
    assert!(dir.path().join("zn.csv").exists());
}

#[test]
fn grid_dfu_has_flat_interval() {
    let dir = TempDir::new().unwrap();
    demo("grid-dfu", dir.path());
    let tr = json(&dir.path().join("transitions.json"));
    let flat = &tr["flat_interval"];
    let left = flat["left"]["lower"].as_f64().unwrap();
    let right = flat["right"]["upper"].as_f64().unwrap();
    assert!((left - 1.0).abs() < 1e-6);
    assert!(right > 1.0 + 1e-3);
    let rows = curve(&dir.path().join("curve.csv"));
    let class_at = |target: f64| {
        rows.iter()
            .min_by(|a, b| {
                let da = (a[0].parse::<f64>().unwrap() - target).abs();
                let db = (b[0].parse::<f64>().unwrap() - target).abs();
                da.total_cmp(&db)
            })
            .unwrap()[2]
            .clone()
    };
    assert_eq!(class_at(0.5), "PR");
    assert_eq!(class_at(0.5 * (1.0 + right)), "T");
    assert_eq!(class_at(right + 0.5), "PR");
    for r in &rows {
        let p: f64 = r[1].parse().unwrap();
        assert!(p >= LN2 - 1e-12);
    }
}

#[test]
fn grid_df_is_flat_to_the_end() {
    let dir = TempDir::new().unwrap();
    demo("grid-df", dir.path());
    let tr = json(&dir.path().join("transitions.json"));
    assert_eq!(tr["flat_interval"]["right"], "beyond_bracket");
}

#[test]
fn chebyshev_kink() {
    let dir = TempDir::new().unwrap();
    demo("chebyshev", dir.path());
    let tr = json(&dir.path().join("transitions.json"));
    let kink = tr["transitions"][0]["detail"]["kink"].as_f64().unwrap();
    assert!((kink + 1.0).abs() < 0.05, "kink {kink}");
}

#[test]
fn hofbauer_rows_cover_every_class() {
    let dir = TempDir::new().unwrap();
    demo("hofbauer-rows", dir.path());
    let index = fs::read_to_string(dir.path().join("index.csv")).unwrap();
    let subdirs: Vec<&str> = index.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(subdirs.len(), 5);
    let classes: Vec<String> = subdirs
        .iter()
        .map(|s| json(&dir.path().join(s).join("report.json"))["outputs"]["classify"]["class"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(classes, ["PR", "PR", "PR", "NR", "T"]);
    let last = json(&dir.path().join(subdirs[4]).join("report.json"));
    let atom = last["outputs"]["atoms"]["atom"][0].as_f64().unwrap();
    assert!((atom - 0.5).abs() < 1e-8);
}

#[test]
fn base_set_pathology_tables() {
    let dir = TempDir::new().unwrap();
    demo("base-set-pathology", dir.path());
    let text = fs::read_to_string(dir.path().join("zn.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,Z_[0;0.5),Z_[0.5;1)"));
    for l in lines {
        let z: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(z >= 1.0);
    }
    let report = json(&dir.path().join("report.json"));
    let bases = report["outputs"]["zn"]["bases"].as_array().unwrap();
    assert_eq!(bases[0]["diagnostic"]["verdict"], "recurrent_like");
    assert_eq!(bases[1]["diagnostic"]["verdict"], "transient_like");
    assert!(bases[1]["diagnostic"]["rate"].as_f64().unwrap() <= -0.01);
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["grid-dfu", "mp"] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        demo(name, a.path());
        demo(name, b.path());
        for file in ["curve.csv", "transitions.json", "report.json"] {
            assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{name}/{file}");
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let run = |dir: &Path, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_thermoform"))
            .args(["demo", "chebyshev", "-o", dir.to_str().unwrap()])
            .env("THERMOFORM_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
    };
    run(a.path(), "1");
    run(b.path(), "3");
    assert_eq!(fs::read(a.path().join("curve.csv")).unwrap(), fs::read(b.path().join("curve.csv")).unwrap());
}

#[test]
fn optional_outputs() {
    let dir = TempDir::new().unwrap();
    let out = thermoform(&["demo", "grid-df", "-o", dir.path().to_str().unwrap(), "--gnuplot", "--timing"]);
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("curve.gp")).unwrap().contains("curve.csv"));
    assert!(json(&dir.path().join("report.json"))["wall_time_seconds"].as_f64().is_some());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let unknown = write_config(&dir, r#"{"model":{"geometric":{"c":1.0,"multiplicity":"one","extra":1}},"task":{"classify":{"t":1.0}}}"#);
    let out = thermoform(&["run", &unknown, "-o", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));

    let broken = write_config(&dir, "{ not json");
    assert_eq!(thermoform(&["run", &broken, "-o", out_dir]).status.code(), Some(2));

    let bad_gamma = write_config(&dir, r#"{"model":{"renewal":{"family":"grid","gamma":0.5}},"task":{"classify":{"t":1.0}}}"#);
    assert_eq!(thermoform(&["run", &bad_gamma, "-o", out_dir]).status.code(), Some(2));

    let wide = write_config(
        &dir,
        r#"{"model":{"renewal":{"family":"grid","gamma":3.0,"normalization_target":2.0}},"task":{"atoms":{"t":1.0}},"tolerances":{"sum_tol":0.5}}"#,
    );
    assert_eq!(thermoform(&["run", &wide, "-o", out_dir]).status.code(), Some(3));

    assert_eq!(thermoform(&["run", "/nonexistent/config.json", "-o", out_dir]).status.code(), Some(1));
    assert_eq!(thermoform(&["demo", "nope", "-o", out_dir]).status.code(), Some(2));

    let ok = write_config(&dir, r#"{"model":{"geometric":{"c":1.0,"multiplicity":"binary"}},"task":{"classify":{"t":2.0}}}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_thermoform"))
        .args(["run", &ok, "-o", out_dir])
        .env("THERMOFORM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = thermoform(&["run", &ok, "-o", out_dir, "--tol", "1e-12"]);
    assert!(out.status.success());
    let report = json(&Path::new(out_dir).join("report.json"));
    assert_eq!(report["tolerances"]["root_tol"], 1e-12);
    let p = report["outputs"]["classify"]["p"].as_f64().unwrap();
    assert!((p - LN2).abs() < 1e-12);
}

#[test]
fn geometric_classify_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"model":{"geometric":{"c":1.0,"multiplicity":"one"}},"task":{"pressure_curve":{"t_min":0.0,"t_max":2.0,"steps":21}}}"#,
    );
    let out_dir = dir.path().join("out");
    assert!(thermoform(&["run", &cfg, "-o", out_dir.to_str().unwrap()]).status.success());
    for r in curve(&out_dir.join("curve.csv")) {
        let t: f64 = r[0].parse().unwrap();
        let p: f64 = r[1].parse().unwrap();
        assert!((p - f64::max(0.0, LN2 - t)).abs() < 1e-9);
    }
}
