use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_convexflow"));
    c.env_remove("CONVEXFLOW_SEED");
    c
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

const CIRCLE: &str = r#"
[grid]
n = 64

[init]
type = "circle"
r = 1.0

[flow]
variant = "length_preserving"

[time]
t_end = 0.05
record_stride = 50
"#;

#[test]
fn evolve_circle_writes_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CIRCLE);
    let out = dir.path().join("out");
    let o = bin().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 20);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 2);
    for col in [1usize, 2, 4, 7, 8] {
        assert!(rows.iter().all(|r| (r[col] - rows[0][col]).abs() < 1e-12), "column {col}");
    }

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    for key in ["config", "config_hash", "n", "scheme", "termination", "steps", "wall_seconds", "version"] {
        assert!(meta.get(key).is_some(), "{key}");
    }
    assert_eq!(meta["termination"], "completed");
    assert_eq!(meta["n"], 64);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert!(out.join("snap_0.000000.csv").exists());
    assert!(out.join("curve_0.050000.csv").exists());
}

#[test]
fn evolve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &CIRCLE.replace("type = \"circle\"\nr = 1.0", "type = \"random\"\nseed = 7\nbudget = 0.5\nj_max = 5"),
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bin().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
        assert!(o.status.success());
        fs::read(out.join("run.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn seed_env_changes_random_init() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &CIRCLE.replace("type = \"circle\"\nr = 1.0", "type = \"random\"\nseed = 7\nbudget = 0.5\nj_max = 5"),
    );
    let run = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut c = bin();
        if let Some(s) = seed {
            c.env("CONVEXFLOW_SEED", s);
        }
        assert!(c.args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap().success());
        fs::read(out.join("run.csv")).unwrap()
    };
    assert_ne!(run("plain", None), run("seeded", Some("11")));
}

#[test]
fn shortening_past_ceiling_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let body = CIRCLE
        .replace("length_preserving", "shortening")
        .replace("record_stride = 50", "record_stride = 50\nk_ceiling = 1.01");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let o = bin().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("blowup"));
    let meta = fs::read_to_string(out.join("meta.json")).unwrap();
    assert!(meta.contains("\"blowup\""));
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CIRCLE.replace("[grid]", "[gird]"));
    let o = bin().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("gird"));
}

#[test]
fn generate_prints_functionals() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["generate", "--init", "circle:r=1", "--out"]).arg(dir.path()).output().unwrap();
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("L=6.2831853072"), "{s}");
    assert!(s.contains("A=3.1415926536"), "{s}");
    assert!(s.contains("alpha=1.0000000000"), "{s}");
    assert!(dir.path().join("profile.csv").exists() && dir.path().join("curve.csv").exists());

    let o = bin().args(["generate", "--init", "ellipse:a=2,b=1", "--out"]).arg(dir.path()).output().unwrap();
    assert!(stdout(&o).contains("L=9.688448"), "{}", stdout(&o));
}

#[test]
fn generate_rejects_non_convex_support() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["generate", "--init", "support_fourier:a0=1,c2=0.4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("convex"));
}

#[test]
fn verify_unknown_suite_lists_suites() {
    let o = bin().args(["verify", "--suite", "nosuch"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for s in ["conservation", "monotonicity", "rates", "geometry", "oracle"] {
        assert!(err.contains(s), "{err}");
    }
}

#[test]
fn verify_geometry_suite_passes() {
    let o = bin().args(["verify", "--suite", "geometry", "--n", "128"]).output().unwrap();
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert!(s.contains("[PASS] 10 inequality suite"), "{s}");
}

#[test]
fn compare_circle_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CIRCLE);
    let out = dir.path().join("cmp");
    let o = bin()
        .args(["compare", "--markers", "128", "--horizon", "0.02", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    assert!(csv.starts_with("t,hausdorff\n"));
    for line in csv.lines().skip(1) {
        let h: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(h <= 1e-8);
    }
}
