use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_inforate"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(cmd: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args([cmd, "--scenario"])
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

const SIGMA_ZERO: &str = r#"{
    "seed": 5,
    "curve": {"kind": "table", "knots": [[1, 0.98], [3, 0.93], [7, 0.82], [15, 0.62]]},
    "model": {"phi": {"kind": "linear"}, "process": {"kind": "brownian", "sigma": 0}},
    "run": {
        "curve": {"start": 0, "stop": 15, "step": 1},
        "simulate": {"paths": 20, "dt": 0.05, "horizon": 5, "maturity": 5, "record_every": 5},
        "diagnose": {"paths": 400, "dt": 0.02, "times": [1.0], "maturity": 5, "record_every": 5, "qv_tol": 0.02}
    }
}"#;

#[test]
fn curve_rows_match_flat_discounting() {
    let dir = TempDir::new().unwrap();
    let out = run("curve", &scenarios().join("information_paths.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("curve.csv"));
    assert_eq!(header, ["maturity", "discount", "forward", "density"]);
    assert_eq!(rows[0][..2], ["0".to_string(), "1".to_string()]);
    let five = rows.iter().find(|r| r[0] == "5").unwrap();
    assert!((num(&five[1]) - 0.904837).abs() < 1e-6);
    assert!((num(&five[2]) - 0.02).abs() < 1e-10);
}

#[test]
fn table_curve_reproduces_knots() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(&dir, "s.json", SIGMA_ZERO);
    assert!(run("curve", &s, dir.path(), &[]).status.success());
    let (_, rows) = read_csv(&dir.path().join("curve.csv"));
    for (t, p) in [("1", 0.98), ("3", 0.93), ("7", 0.82), ("15", 0.62)] {
        let r = rows.iter().find(|r| r[0] == t).unwrap();
        assert!((num(&r[1]) - p).abs() < 1e-12, "T={t}");
    }
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let s = scenarios().join("information_paths.json");
    assert!(run("simulate", &s, a.path(), &[]).status.success());
    assert!(run("simulate", &s, b.path(), &[]).status.success());
    assert!(run("simulate", &s, c.path(), &["--seed", "99"]).status.success());
    let read = |d: &TempDir| std::fs::read(d.path().join("simulate.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn simulated_bond_reaches_par_at_maturity() {
    let dir = TempDir::new().unwrap();
    assert!(run("simulate", &scenarios().join("information_paths.json"), dir.path(), &[]).status.success());
    let (header, rows) = read_csv(&dir.path().join("simulate.csv"));
    assert_eq!(header, ["path", "t", "xi", "bond", "short_rate", "alive"]);
    let at_maturity: Vec<_> = rows.iter().filter(|r| r[1] == "5" && r[5] == "1").collect();
    assert!(!at_maturity.is_empty());
    for r in at_maturity {
        assert_eq!(num(&r[3]), 1.0);
    }
    for r in rows.iter().filter(|r| r[5] == "0") {
        assert_eq!(r[3], "0");
        assert_eq!(r[4], "");
    }
}

#[test]
fn zero_sigma_paths_follow_forward_discounting() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(&dir, "s.json", SIGMA_ZERO);
    assert!(run("simulate", &s, dir.path(), &[]).status.success());
    assert!(run("curve", &s, dir.path(), &[]).status.success());
    let (_, curve) = read_csv(&dir.path().join("curve.csv"));
    let p0 = |t: f64| curve.iter().find(|r| num(&r[0]) == t).map(|r| num(&r[1]));
    let p05 = p0(5.0).unwrap();
    let (_, rows) = read_csv(&dir.path().join("simulate.csv"));
    let mut checked = 0;
    for r in rows.iter().filter(|r| r[5] == "1") {
        if let Some(pt) = p0(num(&r[1])) {
            assert!((num(&r[3]) - p05 / pt).abs() < 1e-11, "{r:?}");
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn price_table_boundaries_and_cross_check() {
    let dir = TempDir::new().unwrap();
    let out = run("price", &scenarios().join("option_pricing.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("price.csv"));
    assert_eq!(header, ["instrument", "t", "maturity", "strike", "method", "value", "se"]);
    let find = |inst: &str, strike: &str, method: &str| {
        rows.iter().find(|r| r[0] == inst && r[3] == strike && r[4] == method).unwrap_or_else(|| panic!("{inst} {strike} {method}"))
    };
    assert!((num(&find("call", "0", "analytic")[5]) - (-0.1f64).exp()).abs() < 1e-11);
    let analytic = num(&find("call", "0.93", "analytic")[5]);
    let quad = num(&find("call", "0.93", "quadrature")[5]);
    let mc = find("call", "0.93", "mc");
    assert!((analytic - quad).abs() < 1e-8);
    assert!((num(&mc[5]) - analytic).abs() <= 3.0 * num(&mc[6]));
    let sw = num(&find("swaption", "0", "quadrature")[5]);
    assert!((sw - ((-0.02f64).exp() - (-0.1f64).exp())).abs() < 1e-11);
    let implied = num(&find("implied_sigma", "0.93", "analytic")[5]);
    assert!(implied > 0.25, "price above the sigma = 0.25 value implies a larger rate");
}

#[test]
fn precision_flag_controls_digits() {
    let dir = TempDir::new().unwrap();
    assert!(run("curve", &scenarios().join("information_paths.json"), dir.path(), &["--precision", "4"]).status.success());
    let (_, rows) = read_csv(&dir.path().join("curve.csv"));
    assert_eq!(rows[5][1], "0.9048");
}

#[test]
fn diagnose_passes_on_information_paths() {
    let dir = TempDir::new().unwrap();
    let out = run("diagnose", &scenarios().join("information_paths.json"), dir.path(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(dir.path().join("diagnose.txt").exists());
    let (header, rows) = read_csv(&dir.path().join("diagnose.csv"));
    assert_eq!(header, ["check", "t", "estimate", "se", "target", "tolerance", "pass"]);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[6] == "1"));
}

#[test]
fn diagnose_passes_without_information() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(&dir, "s.json", SIGMA_ZERO);
    let out = run("diagnose", &s, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn corrupted_drift_fails_diagnostics() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "s.json",
        r#"{
            "seed": 42,
            "curve": {"kind": "flat", "rate": 0.02},
            "model": {"phi": {"kind": "linear"}, "process": {"kind": "brownian", "sigma": 0.3}},
            "run": {"diagnose": {"paths": 1000, "dt": 0.01, "times": [1.0], "maturity": 5, "record_every": 25, "drift_scale": 1.1}}
        }"#,
    );
    let out = run("diagnose", &s, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(dir.path().join("diagnose.txt")).unwrap();
    assert!(text.contains("[FAIL] discounted_bond") || text.contains("[FAIL] density_mean"), "{text}");
}

#[test]
fn exit_codes_classify_failures() {
    let dir = TempDir::new().unwrap();
    let bad = write_scenario(&dir, "bad.json", "{ not json");
    assert_eq!(run("curve", &bad, dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("curve", &dir.path().join("absent.json"), dir.path(), &[]).status.code(), Some(2));
    let no_block = write_scenario(&dir, "nb.json", r#"{"curve": {"kind": "flat", "rate": 0.02}}"#);
    assert_eq!(run("curve", &no_block, dir.path(), &[]).status.code(), Some(2));
    let unattainable = write_scenario(
        &dir,
        "u.json",
        r#"{
            "curve": {"kind": "flat", "rate": 0.02},
            "model": {"phi": {"kind": "exp_decay", "kappa": 0.05}, "process": {"kind": "brownian", "sigma": 0.25}},
            "run": {"price": {"instruments": [
                {"type": "implied_sigma", "option_maturity": 2, "bond_maturity": 5, "strike": 0.93, "price": 0.5}
            ]}}
        }"#,
    );
    let out = run("price", &unattainable, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numeric failure"));
    let o = bin().args(["curve"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gamma_scenario_simulates_and_prices() {
    let dir = TempDir::new().unwrap();
    let s = scenarios().join("gamma_paths.json");
    assert!(run("simulate", &s, dir.path(), &[]).status.success());
    let (_, rows) = read_csv(&dir.path().join("simulate.csv"));
    assert!(rows.iter().all(|r| num(&r[2]) >= 0.0));
    assert!(run("price", &s, dir.path(), &[]).status.success());
    let (_, rows) = read_csv(&dir.path().join("price.csv"));
    assert!((num(&rows[0][5]) - 0.9663025399110163).abs() < 1e-9);
    assert_eq!(run("diagnose", &s, dir.path(), &[]).status.code(), Some(2));
}
