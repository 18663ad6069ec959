use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = r#"
[crystal]
preset = "asymmetric-reference"
n_planewaves = 15

[drive]
photon_energy = 0.156
field = 0.005

[floquet]
mu_max = 8
n_bands = 8
n_k = 8

[observables]
mu_report = 4

[xray]
duration = "0.75 T"
g = [1, 2]

[reconstruct]
mu = 2
g = [1, 2]

[outputs]
formats = ["csv", "json", "gnuplot"]
"#;

fn wavemix() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wavemix"));
    c.env_remove("WAVEMIX_CACHE_DIR");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    wavemix().arg("run").arg(config).arg("-o").arg(out).arg("-q").args(extra).output().unwrap()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap()
}

fn stage_cache(m: &Value, stage: &str) -> String {
    m["stages"].as_array().unwrap().iter().find(|s| s["name"] == stage).unwrap()["cache"].as_str().unwrap().to_string()
}

#[test]
fn minimal_run_writes_outputs() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "m.toml", include_str!("../../../configs/minimal.toml"));
    let out = t.path().join("out");
    let o = run(&cfg, &out, &["--no-cache"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    for f in ["fourier.csv", "fields/rho_0.csv", "spectra/G1.csv", "response.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("fourier.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains(','));
    assert!(csv.contains("\r\n") || csv.contains('\n'));
}

#[test]
fn unknown_key_is_config_error() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "bad.toml", &SMALL.replace("mu_max = 8", "mu_max = 8\nmu_maximum = 9"));
    let o = run(&cfg, &t.path().join("out"), &["--no-cache"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu_maximum"));
}

#[test]
fn bad_unit_and_missing_file_are_config_errors() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "bad.toml", &SMALL.replace("duration = \"0.75 T\"", "duration = \"0.75 parsec\""));
    assert_eq!(run(&cfg, &t.path().join("out"), &["--no-cache"]).status.code(), Some(2));
    assert_eq!(run(&t.path().join("nope.toml"), &t.path().join("out"), &[]).status.code(), Some(2));
    let cfg = write_config(t.path(), "s.toml", SMALL);
    assert_eq!(run(&cfg, &t.path().join("out"), &["--no-cache", "--gauge", "sideways"]).status.code(), Some(2));
}

#[test]
fn abort_policy_resonance_exits_four() {
    let t = TempDir::new().unwrap();
    let text = r#"
[crystal]
preset = "symmetric-reference"
[drive]
photon_energy = 0.1
field = 0.3
[floquet]
resonance = "abort"
n_bands = 8
mu_max = 12
n_k = 8
"#;
    let cfg = write_config(t.path(), "r.toml", text);
    let out = t.path().join("out");
    let o = run(&cfg, &out, &["--no-cache"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["exit_code"], 4);
    let o = run(&write_config(t.path(), "x.toml", &text.replace("\"abort\"", "\"exclude\"")), &out, &["--no-cache"]);
    assert!(o.status.success());
}

#[test]
fn norm_drift_exits_three() {
    let t = TempDir::new().unwrap();
    let text = r#"
[crystal]
preset = "symmetric-reference"
[drive]
photon_energy = 0.156
field = 0.01
[floquet]
n_k = 4
[observables]
mu_report = 4
[tdse]
ramp_cycles = 10
sample_cycles = 1
steps_per_cycle = 64
samples_per_cycle = 16
n_bands = 12
"#;
    let o = run(&write_config(t.path(), "n.toml", text), &t.path().join("out"), &["--no-cache"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identical_runs_diff_to_zero() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "s.toml", SMALL);
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert!(run(&cfg, &a, &["--no-cache"]).status.success());
    assert!(run(&cfg, &b, &["--no-cache"]).status.success());
    let o = wavemix().arg("diff").arg(&a).arg(&b).arg("--json").output().unwrap();
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["max_rel"].as_f64().unwrap(), 0.0);
    assert!(r["entries"].as_array().unwrap().iter().all(|e| e["mismatches"] == 0));
    let text = wavemix().arg("diff").arg(&a).arg(&b).output().unwrap();
    assert!(String::from_utf8_lossy(&text.stdout).contains("largest relative difference 0.000e0"));
}

#[test]
fn gauge_choice_leaves_observables_unchanged() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "s.toml", SMALL);
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert!(run(&cfg, &a, &["--no-cache", "--gauge", "max-real-positive"]).status.success());
    assert!(run(&cfg, &b, &["--no-cache", "--gauge", "random-phase"]).status.success());
    let o = wavemix().arg("diff").arg(&a).arg(&b).arg("--json").output().unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut checked = 0;
    for e in r["entries"].as_array().unwrap() {
        let file = e["file"].as_str().unwrap();
        if file.starts_with("fields/") || file == "fourier.csv" || (file.starts_with("spectra/") && file.ends_with(".csv")) {
            assert!(e["max_abs"].as_f64().unwrap() < 1e-10, "{file} {}: {}", e["field"], e["max_abs"]);
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn inspect_summarizes_run_and_cache_entries() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "s.toml", SMALL);
    let out = t.path().join("out");
    let cache = t.path().join("cache");
    assert!(run(&cfg, &out, &["--cache-dir", cache.to_str().unwrap()]).status.success());
    let o = wavemix().arg("inspect").arg(&out).output().unwrap();
    assert!(o.status.success());
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("run manifest") && s.contains("stage floquet"), "{s}");
    let versions = fs::read_dir(cache.join("floquet")).unwrap().next().unwrap().unwrap().path();
    let entry = fs::read_dir(versions).unwrap().next().unwrap().unwrap().path();
    let o = wavemix().arg("inspect").arg(&entry).output().unwrap();
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("cache entry: stage floquet") && s.contains("μ_max = 8"), "{s}");
    let junk = write_config(t.path(), "junk.json", "{\"a\": 1}");
    assert_eq!(wavemix().arg("inspect").arg(&junk).output().unwrap().status.code(), Some(2));
}

#[test]
fn cache_hit_reproduces_cold_run() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "s.toml", SMALL);
    let cache = t.path().join("cache");
    let (cold, warm) = (t.path().join("cold"), t.path().join("warm"));
    let dir = cache.to_str().unwrap();
    assert!(run(&cfg, &cold, &["--cache-dir", dir]).status.success());
    assert!(run(&cfg, &warm, &["--cache-dir", dir]).status.success());
    assert_eq!(stage_cache(&manifest(&cold), "floquet"), "miss");
    assert_eq!(stage_cache(&manifest(&warm), "floquet"), "hit");
    for f in ["fourier.csv", "fields/rho_1.csv", "spectra/G1.csv", "spectra/G2.csv"] {
        assert_eq!(fs::read(cold.join(f)).unwrap(), fs::read(warm.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn cache_directory_from_environment() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "s.toml", SMALL);
    let cache = t.path().join("env-cache");
    let o = wavemix()
        .env("WAVEMIX_CACHE_DIR", &cache)
        .arg("run")
        .arg(&cfg)
        .arg("-o")
        .arg(t.path().join("out"))
        .arg("-q")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(cache.join("floquet").is_dir() && cache.join("bloch").is_dir());
    assert!(fs::read_dir(cache.join("floquet")).unwrap().count() >= 1);
}
