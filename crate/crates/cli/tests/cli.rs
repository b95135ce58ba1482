//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use naifs_pressure_cli::app::config_hash;
use naifs_pressure_cli::cache::Cache;
use naifs_pressure_cli::config;
use naifs_pressure_cli::report::read_report;
use naifs_pressure_cli::tables::read_table;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_naifs-pressure");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bin(cache: Option<&Path>) -> Command {
    let mut c = Command::new(BIN);
    c.env("PRESSURE_WORKERS", "2");
    match cache {
        Some(dir) => c.env("PRESSURE_CACHE_DIR", dir),
        // a path below a regular file can never be created
        None => c.env("PRESSURE_CACHE_DIR", Path::new(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml").join("cache")),
    };
    c
}

fn run(cfg: &Path, out: &Path, cache: Option<&Path>, extra: &[&str]) -> Output {
    let mut c = bin(cache);
    c.arg("run").arg(cfg).arg("--out").arg(out).args(extra);
    c.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
seed = 3

[system]
space = "symbolic"
alphabet = 2
length = 14
period = [[{ kind = "shift" }]]

[target]
resolution = 9

[grids]
n_range = [2, 3, 4, 5]
eps_grid = [0.5, 0.25]

[task]
kind = "sup_entropy"
"#;

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run_meta.json")).unwrap()).unwrap()
}

#[test]
fn invalid_config_lists_every_problem_and_exits_1() {
    let tmp = TempDir::new().unwrap();
    let text = SMALL.replace("eps_grid", "epsilonn").replace("n_range = [2, 3, 4, 5]", "n_range = [2, 3, 4, 5]\ndelta_grid = [0.1, 0.2]");
    let cfg = write(tmp.path(), "bad.toml", &text);
    let out = run(&cfg, &tmp.path().join("out"), None, &["--no-cache"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grids.epsilonn: unknown key (did you mean `eps_grid`?)"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn increasing_delta_grid_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let text = SMALL.replace("eps_grid = [0.5, 0.25]", "eps_grid = [0.5, 0.25]\ndelta_grid = [0.1, 0.2]");
    let cfg = write(tmp.path(), "bad.toml", &text);
    let out = run(&cfg, &tmp.path().join("out"), None, &["--no-cache"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grids.delta_grid: must be strictly decreasing"));
}

#[test]
fn second_run_hits_the_cache_with_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let cache = tmp.path().join("cache");
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a, Some(&cache), &[]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, Some(&cache), &[]).status.code(), Some(0));
    assert_eq!(meta(&a)["cache"]["hits"], 0);
    assert!(meta(&b)["cache"]["hits"].as_u64().unwrap() > 0);
    for f in ["report.json", "entropy.csv", "entropy_slopes.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tampered_cache_record_is_recomputed() {
    let tmp = TempDir::new().unwrap();
    let cache = tmp.path().join("cache");
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a, Some(&cache), &[]).status.code(), Some(0));
    for e in std::fs::read_dir(&cache).unwrap() {
        let p = e.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        // corrupt the payload but keep the record parseable
        std::fs::write(&p, text.replacen("\"count\":", "\"count\": 1, \"x\":", 1).replacen("0.", "9.", 1)).unwrap();
    }
    assert_eq!(run(&cfg, &b, Some(&cache), &[]).status.code(), Some(0));
    let m = meta(&b);
    assert_eq!(m["cache"]["hits"], 0);
    assert!(m["cache"]["rejected"].as_u64().unwrap() > 0, "{m}");
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
}

#[test]
fn unwritable_cache_directory_only_warns() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out = run(&cfg, &tmp.path().join("a"), None, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("caching disabled"));
    assert_eq!(meta(&tmp.path().join("a"))["cache_enabled"], false);
}

#[test]
fn different_seed_gives_a_different_key() {
    let a = config::parse(SMALL).unwrap();
    let mut b = a.clone();
    b.seed += 1;
    assert_ne!(config_hash(&a), config_hash(&b));
    assert_ne!(Cache::key("sup_entropy", &a.canonical()), Cache::key("sup_entropy", &b.canonical()));
    assert_eq!(Cache::key("sup_entropy", &a.canonical()), Cache::key("sup_entropy", &a.clone().canonical()));
}

#[test]
fn beam_mode_flags_every_estimate_as_lower_bound() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[system]
space = "circle"
period = [[{ kind = "affine_mod1", slope = 2 }, { kind = "affine_mod1", slope = 3 }]]

[target]
resolution = 2000

[grids]
n_range = [3, 4, 5, 6, 7, 8]
eps_grid = [0.5, 0.25]
metric = "dn"
node_budget = 64
beam_width = 8

[task]
kind = "sup_entropy"
"#;
    let cfg = write(tmp.path(), "beam.toml", text);
    let out_dir = tmp.path().join("out");
    let out = run(&cfg, &out_dir, None, &["--no-cache"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_report(&out_dir).unwrap();
    let est = &r.records[0].estimates;
    assert!(!est.is_empty());
    for e in est {
        assert_eq!(serde_json::to_value(e.mode).unwrap(), "lower_bound", "{}", e.name);
    }
}

#[test]
fn output_tables_round_trip() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("a");
    assert_eq!(run(&cfg, &out, None, &["--no-cache"]).status.code(), Some(0));
    let report = read_report(&out).unwrap();
    for t in &report.records[0].tables {
        let text = std::fs::read_to_string(out.join(&t.file)).unwrap();
        let table = read_table(&text).unwrap();
        assert_eq!(table.name, t.name);
        assert_eq!(table.rows.len(), t.rows);
        assert_eq!(read_table(&table.to_text()).unwrap(), table);
    }
}

#[test]
fn worker_counts_give_identical_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("two_shift_check_suite.toml");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a, None, &["--no-cache", "--workers", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, None, &["--no-cache", "--workers", "4"]).status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
}

#[test]
fn bundled_check_suite_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("a");
    let o = run(&configs().join("two_shift_check_suite.toml"), &out, None, &["--no-cache"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = read_report(&out).unwrap();
    assert!(r.checks.len() > 20);
    let modules: std::collections::BTreeSet<&str> = r.checks.iter().map(|c| c.module.as_str()).collect();
    assert_eq!(modules.len(), 6, "{modules:?}");
    assert_eq!(r.check_failures(), 0);
}

#[test]
fn every_bundled_config_is_valid() {
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        let cfg = config::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        naifs_pressure_cli::setup::Experiment::build(&cfg).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn sweep_writes_one_directory_per_combination() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let o = bin(None)
        .arg("sweep")
        .arg(configs().join("sweep_example.toml"))
        .arg("--out")
        .arg(&out)
        .arg("--no-cache")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dirs: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 4);
    let hashes: std::collections::BTreeSet<String> = dirs.iter().map(|d| read_report(d).unwrap().config_hash).collect();
    assert_eq!(hashes.len(), 4);
}

#[test]
fn run_warns_about_sweep_section_and_show_prints_summary() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("a");
    let o = run(&configs().join("sweep_example.toml"), &out, None, &["--no-cache"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[sweep] section is ignored"));
    let s = bin(None).arg("show").arg(&out).output().unwrap();
    assert_eq!(s.status.code(), Some(0));
    let text = String::from_utf8_lossy(&s.stdout);
    assert!(text.contains("task sup_entropy") && text.contains("entropy"), "{text}");
    let missing = bin(None).arg("show").arg(tmp.path().join("nope")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
