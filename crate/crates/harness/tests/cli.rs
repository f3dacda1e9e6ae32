use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fibertherm-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fibertherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibertherm")).args(args).output().unwrap()
}

fn run_with(dir: &Path, task: &str, config: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    fibertherm(&[task, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn doubling_pressure_with_defaults() {
    let dir = scratch("pressure");
    let o = run_with(&dir, "pressure", "[system]\nkind = \"doubling\"\n[observable]\nkind = \"digit\"\n");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("out/pressure.csv")).unwrap();
    assert!(csv.starts_with("# fibertherm "));
    assert!(csv.contains("# config_sha256: "));
    let rows = data_rows(&csv);
    let at_zero = rows.iter().find(|r| r[0] == "0").unwrap();
    let p: f64 = at_zero[1].parse().unwrap();
    assert!((p - 2f64.ln()).abs() < 1e-4, "{p}");
    let svg = fs::read_to_string(dir.join("out/pressure.svg")).unwrap();
    assert!(svg.contains("config_sha256"));
}

#[test]
fn embedded_config_reproduces_the_file() {
    let dir = scratch("replay");
    let o = run_with(&dir, "pressure", "[system]\nkind = \"doubling\"\n");
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read_to_string(dir.join("out/pressure.csv")).unwrap();
    let embedded: String = first
        .lines()
        .skip_while(|l| *l != "# config:")
        .skip(1)
        .take_while(|l| l.starts_with("#   "))
        .map(|l| format!("{}\n", &l[4..]))
        .collect();
    assert!(!embedded.is_empty());
    let replay = dir.join("replay");
    fs::create_dir_all(&replay).unwrap();
    let o = run_with(&replay, "pressure", &embedded);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(replay.join("out/pressure.csv")).unwrap(), first);
}

#[test]
fn missing_matrix_exits_one_naming_the_field() {
    let dir = scratch("matrix");
    let o = run_with(&dir, "pressure", "[system]\nkind = \"affine\"\nalpha = 0.414213562373095\n");
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["field"], "system.matrix");
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("out/error.json")).unwrap()).unwrap();
    assert_eq!(written, e);
}

#[test]
fn spacing_below_gap_exits_two() {
    let dir = scratch("spacing");
    let config = "[system]\nkind = \"cat\"\nalpha = 0.414213562373095\n\
                  [shadow]\nepsilon = 0.1\nspacing = 3\n\
                  [[shadow.intervals]]\na = 0\nb = 2\nanchor = [0.1, 0.2]\n\
                  [[shadow.intervals]]\na = 6\nb = 8\nanchor = [0.7, 0.4]\n";
    let o = run_with(&dir, "shadow", config);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "SpacingTooSmall");
}

#[test]
fn shadow_at_the_gap_writes_a_certificate() {
    let dir = scratch("shadow");
    let config = "[system]\nkind = \"cat\"\nalpha = 0.414213562373095\n\
                  [shadow]\nepsilon = 0.1\n\
                  [[shadow.intervals]]\na = 0\nb = 4\nanchor = [0.1, 0.2]\n\
                  [[shadow.intervals]]\na = 20\nb = 25\nanchor = [0.7, 0.4]\n";
    let o = run_with(&dir, "shadow", config);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&fs::read_to_string(dir.join("out/certificate.csv")).unwrap());
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() < 0.1));
}

#[test]
fn budget_refusal_exits_two() {
    let dir = scratch("budget");
    let cfg = dir.join("config.toml");
    fs::write(&cfg, "[system]\nkind = \"cat\"\nalpha = 0.414213562373095\n[params]\nepsilon = 0.05\n").unwrap();
    let out = dir.join("out");
    let o = fibertherm(&["pressure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "BudgetExceeded");
}

#[test]
fn tasks_other_than_selftest_need_a_config() {
    let o = fibertherm(&["katok"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["field"], "--config");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = scratch("unknown");
    let o = run_with(&dir, "pressure", "[system]\nkind = \"doubling\"\n[params]\nepsilom = 0.1\n");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["field"], "epsilom");
}
