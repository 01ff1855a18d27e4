use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 6] = ["check-model", "pickands", "asymptotics", "simulate", "lemma43", "report"];

fn gpsup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsup")).args(args).output().unwrap()
}

fn smoke_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p
}

fn run_in(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    gpsup(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const OU_EXP: &str = "seed = 3\nu_values = [3.0]\nn_trials = 2000\n\
    [model]\nfamily = \"stable-exp\"\nalpha = 1.0\nc = 1.0\n\
    [horizon]\nkind = \"exponential\"\nmean = 1.0\n";

#[test]
fn every_subcommand_succeeds_on_the_smoke_config() {
    let out = tempfile::tempdir().unwrap();
    for sub in SUBCOMMANDS {
        let o = run_in(sub, &smoke_config(), out.path(), &[]);
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
    }
    for f in ["check_model.csv", "pickands.csv", "pickands_cache.csv", "asymptotics.csv", "simulate.csv", "lemma43.csv", "report.csv", "report.md"] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }
    let md = fs::read_to_string(out.path().join("report.md")).unwrap();
    assert!(md.contains("report.csv") && md.contains("Generated"));
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides_apply() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, extra) in [(&a, vec![]), (&b, vec![]), (&c, vec!["--seed", "99"])] {
        assert!(run_in("simulate", &smoke_config(), dir.path(), &extra).status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("simulate.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert!(String::from_utf8(read(&c)).unwrap().contains(",99,"));
}

#[test]
fn asymptotics_example_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), OU_EXP);
    let o = run_in("asymptotics", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(dir.path().join("asymptotics.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let value: f64 = row[h.iter().position(|c| c == "value").unwrap()].parse().unwrap();
    assert!((value - 0.01215).abs() < 5e-6, "{value}");
}

#[test]
fn lemma43_target_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{OU_EXP}[lemma43]\nu_values = [2.5]\nx_values = [0.5, 1.0, 2.0]\n"),
    );
    let o = run_in("lemma43", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(dir.path().join("lemma43.csv")).unwrap();
    let idx = r.headers().unwrap().iter().position(|c| c == "target").unwrap();
    let targets: Vec<String> = r
        .records()
        .map(|rec| format!("{:.4}", rec.unwrap()[idx].parse::<f64>().unwrap()))
        .collect();
    assert_eq!(targets, ["0.6065", "0.3679", "0.1353"]);
}

#[test]
fn validation_failures_exit_2_with_the_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (OU_EXP.replace("u_values = [3.0]", "u_values = []"), "asymptotics", "u_values"),
        (format!("{OU_EXP}[grid]\na_coeff = 0.1\n"), "simulate", "grid"),
        (format!("{OU_EXP}[grid]\na_coef = -1.0\n"), "simulate", "grid.a_coef"),
        (OU_EXP.replace("mean = 1.0", "mean = -1.0"), "simulate", "horizon.mean"),
        (OU_EXP.replace("seed = 3\n", ""), "simulate", "seed"),
        (OU_EXP.replace("n_trials = 2000", "n_trials = 10"), "simulate", "n_trials"),
        (OU_EXP.replace("alpha = 1.0", "alpha = 1.5"), "asymptotics", "alpha = 1.5"),
    ];
    for (body, sub, needle) in cases {
        let cfg = write_config(dir.path(), &body);
        let o = run_in(sub, &cfg, dir.path(), &[]);
        assert_eq!(o.status.code(), Some(2), "{needle}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{needle}: {}", stderr(&o));
    }
    let o = gpsup(&["simulate", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_and_budget_failures() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{OU_EXP}[pickands]\ns_ladder = [1.0, 2.0, 3.0]\nsteps = [0.04, 0.02]\nn_paths = 1000\ntolerance = 1e-9\n");
    let cfg = write_config(dir.path(), &body);
    let o = run_in("pickands", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let body = "seed = 3\nu_values = [3.0]\nn_trials = 2000\nmemory_budget = 1000\n\
        [model]\nfamily = \"stable-exp\"\nalpha = 1.0\nc = 1.0\n\
        [horizon]\nkind = \"deterministic\"\nt0 = 1000.0\n";
    let cfg = write_config(dir.path(), &body);
    let o = run_in("simulate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("u = 3"));
}

#[test]
fn pickands_fills_the_cache_used_by_asymptotics() {
    let dir = tempfile::tempdir().unwrap();
    let body = OU_EXP.replace("alpha = 1.0", "alpha = 1.5")
        + "[pickands]\ns_ladder = [1.0, 1.6]\nsteps = [0.04, 0.02]\nn_paths = 4000\n";
    let cfg = write_config(dir.path(), &body);
    assert_eq!(run_in("asymptotics", &cfg, dir.path(), &[]).status.code(), Some(2));
    let o = run_in("pickands", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run_in("asymptotics", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
}
