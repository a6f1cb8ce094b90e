use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lpp_cli::manifest::{ChunkStatus, RunManifest};
use lpp_cli::raw::write_raw;
use lpp_cli::{config::config_hash, run_experiment};
use lpp_core::experiments::{build, sample_range};
use lpp_core::{ExperimentConfig, ExperimentReport};

fn lpp_lab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lpp-lab"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("LPP_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

const CORR: &str = r#"{"experiment":"corr_decay","n":64,"r_grid":[4,8,16],"samples":40,"batches":4,"chunk_size":8,"master_seed":1}"#;

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn single_error_line(o: &Output, prefix: &str) {
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(prefix), "{err}");
}

#[test]
fn repeated_runs_write_identical_raw_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CORR);
    let mut raws = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = lpp_lab(
            &["run", "corr_decay", "--config", cfg.to_str().unwrap(), "--workers", workers, "--out", out.to_str().unwrap()],
            &[],
        );
        assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
        raws.push(std::fs::read(out.join("raw.csv")).unwrap());
        assert!(!out.join("parts").exists());
    }
    assert_eq!(raws[0], raws[1]);
    let text = String::from_utf8(raws[0].clone()).unwrap();
    assert_eq!(text.lines().next(), Some("sample_index,T_4,T_8,T_16,T_64"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn report_command_reproduces_the_written_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CORR);
    let out = dir.path().join("out");
    let o = lpp_lab(&["run", "corr_decay", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    let code = o.status.code();
    let written = std::fs::read_to_string(out.join("report.json")).unwrap();
    let r = lpp_lab(&["report", out.join("raw.csv").to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), code, "{}", stderr(&r));
    assert_eq!(String::from_utf8(r.stdout).unwrap(), written);

    let report: ExperimentReport = serde_json::from_str(&written).unwrap();
    let manifest = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(config_hash(&report.config), manifest.config_hash);
    assert!(manifest.is_complete());
    assert_eq!(manifest.sample_range, [0, 40]);
    assert_eq!(manifest.chunks.len(), 5);
    assert!(report.recompute_pass().unwrap());
}

#[test]
fn report_rejects_a_tampered_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CORR);
    let out = dir.path().join("out");
    lpp_lab(&["run", "corr_decay", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    let mpath = out.join("manifest.json");
    let mut m = RunManifest::load(&mpath).unwrap();
    m.config.master_seed = 99;
    m.save(&mpath).unwrap();
    let r = lpp_lab(&["report", out.join("raw.csv").to_str().unwrap()], &[]);
    single_error_line(&r, "error: manifest config does not match");
}

#[test]
fn regime_violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"corr_decay","n":2000,"r_grid":[32,64,128,256,512],"samples":200}"#,
    );
    let o = lpp_lab(&["run", "corr_decay", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()], &[]);
    single_error_line(&o, "error: regime violation");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CORR);
    let c = cfg.to_str().unwrap();
    single_error_line(&lpp_lab(&["run", "warp_drive", "--config", c], &[]), "error: unknown experiment");
    single_error_line(&lpp_lab(&["run", "transversal", "--config", c], &[]), "error: config");
    single_error_line(&lpp_lab(&["run", "corr_decay", "--config", "/nonexistent.json"], &[]), "error: reading config");
    let bad = write_config(dir.path(), "bad.json", r#"{"experiment":"corr_decay","n":64,"r_grid":[4,8,16],"samples":40,"colour":1}"#);
    single_error_line(&lpp_lab(&["run", "corr_decay", "--config", bad.to_str().unwrap()], &[]), "error: config");
    single_error_line(&lpp_lab(&["run", "corr_decay"], &[]), "error:");
    single_error_line(&lpp_lab(&["explode"], &[]), "error:");
    single_error_line(&lpp_lab(&["run", "corr_decay", "--config", c, "--workers", "0"], &[]), "error:");
    single_error_line(&lpp_lab(&["run", "corr_decay", "--config", c], &[("LPP_LAB_THREADS", "many")]), "error: LPP_LAB_THREADS");
}

#[test]
fn failing_experiments_exit_with_two_and_still_write_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"transversal","r_grid":[8,16],"k_grid":[0.5],"samples":20,"batches":4,
            "tolerances":{"tail_k":0.5,"tail_prob":0.0}}"#,
    );
    let out = dir.path().join("out");
    let o = lpp_lab(&["run", "transversal", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let report: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(!report.pass);
    assert!(report.failures().contains(&"tail_r8_k0.5"));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("transversal: FAIL"));
}

#[test]
fn threads_variable_is_a_workers_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CORR);
    let out = dir.path().join("out");
    lpp_lab(
        &["run", "corr_decay", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[("LPP_LAB_THREADS", "4")],
    );
    let m = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.config.workers, 4);
}

#[test]
fn interrupted_runs_resume_from_completed_chunks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: ExperimentConfig = serde_json::from_str(CORR).unwrap();
    let fresh = dir.path().join("fresh");
    run_experiment(&cfg, &fresh).unwrap();

    // An interrupted run: chunks 0 and 2 done, the rest pending.
    let out = dir.path().join("resumed");
    let mut normalized = cfg.clone();
    normalized.out_path = Some(out.display().to_string());
    let exp = build(&normalized).unwrap();
    let mut manifest = RunManifest::new(
        exp.config(),
        lpp_cli::manifest::Outputs {
            raw: "raw.csv".into(),
            report: "report.json".into(),
            manifest: "manifest.json".into(),
        },
    );
    std::fs::create_dir_all(out.join("parts")).unwrap();
    for c in [0usize, 2] {
        let rec = &mut manifest.chunks[c];
        let part = sample_range(exp.as_ref(), rec.start..rec.end).unwrap();
        write_raw(&out.join("parts").join(format!("chunk_{c:06}.csv")), &part).unwrap();
        rec.status = ChunkStatus::Complete;
    }
    manifest.save(&out.join("manifest.json")).unwrap();

    let outcome = run_experiment(&cfg, &out).unwrap();
    assert_eq!(outcome.resumed_chunks, 2);
    assert_eq!(std::fs::read(out.join("raw.csv")).unwrap(), std::fs::read(fresh.join("raw.csv")).unwrap());
    assert!(RunManifest::load(&out.join("manifest.json")).unwrap().is_complete());

    // A completed run is never resumed: rerunning recomputes everything.
    assert_eq!(run_experiment(&cfg, &out).unwrap().resumed_chunks, 0);
}

#[test]
fn list_and_selftest() {
    let o = lpp_lab(&["list"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for k in lpp_core::ExperimentKind::ALL {
        assert!(text.contains(k.name()));
    }
    let o = lpp_lab(&["selftest", "--fields", "50"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(": PASS")).count(), 3);
}
