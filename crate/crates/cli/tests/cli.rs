use spinnet::stabilizer_protocol::extract_round_distribution;
use spinnet::{NoiseParams, StabilizerType};
use spinnet_cli::cache::{Cache, CacheError, CacheKey, CACHE_ENV};
use std::path::Path;
use std::process::{Command, Output};

fn spinnet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinnet")).args(args).current_dir(dir).env_remove(CACHE_ENV).output().unwrap()
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

#[test]
fn ghz_verify_reports_all_branches() {
    let d = tempfile::tempdir().unwrap();
    let o = spinnet(&["ghz-verify", "--out", "g"], d.path());
    let (out, err) = text(&o);
    assert_eq!(o.status.code(), Some(0), "{err}");
    assert!(out.contains("4/4 branches exact"), "{out}");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("g/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "ghz-verify");
    assert_eq!(manifest["core_version"], spinnet::VERSION);
    assert_eq!(manifest["config"]["seed"], 1);
    assert_eq!(manifest["config"]["ghz"]["trials"], 256);
}

#[test]
fn unknown_key_is_a_config_error_naming_the_key() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "c.json", r#"{"stark": {"stark": {"etaa": 2.0}}}"#);
    let o = spinnet(&["stark", "--config", &c], d.path());
    let (_, err) = text(&o);
    assert_eq!(o.status.code(), Some(2));
    assert!(err.contains("stark.stark.etaa"), "{err}");
}

#[test]
fn invalid_values_are_config_errors() {
    let d = tempfile::tempdir().unwrap();
    for (body, key, cmd) in [
        (r#"{"threads": 0}"#, "threads", "timing"),
        (r#"{"threshold": {"shots": 10}}"#, "threshold.shots", "threshold"),
        (r#"{"shuttle": {"path": [0, 2]}}"#, "shuttle.path", "shuttle"),
        (r#"{"timing": {"budget": {"subcycles": 5}}}"#, "timing.budget", "timing"),
        (r#"{"experiment": "stark"}"#, "experiment", "timing"),
        (r#"{"seed": "x"}"#, "seed", "timing"),
    ] {
        let c = write(d.path(), "c.json", body);
        let o = spinnet(&[cmd, "--config", &c], d.path());
        let (_, err) = text(&o);
        assert_eq!(o.status.code(), Some(2), "{body}: {err}");
        assert!(err.contains(&format!("`{key}`")), "{body}: {err}");
    }
    let o = spinnet(&["timing", "--config", "missing.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "taken", "");
    let o = spinnet(&["timing", "--out", "taken"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}", text(&o).1);
}

#[test]
fn flags_override_config_and_manifest_reruns() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "c.json", r#"{"seed": 5, "ghz": {"trials": 20}}"#);
    let o = spinnet(&["ghz-verify", "--config", &c, "--seed", "9", "--out", "a"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("a/config.json")).unwrap()).unwrap();
    assert_eq!(cfg["seed"], 9);
    assert_eq!(cfg["ghz"]["trials"], 20);
    // the written config reproduces the run
    let o = spinnet(&["ghz-verify", "--config", "a/config.json", "--out", "b"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(d.path().join("a/ghz.csv")).unwrap(), std::fs::read(d.path().join("b/ghz.csv")).unwrap());
}

#[test]
fn timing_csv_columns_and_targets() {
    let d = tempfile::tempdir().unwrap();
    let o = spinnet(&["timing", "--out", "t"], d.path());
    let (out, _) = text(&o);
    assert!(out.contains("(1.230, 4.200, 33.900)"), "{out}");
    let csv = std::fs::read_to_string(d.path().join("t/timing.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "f_rabi_hz,cycle_time_s,cycle_rate_hz");
    assert_eq!(csv.lines().count(), 52);
}

fn cache_pair() -> (NoiseParams, spinnet::RoundErrorDistribution) {
    let n = NoiseParams::new(1e-4, 1e-3, 2e-3);
    (n, extract_round_distribution(StabilizerType::Z, &n).unwrap())
}

#[test]
fn cache_roundtrip_is_bit_exact() {
    let d = tempfile::tempdir().unwrap();
    let cache = Cache::new(d.path());
    let (n, dist) = cache_pair();
    let key = CacheKey::new(&n, StabilizerType::Z);
    assert!(cache.load(&key).unwrap().is_none());
    cache.store(&key, &dist).unwrap();
    let back = cache.load(&key).unwrap().unwrap();
    assert!(back.dense().iter().zip(dist.dense()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn cache_keys_separate_parameters() {
    let n = NoiseParams::new(1e-4, 1e-3, 2e-3);
    let base = CacheKey::new(&n, StabilizerType::Z);
    assert_ne!(base.digest(), CacheKey::new(&NoiseParams { p_sh: 3e-3, ..n }, StabilizerType::Z).digest());
    assert_ne!(base.digest(), CacheKey::new(&n, StabilizerType::X).digest());
    let mut conv = n;
    conv.convention.shuttle_hops = 2;
    assert_ne!(base.digest(), CacheKey::new(&conv, StabilizerType::Z).digest());
    assert_eq!(base.digest(), CacheKey::new(&n, StabilizerType::Z).digest());
}

#[test]
fn corrupted_cache_file_fails_checksum() {
    let d = tempfile::tempdir().unwrap();
    let cache = Cache::new(d.path());
    let (n, dist) = cache_pair();
    let key = CacheKey::new(&n, StabilizerType::Z);
    let path = cache.store(&key, &dist).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    // flip one digit inside the embedded distribution document
    let at = text.find("probability").unwrap();
    let digit = at + text[at..].find(|c: char| c.is_ascii_digit() && c != '0').unwrap();
    let mut bytes = text.into_bytes();
    bytes[digit] = if bytes[digit] == b'1' { b'2' } else { b'1' };
    std::fs::write(&path, bytes).unwrap();
    assert!(matches!(cache.load(&key), Err(CacheError::Checksum(_))));
}

#[test]
fn mismatched_key_under_a_digest_is_refused() {
    let d = tempfile::tempdir().unwrap();
    let cache = Cache::new(d.path());
    let (n, dist) = cache_pair();
    let key = CacheKey::new(&n, StabilizerType::Z);
    let other = CacheKey::new(&NoiseParams { p_sh: 9e-3, ..n }, StabilizerType::Z);
    let written = cache.store(&other, &dist).unwrap();
    std::fs::rename(written, cache.path_for(&key)).unwrap();
    assert!(matches!(cache.load(&key), Err(CacheError::Collision(_))));
}

#[test]
fn cli_uses_cache_dir_from_environment_and_reports_corruption() {
    let d = tempfile::tempdir().unwrap();
    let cache_dir = d.path().join("store");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_spinnet"))
            .args(["round-distribution", "--out", "r"])
            .current_dir(d.path())
            .env(CACHE_ENV, &cache_dir)
            .output()
            .unwrap()
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0));
    assert!(text(&first).0.contains("cache stored"));
    let files: Vec<_> = std::fs::read_dir(&cache_dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 2);
    let csv1 = std::fs::read(d.path().join("r/round_distribution.csv")).unwrap();
    let second = run();
    assert!(text(&second).0.contains("cache hit"));
    assert_eq!(csv1, std::fs::read(d.path().join("r/round_distribution.csv")).unwrap());
    // truncate one file
    let body = std::fs::read(&files[0]).unwrap();
    std::fs::write(&files[0], &body[..body.len() / 2]).unwrap();
    let third = run();
    assert_eq!(third.status.code(), Some(3));
    assert!(text(&third).1.contains("unreadable"), "{}", text(&third).1);
}

fn same_csvs(cmd: &str, config: &str, files: &[&str]) {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "c.json", config);
    for (threads, out) in [("1", "one"), ("3", "three")] {
        let o = spinnet(&[cmd, "--config", &c, "--threads", threads, "--out", out], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", text(&o).1);
    }
    for f in files {
        let a = std::fs::read(d.path().join("one").join(f)).unwrap();
        let b = std::fs::read(d.path().join("three").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd}: {f} differs between thread counts");
    }
}

#[test]
fn csvs_do_not_depend_on_thread_count() {
    same_csvs("ghz-verify", r#"{"ghz": {"trials": 500}}"#, &["ghz.csv"]);
    same_csvs(
        "threshold",
        r#"{"seed": 11, "threshold": {"distances": [3, 5], "grid": [0.004, 0.008], "shots": 1000}}"#,
        &["threshold.csv"],
    );
    same_csvs("timing", "{}", &["timing.csv"]);
    same_csvs(
        "shuttle",
        r#"{"shuttle": {"durations_ns": [0.05, 0.1], "propagation": {"dt_ns": 4e-6, "snapshot_stride": 100}}}"#,
        &["shuttle_scan.csv", "shuttle_trajectory.csv"],
    );
}

#[test]
fn threshold_csv_columns() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "c.json", r#"{"threshold": {"distances": [3, 5], "grid": [0.004], "shots": 1000}}"#);
    let o = spinnet(&["threshold", "--config", &c, "--out", "th"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o).1);
    let csv = std::fs::read_to_string(d.path().join("th/threshold.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "d,parameter,rate,ci_low,ci_high,shots,seed");
    assert_eq!(csv.lines().count(), 3);
    assert!(d.path().join("th/threshold.json").exists());
}

#[test]
fn shuttle_csv_columns_and_calibration_manifest() {
    let d = tempfile::tempdir().unwrap();
    let c = write(
        d.path(),
        "c.json",
        r#"{"shuttle": {"durations_ns": [0.05], "propagation": {"dt_ns": 4e-6, "snapshot_stride": 100}}}"#,
    );
    let o = spinnet(&["shuttle", "--config", &c, "--out", "s"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o).1);
    let csv = std::fs::read_to_string(d.path().join("s/shuttle_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "duration_ns,t_ns,x_mean_nm,x_std_nm,fidelity,ez_v_per_nm,nu_hz,phase_error");
    let scan = std::fs::read_to_string(d.path().join("s/shuttle_scan.csv")).unwrap();
    assert_eq!(scan.lines().next().unwrap(), "duration_ns,final_fidelity,norm_drift,final_phase_error,nu_avg_hz");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("s/manifest.json")).unwrap()).unwrap();
    let cal = &m["summary"]["calibration"];
    assert!((cal["orbital_gap_mev"].as_f64().unwrap() - 3.0).abs() < 1e-3);
    assert!((cal["tunnel_coupling_mev"].as_f64().unwrap() - 0.025).abs() < 1e-4);
}
