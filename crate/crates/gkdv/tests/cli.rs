use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn gkdv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkdv"))
        .args(args)
        .current_dir(dir)
        .env_remove("GKDV_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Shared cache so the profile table is built once per test.
fn cached(dir: &TempDir) -> String {
    let cache = dir.path().join("cache");
    let o = gkdv(dir.path(), &["profiles", "--xmax", "30", "--n", "6001", "--out", cache.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    cache.to_str().unwrap().to_string()
}

#[test]
fn profiles_cache_round_trip() {
    let dir = TempDir::new().unwrap();
    let cache = cached(&dir);
    let file = Path::new(&cache).join("profiles_x30_n6001.bin");
    let first = fs::read(&file).unwrap();
    assert_eq!(&first[..8], b"GKDVPROF");
    let o = gkdv(dir.path(), &["profiles", "--xmax", "30", "--n", "6001", "--out", &cache]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("cache hit"), "{}", stdout(&o));
    assert_eq!(fs::read(&file).unwrap(), first);
}

#[test]
fn small_domain_is_a_setup_failure() {
    let dir = TempDir::new().unwrap();
    let o = gkdv(dir.path(), &["profiles", "--xmax", "5", "--out", "c"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DomainTooSmall"), "{}", stderr(&o));
}

#[test]
fn environment_overrides_cache_flag() {
    let dir = TempDir::new().unwrap();
    let env_dir = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_gkdv"))
        .args(["profiles", "--xmax", "20", "--n", "2001", "--cache", "from_flag"])
        .current_dir(dir.path())
        .env("GKDV_CACHE", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(env_dir.join("profiles_x20_n2001.bin").exists());
    assert!(!dir.path().join("from_flag").exists());
}

#[test]
fn corrupted_cache_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("bad");
    fs::create_dir_all(&cache).unwrap();
    fs::write(cache.join("profiles_x30_n6001.bin"), b"NOTACACHEFILE").unwrap();
    let o = gkdv(dir.path(), &["verify", "--cache", cache.to_str().unwrap(), "--skip", "pde"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("magic mismatch"), "{}", stderr(&o));
}

#[test]
fn verify_subset_writes_report() {
    let dir = TempDir::new().unwrap();
    let cache = cached(&dir);
    let o = gkdv(dir.path(), &["verify", "--cache", &cache, "--skip", "pde", "--threads", "2", "--out", "rep"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
    let csv = fs::read_to_string(dir.path().join("rep/report.csv")).unwrap();
    assert!(csv.starts_with("id,name,target,measured,tolerance,pass,anchor\n"));
    assert_eq!(csv.lines().count(), 12);
    assert!(dir.path().join("rep/timings.log").exists());
    let json = fs::read_to_string(dir.path().join("rep/report.json")).unwrap();
    assert!(json.contains("\"config_hash\""));
}

#[test]
fn modulate_writes_identical_trajectories() {
    let dir = TempDir::new().unwrap();
    let cache = cached(&dir);
    let cfg = config("two_bubble.json");
    let run = |out: &str| {
        let o = gkdv(
            dir.path(),
            &["modulate", "--config", cfg.to_str().unwrap(), "--sn", "-1e4", "--s0", "-1e2", "--cache", &cache, "--out", out,
              "--xi", "0.01,0", "--zeta", "0,0.02"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(dir.path().join(out).join("trajectory.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("s,tau_1,mu_1,y_1,a_1,mu_bar_1,tau_bar_1,y_bar_1,f_1,r_1,e_1,tau_2,"));
    assert!(header.ends_with(",e_2,N"));
}

#[test]
fn shoot_reports_history() {
    let dir = TempDir::new().unwrap();
    let cache = cached(&dir);
    let cfg = config("forced_two_bubble.json");
    let o = gkdv(dir.path(), &["shoot", "--config", cfg.to_str().unwrap(), "--cache", &cache, "--out", "s"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("s/shooting.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iteration,xi_1,xi_2,zeta_1,zeta_2,exit_s,N_exit");
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[6] <= 1.0);
    assert_eq!(last[5], -100.0);
}

#[test]
fn evolve_writes_diagnostics_and_checkpoint() {
    let dir = TempDir::new().unwrap();
    let cache = cached(&dir);
    let o = gkdv(
        dir.path(),
        &["evolve", "--init", "ansatz", "--s", "-50", "--tend", "1.02x", "--samples", "4", "--cache", &cache, "--out", "e"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("e/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,mass,energy,height_1,position_1,height_2,position_2\n"));
    let t: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(t.len(), 5);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    let ckpt = fs::read(dir.path().join("e/final.gkdvfld")).unwrap();
    assert_eq!(&ckpt[..8], b"GKDVFLD1");
    assert_eq!(ckpt.len(), 32 + 8 * 4096);

    let o = gkdv(
        dir.path(),
        &["evolve", "--init", "e/final.gkdvfld", "--tend", "1.01x", "--samples", "2", "--cache", &cache, "--out", "f"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_input_exit_codes() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"K": 2, "ells": [1, 2], "signs": [1, 1]}"#).unwrap();
    let o = gkdv(dir.path(), &["shoot", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[2]"));
    let o = gkdv(dir.path(), &["verify", "--skip", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gkdv(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
