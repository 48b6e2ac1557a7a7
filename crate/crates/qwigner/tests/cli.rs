use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qwigner::format::{read_distribution, read_series};
use tempfile::TempDir;

fn qwigner(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwigner"))
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_three_steps_from_right() {
    let dir = TempDir::new().unwrap();
    let out = qwigner(&["simulate", "--steps", "3", "--coin-spinor", "1,0,0,0"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_distribution(&dir.path().join("distribution.csv")).unwrap();
    let got: Vec<(u64, i64, f64)> = rows.iter().map(|r| (r.t, r.n, r.p)).collect();
    let expected = [(3, -3, 0.125), (3, -1, 0.125), (3, 1, 0.625), (3, 3, 0.125)];
    assert_eq!(got.len(), 4);
    for (g, e) in got.iter().zip(expected) {
        assert_eq!((g.0, g.1), (e.0, e.1));
        assert!((g.2 - e.2).abs() < 1e-12);
    }
}

#[test]
fn simulate_zero_steps() {
    let dir = TempDir::new().unwrap();
    assert!(qwigner(&["simulate", "--steps", "0"], dir.path()).status.success());
    let rows = read_distribution(&dir.path().join("distribution.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].t, rows[0].n), (0, 0));
    assert!((rows[0].p - 1.0).abs() < 1e-15);

    let out = qwigner(&["simulate", "--steps", "0", "--initial", "cat", "--cat-a", "10", "--format", "json"], dir.path());
    assert!(out.status.success());
    let rows = read_distribution(&dir.path().join("distribution.json")).unwrap();
    let got: Vec<(i64, f64)> = rows.iter().map(|r| (r.n, r.p)).collect();
    assert_eq!(got.len(), 2);
    assert_eq!((got[0].0, got[1].0), (-10, 10));
    assert!(got.iter().all(|&(_, p)| (p - 0.5).abs() < 1e-15));
    let sigma = read_series(&dir.path().join("sigma.json")).unwrap();
    assert!((sigma[0].value - 10.0).abs() < 1e-12);
}

#[test]
fn config_file_sits_under_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# three steps\nsteps = 3\ncoin-spinor = 1,0,0,0\nformat = json\n").unwrap();
    let out = qwigner(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_distribution(&dir.path().join("distribution.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.t == 3));
}

#[test]
fn series_subcommands() {
    let dir = TempDir::new().unwrap();
    let out = qwigner(&["negativity", "--initial", "cat", "--cat-a", "4", "--steps", "6", "--k-points", "512"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_series(&dir.path().join("negativity.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), (0..=6).collect::<Vec<_>>());
    assert!((rows[0].value - 1.0).abs() < 1e-6);
    assert!(rows.iter().all(|r| r.value >= -1e-9));

    let out = qwigner(&["entropy", "--preset", "fig7", "--steps", "10"], dir.path());
    assert!(out.status.success());
    for (label, s0) in [("a0", 0.0), ("a4", 1.0), ("a30", 1.0)] {
        let rows = read_series(&dir.path().join(format!("entropy_{label}.csv"))).unwrap();
        assert_eq!(rows.len(), 11);
        assert!((rows[0].value - s0).abs() < 1e-10, "{label}");
        assert!(rows.iter().all(|r| r.value <= 1.0 + 1e-10));
    }
}

#[test]
fn wigner_field_exports_even_rows_only() {
    let dir = TempDir::new().unwrap();
    let out = qwigner(
        &["wigner-field", "--initial", "cat", "--cat-a", "10", "--steps", "4", "--times", "0,4", "--k-points", "32"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for t in [0, 4] {
        let text = fs::read_to_string(dir.path().join(format!("wigner_t{t}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,n,k,w_rr,w_ll,re_w_rl,im_w_rl"));
        for line in lines {
            let n: i64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(n.rem_euclid(2), 0);
        }
    }
}

#[test]
fn verify_passes_and_catches_corruption() {
    let dir = TempDir::new().unwrap();
    let out = qwigner(&["verify", "--steps", "20"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("PASS  recursion vs transform"));
    assert!(!report.contains("FAIL"));

    let out = qwigner(&["verify", "--steps", "5", "--corrupt-field"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| qwigner(args, dir.path()).status.code();
    assert_eq!(code(&["simulate", "--theta", "nope"]), Some(1));
    assert_eq!(code(&["simulate", "--k-points", "2"]), Some(1));
    assert_eq!(code(&["simulate", "--initial", "cat"]), Some(1));
    assert_eq!(code(&["simulate", "--coin-spinor", "1,0,0.5,0"]), Some(1));
    assert_eq!(code(&["wigner-field", "--steps", "3", "--times", "5"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = qwigner(&["simulate", "--steps", "1"], &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file"));
}

#[test]
fn spinor_slightly_off_is_normalized_with_warning() {
    let dir = TempDir::new().unwrap();
    let out = qwigner(&["simulate", "--steps", "2", "--coin-spinor", "1.0001,0,0,0"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let total: f64 = read_distribution(&dir.path().join("distribution.csv")).unwrap().iter().map(|r| r.p).sum();
    assert!((total - 1.0).abs() < 1e-12);
}
