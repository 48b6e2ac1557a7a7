use std::fs;
use std::path::PathBuf;

use qwigner::commands::{run_negativity_series, run_simulate, run_wigner_field};
use qwigner::config::{OutputFormat, Settings};
use qwigner::fast::FftTransform;
use qwigner::format::{read_distribution, read_field, write_field};
use qwigner_core::wigner::{field_grid_for, WignerTransform};
use qwigner_core::{coin_matrix, evolve, negativity, EvolutionMethod, InitialStateSpec, KGrid};
use tempfile::TempDir;

fn config(text: &str, out: &std::path::Path) -> qwigner::config::ExperimentConfig {
    let mut s = Settings::parse_kv(text).unwrap();
    s.output = Some(out.to_path_buf());
    s.resolve().unwrap()
}

fn snapshot(dir: &std::path::Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (PathBuf::from(p.file_name().unwrap()), bytes)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn identical_configs_give_identical_bytes() {
    let text = "steps = 12\ninitial = cat\ncat-a = 2\nk-points = 64\ntimes = 0,5,12\n";
    let mut runs = Vec::new();
    for format in ["csv", "json"] {
        for _ in 0..2 {
            let dir = TempDir::new().unwrap();
            let cfg = config(&format!("{text}format = {format}\n"), dir.path());
            run_simulate(&cfg).unwrap();
            run_wigner_field(&cfg).unwrap();
            run_negativity_series(&cfg).unwrap();
            runs.push(snapshot(dir.path()));
        }
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[2], runs[3]);
    assert_eq!(runs[0].len(), 6);
}

#[test]
fn distributions_resum_to_one() {
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let dir = TempDir::new().unwrap();
        let mut cfg = config("steps = 40\ninitial = cat\ncat-a = 7\ntimes = 0,13,40\n", dir.path());
        cfg.format = format;
        let files = run_simulate(&cfg).unwrap();
        let rows = read_distribution(&files[0]).unwrap();
        for t in [0, 13, 40] {
            let total: f64 = rows.iter().filter(|r| r.t == t).map(|r| r.p).sum();
            assert!((total - 1.0).abs() < 1e-9, "t = {t}");
        }
    }
}

#[test]
fn exported_fields_keep_their_negativity() {
    let coin = coin_matrix(0.8).unwrap();
    let init = InitialStateSpec::cat(3);
    let s = evolve(&init.build(init.window_for(9)).unwrap(), &coin, 9);
    let field = FftTransform.transform(&s, &field_grid_for(&s, KGrid::full_period(96).unwrap())).unwrap();
    let expected = negativity(&field).unwrap();
    let dir = TempDir::new().unwrap();
    for (name, format) in [("w.csv", OutputFormat::Csv), ("w.json", OutputFormat::Json)] {
        let path = dir.path().join(name);
        write_field(&path, format, &field, field.support(), true).unwrap();
        let back = read_field(&path).unwrap();
        assert!((negativity(&back).unwrap() - expected).abs() < 1e-9, "{name}");
        assert!(back.max_abs_diff(&field).unwrap() < 1e-15, "{name}");
    }
}

#[test]
fn both_field_routes_export_the_same_field() {
    let text = "steps = 15\ninitial = cat\ncat-a = 2\nk-points = 128\ntimes = 15\n";
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let mut amp = config(text, a.path());
    amp.method = Some(EvolutionMethod::Amplitude);
    let mut rec = config(text, b.path());
    rec.method = Some(EvolutionMethod::Recursion);
    let ea = run_wigner_field(&amp).unwrap();
    let eb = run_wigner_field(&rec).unwrap();
    let fa = read_field(&ea[0].path).unwrap();
    let fb = read_field(&eb[0].path).unwrap();
    assert!(fa.max_abs_diff(&fb).unwrap() < 1e-10);
    for e in [&ea[0], &eb[0]] {
        assert!((e.normalization.unwrap() - 1.0).abs() < 1e-9);
    }
    assert!((ea[0].negativity.unwrap() - eb[0].negativity.unwrap()).abs() < 1e-9);
}
