use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dmimo_outage::cli::config::ExperimentFile;
use dmimo_outage::cli::output::{Manifest, CSV_HEADER};
use dmimo_outage::cli::presets::PRESET_NAMES;
use dmimo_outage::cli::validation::ValidationSummary;

const BIN: &str = env!("CARGO_BIN_EXE_dmimo-outage");
const FAST: [&str; 4] = ["--set", "network_realizations=2", "--set", "fading=10"];

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("DMIMO_OUTAGE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_preset(dir: &Path, name: &str) -> String {
    let out = run(&["presets", name], dir);
    assert!(out.status.success());
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, &out.stdout).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn results_header_is_stable() {
    assert_eq!(CSV_HEADER, "deployment,traffic,axis,axis_value,M,Q,S,K,l_m,p_out,ci_halfwidth,trials,seed");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig5");
    let out = run(&[&["run", &cfg, "--out", "r"][..], &FAST].concat(), tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("r/results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    // 4 K values x 3 deployments x 2 traffic modes
    assert_eq!(csv.lines().count(), 1 + 24);
}

#[test]
fn presets_validate_and_match_figure_setups() {
    let tmp = tempfile::tempdir().unwrap();
    let listed = run(&["presets"], tmp.path());
    assert_eq!(String::from_utf8_lossy(&listed.stdout).lines().collect::<Vec<_>>(), PRESET_NAMES);
    for name in PRESET_NAMES {
        let out = run(&["presets", name], tmp.path());
        let file = ExperimentFile::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
        assert_eq!(file.name, *name);
    }
    let v: serde_json::Value = serde_json::from_slice(&run(&["presets", "fig6"], tmp.path()).stdout).unwrap();
    assert_eq!(v["experiment"]["sweep"]["values"], serde_json::json!([16.0, 32.0, 48.0, 64.0, 80.0, 96.0]));
    assert_eq!(v["experiment"]["antennas_per_ap"], 4);
    let v: serde_json::Value = serde_json::from_slice(&run(&["presets", "fig7"], tmp.path()).stdout).unwrap();
    assert_eq!(v["experiment"]["sweep"]["values"], serde_json::json!([250.0, 500.0, 750.0, 1000.0]));
    let v: serde_json::Value = serde_json::from_slice(&run(&["presets", "fig4-validation"], tmp.path()).stdout).unwrap();
    assert_eq!(v["experiment"]["alarm"]["epicenter_fraction"], serde_json::json!([0.25, 0.5]));
    assert_eq!(v["experiment"]["alarm"]["intensity_m"], 25.0);
    assert_eq!(run(&["presets", "fig9"], tmp.path()).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical_and_env_sets_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig5");
    let mut csvs = Vec::new();
    for dir in ["a", "b"] {
        let out = Command::new(BIN)
            .args([&["run", &cfg][..], &FAST].concat())
            .current_dir(tmp.path())
            .env("DMIMO_OUTAGE_OUT_DIR", tmp.path().join(dir))
            .output()
            .unwrap();
        assert!(out.status.success());
        csvs.push(fs::read(tmp.path().join(dir).join("results.csv")).unwrap());
        assert!(tmp.path().join(dir).join("outage_vs_K.dat").exists());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn manifest_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig7");
    assert!(run(&[&["run", &cfg, "--out", "first"][..], &FAST].concat(), tmp.path()).status.success());
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(tmp.path().join("first/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.points.len(), 24);
    assert!(run(&["run", "first/manifest.json", "--out", "second"], tmp.path()).status.success());
    for f in ["results.csv", "manifest.json", "outage_vs_l.dat"] {
        assert_eq!(fs::read(tmp.path().join("first").join(f)).unwrap(), fs::read(tmp.path().join("second").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn infeasible_points_are_kept_with_reasons() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig6");
    let out = run(&[&["run", &cfg, "--out", "o"][..], &FAST].concat(), tmp.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("o/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 36);
    assert!(csv.lines().any(|l| l == "grid,regular,M,32.0,,,,,,,,,"));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/manifest.json")).unwrap()).unwrap();
    let skipped: Vec<_> = manifest.points.iter().filter(|p| p.status == "skipped").collect();
    // M = 32, 48, 80, 96 give a non-square AP count on the grid
    assert_eq!(skipped.len(), 8);
    assert!(skipped.iter().all(|p| p.reason.as_deref().unwrap().contains("perfect-square")));
}

#[test]
fn plot_renders_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig5");
    assert!(run(&[&["run", &cfg, "--out", "r"][..], &FAST].concat(), tmp.path()).status.success());
    for dir in ["p1", "p2"] {
        let out = run(&["plot", "r/results.csv", "--out", dir], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(fs::metadata(tmp.path().join(dir).join("outage_vs_K.svg")).unwrap().len() > 1000);
    }
    let a = fs::read_to_string(tmp.path().join("p1/outage_vs_K.dat")).unwrap();
    assert_eq!(a, fs::read_to_string(tmp.path().join("p2/outage_vs_K.dat")).unwrap());
    assert_eq!(a, fs::read_to_string(tmp.path().join("r/outage_vs_K.dat")).unwrap());
    // x column plus p_out and ci for 6 series
    assert_eq!(a.lines().nth(1).unwrap().split_whitespace().count(), 13);
    assert_eq!(a.lines().count(), 2 + 4);
}

#[test]
fn bad_inputs_exit_with_documented_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    fs::write(p.join("empty.csv"), "").unwrap();
    fs::write(p.join("header.csv"), format!("{CSV_HEADER}\n")).unwrap();
    fs::write(p.join("junk.csv"), "a,b\n1,2\n").unwrap();
    for f in ["empty.csv", "header.csv", "junk.csv", "missing.csv"] {
        assert_eq!(run(&["plot", f], p).status.code(), Some(1), "{f}");
    }

    let cfg = write_preset(p, "fig5");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["experiment"]["surprise"] = serde_json::json!(true);
    fs::write(p.join("unknown.json"), v.to_string()).unwrap();
    assert_eq!(run(&["run", "unknown.json"], p).status.code(), Some(1));
    assert_eq!(run(&["run", &cfg, "--set", "nope=1"], p).status.code(), Some(1));
    assert_eq!(run(&["run", &cfg, "--set", "l=-5"], p).status.code(), Some(1));
    assert_eq!(run(&["run", "does-not-exist.json"], p).status.code(), Some(1));

    // output directory below a regular file cannot be created
    fs::write(p.join("blocker"), "x").unwrap();
    assert_eq!(run(&[&["run", &cfg, "--out", "blocker/sub"][..], &FAST].concat(), p).status.code(), Some(2));
}

#[test]
fn alarm_validation_writes_pdf_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_preset(tmp.path(), "fig4-validation");
    let out = run(
        &["run", &cfg, "--out", "v", "--set", "experiment.devices_per_realization=200", "--set", "network_realizations=50"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("v");
    let summary: ValidationSummary = serde_json::from_str(&fs::read_to_string(dir.join("validation.json")).unwrap()).unwrap();
    assert_eq!(summary.samples, 10_000);
    assert!(summary.ks_x < 0.03 && summary.ks_y < 0.03);
    assert!((summary.density_integral - 1.0).abs() < 1e-3);
    let pdf = fs::read_to_string(dir.join("pdf_x.dat")).unwrap();
    assert_eq!(pdf.lines().count(), 2 + 50);
    assert!(dir.join("heatmap.dat").exists() && dir.join("manifest.json").exists());
}
