use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sqzsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqzsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = sqzsim(&a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is json");
    assert!(v["error"]["message"].is_string());
    v
}

fn shipped_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/pump_sweep.csv")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Small, fast homodyne settings: 20 MS/s, short traces.
const FAST: &[&str] = &[
    "--set",
    "chain.sample_rate=20e6",
    "--set",
    "sweep.mode.start=0.5e6",
    "--set",
    "sweep.mode.stop=8.5e6",
    "--set",
    "sweep.points=33",
    "--set",
    "zero_span.vbw=1000",
    "--set",
    "zero_span.points=101",
    "--set",
    "acquisition.duration=0.02",
    "--set",
    "acquisition.scan_duration=0.05",
    "--set",
    "acquisition.scan_rate=50",
    "--set",
    "tap_sweep.duration=0.05",
    "--set",
    "tap_sweep.tap_ratios=[0.005, 0.013, 0.05]",
];

#[test]
fn eval_prints_headline_levels() {
    let out = sqzsim(&["eval"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[..3], ["640", "10.15", "20.56"]);

    let v = ok_json(&["eval", "--pump-mw", "640"]);
    assert_eq!(v["points"][0]["squeezing_dB"], 10.15);
    assert_eq!(v["points"][0]["anti_squeezing_dB"], 20.56);
    assert_eq!(v["theta_tilde_mrad"], 9.0);
}

#[test]
fn eval_takes_alpha_in_percent_per_watt() {
    // Same operating point stated with the SHG efficiency halved and the pump doubled.
    let v = ok_json(&["eval", "--set", "opa.alpha_pct_per_w=453", "--set", "opa.pump_mw=1280"]);
    assert_eq!(v["points"][0]["squeezing_dB"], 10.15);
    assert_eq!(v["alpha_pct_per_w"], 453.0);
}

#[test]
fn budget_totals_eight_percent() {
    let v = ok_json(&["budget"]);
    let b = &v["budget"];
    assert_eq!(b["total_pct"], 8.0);
    let mm = b["mode_mismatch_pct"].as_f64().unwrap();
    assert!((3.5..4.5).contains(&mm), "{mm}");
    assert_eq!(b["waveguide_pct"], 2.03);
    assert!(b["mode_mismatch_subtractive_pct"].as_f64().unwrap() < mm);

    let csv = sqzsim(&["budget", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("item,loss_pct\n"));
    assert!(text.contains("total,8.00\n"));
}

#[test]
fn fit_recovers_shipped_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let v = ok_json(&["fit", "--data", shipped_data().to_str().unwrap(), "--out-dir", out]);
    assert_eq!(v["converged"], true);

    let fit = read_json(&dir.path().join("fit.json"));
    let r = &fit["result"];
    let (a, l, t) = (
        r["alpha"].as_f64().unwrap(),
        r["loss"].as_f64().unwrap(),
        r["theta_tilde"].as_f64().unwrap(),
    );
    assert!((a - 9.06).abs() < 0.1, "{a}");
    assert!((l - 0.08).abs() < 0.005, "{l}");
    assert!((t - 0.009).abs() < 0.001, "{t}");

    let model = std::fs::read_to_string(dir.path().join("fit_model.csv")).unwrap();
    let mut lines = model.lines();
    assert_eq!(lines.next(), Some("pump_mW,squeezing_dB,anti_dB"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn fit_accepts_sigma_column_and_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = std::fs::read_to_string(shipped_data()).unwrap();
    let mut lines = data.lines();
    let mut with_sigma = format!("{},sigma_dB\n", lines.next().unwrap());
    for l in lines {
        with_sigma.push_str(&format!("{l},0.07\n"));
    }
    let p = dir.path().join("s.csv");
    std::fs::write(&p, with_sigma).unwrap();
    let v = ok_json(&[
        "fit",
        "--data",
        p.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    // Unit-sigma residuals: rms near 1 for data with 0.07 dB noise.
    let rms = v["residual_rms_dB"].as_f64().unwrap();
    assert!(rms > 0.5 && rms < 2.0, "{rms}");

    std::fs::write(&p, "pump_mW,squeezing_dB,anti_dB\n100,abc,3\n").unwrap();
    let e = error_json(&sqzsim(&[
        "fit",
        "--data",
        p.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(e["error"]["kind"], "data");
}

#[test]
fn misspelled_key_fails_before_anything_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 3\n[lock]\nprobe_powr = 1e-3\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = sqzsim(&[
        "tap-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("probe_powr"));
    assert!(!out_dir.exists());

    let e = error_json(&sqzsim(&["eval", "--set", "fit.bounds.alhpa=[1, 2]"]));
    assert_eq!(e["error"]["kind"], "config");
}

#[test]
fn module_errors_are_machine_readable() {
    let e = error_json(&sqzsim(&["fit", "--data", "/nonexistent/sweep.csv"]));
    assert_eq!(e["error"]["kind"], "io");

    // 3 MHz ± RBW/2 does not fit under a 5 MHz sample rate's Nyquist.
    let out = sqzsim(&[
        "zero-span",
        "--set",
        "chain.sample_rate=5e6",
        "--set",
        "sweep.mode.stop=2e6",
    ]);
    assert_eq!(error_json(&out)["error"]["kind"], "config");

    let dir = tempfile::tempdir().unwrap();
    let out = sqzsim(&[
        "lock-sim",
        "--set",
        "lock.detector_noise=10",
        "--set",
        "lock_sim.duration=0.2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "unlock");

    let e = error_json(&sqzsim(&["frobnicate"]));
    assert_eq!(e["error"]["kind"], "usage");
}

#[test]
fn lock_sim_and_tap_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let v = ok_json(&["lock-sim", "--set", "lock_sim.duration=0.5", "--out-dir", d]);
    let th = v["theta_tilde_mrad"].as_f64().unwrap();
    assert!(th > 5.0 && th < 15.0, "{th}");
    let trace = std::fs::read_to_string(dir.path().join("lock_trace.csv")).unwrap();
    assert!(trace.starts_with("time_s,theta_mrad,error\n"));

    let mut args = vec!["tap-sweep", "--out-dir", d];
    args.extend_from_slice(FAST);
    let v = ok_json(&args);
    assert!(
        v["phase_detection"]["squeezing_dB"].as_f64().unwrap()
            > v["best_conventional"]["squeezing_dB"].as_f64().unwrap()
    );
    let csv = std::fs::read_to_string(dir.path().join("tap_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tap_ratio,theta_std_mrad,squeezing_dB"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn homodyne_commands_write_trace_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for (cmd, stem, axis) in [("zero-span", "zero_span", "time_s"), ("sweep", "sweep", "freq_Hz")] {
        let mut args = vec![cmd, "--out-dir", d, "--seed", "11"];
        args.extend_from_slice(FAST);
        let v = ok_json(&args);
        let mean = v["mean_dB"].as_f64().unwrap();
        assert!((mean + 10.15).abs() < 0.6, "{cmd}: {mean}");
        let csv = std::fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
        assert!(csv.starts_with(&format!("{axis},level_dB\n")));
        let side = read_json(&dir.path().join(format!("{stem}.json")));
        assert_eq!(side["reference"], "shot_noise");
        assert_eq!(side["seed"], v["seed"]);
        assert_eq!(side["points"].as_u64().unwrap() as usize, csv.lines().count() - 1);
    }
    let v = ok_json(&[
        "synth",
        "--out-dir",
        d,
        "--set",
        "acquisition.source=shot",
        "--set",
        "acquisition.synth_samples=4096",
    ]);
    assert_eq!(v["samples"], 4096);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("synth.csv"))
            .unwrap()
            .lines()
            .count(),
        4097
    );
}

fn reproduce(base: &Path, seed: &str) -> (PathBuf, BTreeMap<String, String>) {
    let mut args = vec!["reproduce", "--out-dir", base.to_str().unwrap(), "--seed", seed];
    args.extend_from_slice(FAST);
    let v = ok_json(&args);
    let manifest = PathBuf::from(v["manifest"].as_str().unwrap());
    let m = read_json(&manifest);
    assert_eq!(m["seed"].as_u64().unwrap().to_string(), seed);
    let files: BTreeMap<String, String> = serde_json::from_value(m["files"].clone()).unwrap();
    (manifest.parent().unwrap().to_path_buf(), files)
}

#[test]
fn reproduce_is_byte_identical_under_a_seed() {
    let base = tempfile::tempdir().unwrap();
    let (dir_a, a) = reproduce(base.path(), "7");
    let (dir_b, b) = reproduce(base.path(), "7");
    assert_ne!(dir_a, dir_b);
    assert_eq!(a, b);
    for name in [
        "config.toml",
        "eval.csv",
        "budget.csv",
        "tap_sweep.csv",
        "pump_sweep.csv",
        "zero_span_scan.csv",
        "sweep_squeezed.csv",
    ] {
        assert!(a.contains_key(name), "{name}");
        assert_eq!(
            std::fs::read(dir_a.join(name)).unwrap(),
            std::fs::read(dir_b.join(name)).unwrap()
        );
    }
    let m = read_json(&dir_a.join("manifest.json"));
    assert_eq!(m["config_sha256"], a["config.toml"].as_str());

    let (_, c) = reproduce(base.path(), "8");
    assert_ne!(a["tap_sweep.csv"], c["tap_sweep.csv"]);
    assert_ne!(a["sweep_squeezed.csv"], c["sweep_squeezed.csv"]);
    assert_eq!(a["eval.csv"], c["eval.csv"]);
}

#[test]
fn shipped_config_reproduces_defaults() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/experiment.toml");
    let a = ok_json(&["eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a, ok_json(&["eval"]));
    let b = ok_json(&["budget", "--config", cfg.to_str().unwrap()]);
    assert_eq!(b, ok_json(&["budget"]));
}
