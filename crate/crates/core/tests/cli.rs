//! End-to-end CLI tests: artifact files, exit codes, unit ingestion.

use nvsim::cli::{cli_dispatch, cli_run};
use nvsim::sweep::{GRID_CSV_HEADER, TRACE_CSV_HEADER};

fn dispatch(args: &[&str]) -> i32 {
    cli_dispatch(args.iter().map(|s| s.to_string()))
}

#[test]
fn validate_config_exit_zero() {
    assert_eq!(dispatch(&["nvsim", "validate-config"]), 0);
    let summary = cli_run(["nvsim", "validate-config"]).unwrap();
    assert!(summary.contains("config OK"));
    assert!(summary.contains("hash"));
}

#[test]
fn purcell_preset_prints_both_conventions() {
    let out = cli_run(["nvsim", "purcell", "--preset", "nanodiamond"]).unwrap();
    assert!(out.contains("745.8"), "missing default-convention value: {out}");
    assert!(out.contains("2343"), "missing published-convention value: {out}");
    let out = cli_run(["nvsim", "purcell", "--q", "1000", "--v", "0.5"]).unwrap();
    assert!(out.contains("F_p[eq2]=152.0"), "{out}");
}

#[test]
fn ir_map_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = dispatch(&[
        "nvsim",
        "ir-map",
        "--x",
        "ir_power_mw:10:1000:3:log",
        "--y",
        "ir_duration_us:0.1:1:3:log",
        "--purcell",
        "40",
        "--out",
        out,
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("ir_map.csv")).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines[0], GRID_CSV_HEADER);
    assert_eq!(lines.len(), 10, "3x3 grid is 9 data rows plus header");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ir_map.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["schema"], "grid_result_v1");
    assert_eq!(sidecar["resolved_params"]["purcell"], 40.0);
    assert!(sidecar["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn red_map_small_grid_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let summary = cli_run([
        "nvsim",
        "red-map",
        "--x",
        "green_power_mw:0.05:5:4:log",
        "--y",
        "duration_us:0.05:5:4:log",
        "--out",
        out,
    ])
    .unwrap();
    assert!(summary.contains("16 cells"), "{summary}");
    assert!(dir.path().join("red_map.csv").exists());
    assert!(dir.path().join("red_map.json").exists());
}

#[test]
fn trace_replays_sequence_file() {
    let dir = tempfile::tempdir().unwrap();
    let seq_path = dir.path().join("seq.toml");
    std::fs::write(
        &seq_path,
        r#"
repetitions = 3
initial_spin = "ms1"
initial_charge = "negative"

[[segments]]
duration_us = 0.3
green_power_mw = 0.65
ir_power_mw = 0.0

[[segments]]
duration_us = 0.01
green_power_mw = 0.0
ir_power_mw = 0.0

[[segments]]
duration_us = 1.0
green_power_mw = 0.0
ir_power_mw = 1000.0
collect_ir = true
"#,
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    let code = dispatch(&[
        "nvsim",
        "trace",
        "--sequence",
        seq_path.to_str().unwrap(),
        "--samples",
        "5",
        "--purcell",
        "300",
        "--out",
        out,
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines[0], TRACE_CSV_HEADER);
    // 3 segments x 3 repetitions x 4 steps, plus the initial point.
    assert_eq!(lines.len(), 1 + 1 + 36);
    // Populations stay normalized in the export.
    for line in &lines[1..] {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse().unwrap())
            .collect();
        assert_eq!(fields.len(), 11);
        let total: f64 = fields[1..9].iter().sum();
        assert!((total - 1.0).abs() < 1e-8, "row sums to {total}");
    }
    // Cumulative IR counts end positive, red stays zero (never collected).
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|f| f.trim().parse().unwrap())
        .collect();
    assert_eq!(last[9], 0.0);
    assert!(last[10] > 0.0);
    assert!(dir.path().join("trace.json").exists());
}

#[test]
fn calibrate_pump_reports_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let summary = cli_run([
        "nvsim",
        "calibrate-pump",
        "--duration",
        "300ns",
        "--tau",
        "10ns",
        "--power-min",
        "0.1mW",
        "--power-max",
        "10mW",
        "--points",
        "40",
        "--out",
        out,
    ])
    .unwrap();
    assert!(summary.contains("best"), "{summary}");
    // The summary echoes the 300 ns pump in internal units.
    assert!(summary.contains("0.3 us"), "{summary}");
    let csv = std::fs::read_to_string(dir.path().join("pump_calibration.csv")).unwrap();
    assert!(csv.starts_with("power_mw,singlet_ground_contrast"));
    assert_eq!(csv.trim_end().lines().count(), 41);
}

#[test]
fn purcell_curve_accepts_unit_suffixes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let summary = cli_run([
        "nvsim",
        "purcell-curve",
        "--x",
        "purcell:1:100:5:log",
        "--ir-power",
        "1W",
        "--duration",
        "1us",
        "--tau",
        "10ns",
        "--out",
        out,
    ])
    .unwrap();
    assert!(summary.contains("5 points"), "{summary}");
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("purcell_curve.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["resolved_params"]["ir_power_mw"], 1000.0);
    assert_eq!(sidecar["resolved_params"]["ir_duration_us"], 1.0);
    assert_eq!(sidecar["resolved_params"]["tau_us"], 0.01);
}

#[test]
fn exit_codes() {
    // Unknown subcommand / flag => validation (2).
    assert_eq!(dispatch(&["nvsim", "frobnicate"]), 2);
    assert_eq!(dispatch(&["nvsim", "ir-map", "--x", "nope:1:2:3:log"]), 2);
    // Bad axis scale keyword.
    assert_eq!(
        dispatch(&["nvsim", "ir-map", "--x", "ir_power_mw:1:2:3:cubic"]),
        2
    );
    // Unsorted purcell handled as validation too.
    assert_eq!(
        dispatch(&["nvsim", "purcell-curve", "--x", "purcell:0.5:100:5:log"]),
        2
    );
    // Missing sequence file => I/O failure (1).
    assert_eq!(
        dispatch(&["nvsim", "trace", "--sequence", "/nonexistent/seq.toml"]),
        1
    );
    // Help exits 0.
    assert_eq!(dispatch(&["nvsim", "--help"]), 0);
}

#[test]
fn custom_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("custom.toml");
    // Double the IR drive coefficient; downstream maps must see it.
    let text = nvsim::Config::embedded_toml().replace(
        "exc_ir_singlet_coeff = 4.0",
        "exc_ir_singlet_coeff = 8.0",
    );
    std::fs::write(&cfg_path, &text).unwrap();
    assert_eq!(
        dispatch(&[
            "nvsim",
            "--config",
            cfg_path.to_str().unwrap(),
            "validate-config"
        ]),
        0
    );
    let out = dir.path().to_str().unwrap();
    let summary = cli_run([
        "nvsim",
        "--config",
        cfg_path.to_str().unwrap(),
        "purcell-curve",
        "--x",
        "purcell:1:10:2:log",
        "--out",
        out,
    ])
    .unwrap();
    assert!(summary.contains("2 points"), "{summary}");
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("purcell_curve.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["resolved_rates"]["exc_ir_singlet_coeff"], 8.0);
}
