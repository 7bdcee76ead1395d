use std::path::Path;
use std::process::Command;

use riscap_cli::config::{ExperimentKind, Overrides};
use riscap_cli::experiments::fig5::ensemble_spec;
use riscap_cli::{execute, resolve, RunRequest};
use riscap_core::capacity_bounds::{beamforming_rate, solve_uqp, UqpOptions};
use riscap_core::channel_model::generate_ensemble;
use riscap_core::qr_sic::{plan, rate_gaussian_cpsk, rate_hypersphere_cpsk, CsEvaluator};
use riscap_core::{db_to_linear, McConfig};

fn riscap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_riscap")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .split("\r\n")
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bounds_run_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = riscap(&["bounds", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("custom_bounds.csv"));
    assert_eq!(rows.len(), 1 + 4 * 7);
    assert_eq!(rows[0][0], "channel");
    let svg = std::fs::read_to_string(dir.path().join("custom_bounds.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("custom_bounds.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "custom_bounds");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"snr_grid_db": [0, 10, 5]}"#,
        r#"{"mc": {"samples": 100}}"#,
        r#"{"bogus": 1}"#,
        r#"{"snr_grid_db": [0, 10"#,
        r#"{"channels": [{"builtin": "h9"}]}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.json"), text);
        let out = riscap(&["fig3", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
    }
    let out = riscap(&["fig9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = riscap(&["fig3", "--config", "/nonexistent/riscap.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{\n  \"dims\": [2, 4],\n  \"srr\": \"one\"\n}\n");
    let out = riscap(&["fig3", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn channel_file_with_zero_column_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ch.txt", "2 3\n1+0i 0 0.5-0.5i 0.2i\n0.3 0 -1+0.1i 1\n");
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"channels": [{"file": "ch.txt"}], "snr_grid_db": [0, 10], "output_dir": "res"}"#,
    );
    let out = riscap(&["bounds", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("res").join("custom_bounds.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "ch");
    assert_eq!(rows[1][1], "2");
    assert_eq!(rows[1][2], "3");
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"dims": [2, 4], "snr_grid_db": [0, 20]}"#);
    let mut csvs = Vec::new();
    for (k, threads) in ["1", "3", "1"].iter().enumerate() {
        let o = dir.path().join(format!("r{k}"));
        let out = riscap(&["fig3", "--config", &cfg, "--samples", "20000", "--threads", threads, "--out", o.to_str().unwrap()]);
        assert!(out.status.success());
        csvs.push(std::fs::read(o.join("fig3_hsm_capacity.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
}

#[test]
fn seed_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"dims": [2], "snr_grid_db": [10]}"#);
    let run = |seed: &str| {
        let o = dir.path().join(seed);
        let out = riscap(&["fig3", "--config", &cfg, "--samples", "10000", "--seed", seed, "--out", o.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(o.join("fig3_hsm_capacity.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn fig5_single_realization_matches_direct_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"n_values": [3], "ensemble_count": 1, "power_db": 30, "mc": {"samples": 20000, "seed": 11}}"#,
    );
    let req = RunRequest {
        kind: ExperimentKind::Fig5RateGainVsN,
        config: Some(cfg.into()),
        overrides: Overrides { out: Some(dir.path().join("o")), ..Default::default() },
        threads: Some(1),
    };
    let settings = resolve(&req).unwrap();
    let written = execute(&req).unwrap();
    let rows = read_csv(&written.csv);
    assert_eq!(rows.len(), 3);
    let num = |r: &[String], c: usize| r[c].parse::<f64>().unwrap();

    let eq = &generate_ensemble(&ensemble_spec(&settings, 3), 1).unwrap()[0];
    let e = db_to_linear(30.0);
    let bf = beamforming_rate(solve_uqp(eq, &UqpOptions::default()).unwrap().f_star, e);
    let p = plan(eq).unwrap();
    let g = rate_gaussian_cpsk(&p, e, 1, &McConfig::new(99, 200_000, 65_536).unwrap()).unwrap();
    let h = rate_hypersphere_cpsk(&p, e, 1, CsEvaluator::Table).unwrap();

    for r in &rows[1..] {
        assert_eq!(num(r, 3), 0.0, "stderr of a single realization");
        assert_eq!(num(r, 5), bf);
        assert!((num(r, 2) - (num(r, 4) - bf)).abs() < 1e-12);
    }
    assert_eq!(rows[1][0], "gaussian_cpsk");
    assert!((num(&rows[1], 4) - g.value).abs() < 1e-3 + 4.0 * g.stderr);
    assert_eq!(rows[2][0], "hypersphere_cpsk");
    assert_eq!(num(&rows[2], 4), h.value);
}

#[test]
fn fig5_gain_is_nondecreasing_in_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"n_values": [1, 2, 4], "ensemble_count": 200}"#);
    let req = RunRequest {
        kind: ExperimentKind::Fig5RateGainVsN,
        config: Some(cfg.into()),
        overrides: Overrides { out: Some(dir.path().join("o")), ..Default::default() },
        threads: None,
    };
    let rows = read_csv(&execute(&req).unwrap().csv);
    let gauss: Vec<(f64, f64)> = rows[1..]
        .iter()
        .filter(|r| r[0] == "gaussian_cpsk")
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(gauss.len(), 3);
    for w in gauss.windows(2) {
        assert!(w[1].0 >= w[0].0 - 2.0 * w[1].1.max(w[0].1), "{gauss:?}");
    }
}

#[test]
fn fig4_rows_respect_the_bound_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"snr_grid_db": [-10, 10, 30], "srr": [1, 8]}"#);
    let out = riscap(&["fig4", "--config", &cfg, "--samples", "10000", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("fig4_rate_vs_snr.csv"));
    assert_eq!(rows.len(), 1 + 11 * 2 * 3);
    let get = |curve: &str, l: &str, snr: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == curve && r[1] == l && r[2].parse::<f64>().unwrap() == snr.parse::<f64>().unwrap())
            .map(|r| r[3].parse().unwrap())
            .unwrap()
    };
    for l in ["1", "8"] {
        for snr in ["-10", "10", "30"] {
            let (bf, mt, fr) = (get("beamforming", l, snr), get("ub_max_trace", l, snr), get("ub_frobenius", l, snr));
            assert!(bf <= mt && mt <= fr);
        }
    }
    let gap1 = get("gaussian_cpsk", "1", "30") - get("beamforming", "1", "30");
    let gap8 = get("gaussian_cpsk", "8", "30") - get("beamforming", "8", "30");
    assert!(gap1 > 0.5 && gap8 < gap1, "{gap1} {gap8}");
}
