//! End-to-end runs of the `seqmeas` binary.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

fn seqmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqmeas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Csv {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(out: &Output) -> Self {
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let (meta, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
        let header: Vec<String> = body[0].split(',').map(String::from).collect();
        let rows: Vec<Vec<String>> = body[1..].iter().map(|l| l.split(',').map(String::from).collect()).collect();
        assert!(rows.iter().all(|r| r.len() == header.len()));
        Self { meta: meta.into_iter().map(String::from).collect(), header, rows }
    }

    fn records(&self) -> Vec<HashMap<&str, f64>> {
        self.rows
            .iter()
            .map(|r| {
                self.header
                    .iter()
                    .zip(r)
                    .filter_map(|(h, v)| v.parse::<f64>().ok().map(|x| (h.as_str(), x)))
                    .collect()
            })
            .collect()
    }

    fn meta_value(&self, key: &str) -> Option<&str> {
        let prefix = format!("# {key}: ");
        self.meta.iter().find_map(|l| l.strip_prefix(prefix.as_str()))
    }
}

#[test]
fn fig2_columns_agree_and_decrease() {
    let t = Csv::parse(&seqmeas(&["fig2"]));
    assert_eq!(t.header, ["sigma1", "var_sx_rho1", "var_sx_rho1_engine"]);
    let r = t.records();
    assert_eq!(r.len(), 50);
    for w in r.windows(2) {
        // saturates at exactly 1/4 for the narrowest pointers
        assert!(w[1]["var_sx_rho1"] <= w[0]["var_sx_rho1"]);
    }
    for row in &r {
        assert!((row["var_sx_rho1"] - row["var_sx_rho1_engine"]).abs() < 1e-10);
    }
    assert_eq!(r[0]["var_sx_rho1"], 0.25);
    assert!(r[49]["var_sx_rho1"] < 1e-4);
    let t = Csv::parse(&seqmeas(&["fig2", "--sigma1", "0.2:100:2"]));
    let r = t.records();
    assert!((r[0]["var_sx_rho1"] - 0.249_517_4).abs() < 1e-6);
}

#[test]
fn fig3_reference_points() {
    let t = Csv::parse(&seqmeas(&["fig3", "--x1", "-1:1:21", "--sigma1", "0.01:2:9"]));
    let r = t.records();
    assert_eq!(r.len(), 21 * 9);
    for row in &r {
        assert!((row["var_sx_given_sz"] - row["var_sx_given_sz_engine"]).abs() < 1e-10);
        if row["x1"] == 0.0 {
            assert_eq!(row["var_sx_given_sz"], 0.0);
        }
        if row["x1"] == 1.0 && row["sigma1"] == 0.01 {
            assert!((row["var_sx_given_sz"] - 0.25).abs() < 1e-12);
        }
    }
    // x1 varies fastest: mirror rows sit symmetrically inside each block
    for block in r.chunks(21) {
        for i in 0..21 {
            let (a, b) = (&block[i], &block[20 - i]);
            assert!((a["x1"] + b["x1"]).abs() < 1e-15);
            assert!((a["var_sx_given_sz_engine"] - b["var_sx_given_sz_engine"]).abs() < 1e-12);
        }
    }
}

#[test]
fn fig4_reference_points_and_note() {
    let out = seqmeas(&["fig4", "--x2", "-1:1:3", "--sigma2", "0.1:1:4"]);
    let t = Csv::parse(&out);
    assert!(t.meta.iter().any(|l| l.starts_with("# note: ") && l.contains("exceed 0.5")));
    for row in t.records() {
        let v = row["var_sz_given_sx"];
        if v <= 0.5 {
            assert!((v - row["var_sz_given_sx_engine"]).abs() < 1e-10);
        }
        match (row["x2"], row["sigma2"]) {
            (0.0, _) => assert!((v - 0.25).abs() < 1e-6),
            (x, s) if x == 1.0 && s == 0.1 => assert!((v - 0.125).abs() < 1e-6),
            (x, s) if x == -1.0 && s == 0.1 => assert!(v > 0.25),
            _ => {}
        }
    }
}

#[test]
fn figures_are_reproducible_and_thread_independent() {
    let a = seqmeas(&["fig3", "--x1", "-1:1:7", "--sigma1", "0.2:1:3"]);
    let b = Command::new(env!("CARGO_BIN_EXE_seqmeas"))
        .args(["fig3", "--x1", "-1:1:7", "--sigma1", "0.2:1:3"])
        .env("SEQMEAS_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn metadata_allows_rerun() {
    let t = Csv::parse(&seqmeas(&["fig4", "--x2", "0.5", "--sigma2", "0.5", "--sigma1", "0.5"]));
    assert_eq!(
        t.meta_value("command"),
        Some("seqmeas fig4 --x2 0.5 --sigma2 0.5 --sigma1 0.5")
    );
    assert!(t.meta_value("tool").unwrap().starts_with("seqmeas "));
    assert_eq!(t.meta_value("config-sha256").unwrap().len(), 64);
    assert_eq!(t.meta_value("rng"), Some("chacha20-rand_chacha-0.9/64-lanes"));
    let r = t.records();
    assert!((r[0]["var_sz_given_sx"] - 0.171_006_8).abs() < 1e-7);
}

#[test]
fn four_stage_chain_three_ways() {
    let cfg = bundled("four_stage.json");
    let t = Csv::parse(&seqmeas(&["chain", &cfg, "--with-oracles", "--seed", "99"]));
    assert_eq!(t.meta_value("seed"), Some("99"));
    let r = &t.records()[0];
    assert!((r["quad_variance"] - r["variance"]).abs() < 1e-8);
    assert!((r["quad_mean"] - r["mean"]).abs() < 1e-8);
    let z = (r["mc_variance"] - r["variance"]) / r["mc_standard_error"];
    assert!(z.abs() < 3.0, "{z:+.2} SE");
    assert!((r["extracted_variance"] - (r["variance"] - 0.25)).abs() < 1e-15);
}

#[test]
fn two_stage_sweep_reproduces_forward_closed_form() {
    let t = Csv::parse(&seqmeas(&["chain", &bundled("two_stage_sweep.json")]));
    assert_eq!(t.header[0], "query.fixed_outcomes[0]");
    let r = t.records();
    assert_eq!(r.len(), 11);
    for row in &r {
        let x1: f64 = row["query.fixed_outcomes[0]"];
        let closed = 0.25 * (x1 / (2.0 * 0.25)).tanh().powi(2);
        assert!((row["extracted_variance"] - closed).abs() < 1e-12);
    }
    assert!(t.meta_value("seed").is_none());
}

#[test]
fn chain_output_is_seed_deterministic() {
    let cfg = bundled("four_stage.json");
    let args = ["chain", cfg.as_str(), "--with-oracles", "--mc-samples", "20000", "--seed", "5"];
    assert_eq!(seqmeas(&args).stdout, seqmeas(&args).stdout);
    let other = seqmeas(&["chain", cfg.as_str(), "--with-oracles", "--mc-samples", "20000", "--seed", "6"]);
    assert_ne!(seqmeas(&args).stdout, other.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = seqmeas(&["fig2", "--sigma1", "0.5:2:3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn invalid_config_reports_field_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2, "initial_state": "plus",
            "stages": [{"observable": "Sz", "sigma": 0.5}, {"observable": "Sx", "sigma": 0}],
            "query": {"free_index": 1, "fixed_outcomes": [0.1]}}"#,
    )
    .unwrap();
    let out = seqmeas(&["chain", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stages[1].sigma"), "{err}");

    std::fs::write(&path, "{\"dimension\": 2,\n \"stages\": [}").unwrap();
    let out = seqmeas(&["chain", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = seqmeas(&["chain", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["frobnicate"][..],
        &["fig2", "--sigma1", "1:0:5"],
        &["fig2", "--sigma1", "-1:2:5"],
        &["validate", "bogus"],
        &["validate", "mpur", "--mc-samples", "0"],
    ] {
        let out = seqmeas(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_seqmeas"))
        .args(["fig2"])
        .env("SEQMEAS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_suite_reports_each_check() {
    let out = seqmeas(&["validate", "mpur"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("[PASS] mpur: ")).collect();
    assert_eq!(checks.len(), 3);
    assert!(!text.contains("[FAIL]"));
    assert!(text.lines().last().unwrap().starts_with("3 of 3 checks passed"));

    let out = seqmeas(&["validate", "pointer", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
}
