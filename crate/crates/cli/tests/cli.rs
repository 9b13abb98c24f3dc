use std::path::Path;
use std::process::{Command, Output};

use hybrid_ntt::hply::{read_polynomial, write_polynomial};
use hybrid_ntt::poly::{random_polynomial, reference_forward_ntt};
use hybrid_ntt::ModulusContext;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde_json::Value;

fn hntt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hntt"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn json_error(out: &Output) -> Value {
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].is_string());
    err["error"].clone()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schedule_prints_configuration_strings() {
    let out = hntt(&["schedule", "--n", "8192", "--npart", "256", "--p", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("S×0,B×8"), "{text}");
    assert!(text.contains("S×3,B×5"), "{text}");
    assert!(text.contains("iterations: 64"));
    assert_eq!(text.matches("Dependent").count(), 4);
}

#[test]
fn schedule_twiddle_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let out = hntt(&[
        "schedule",
        "--n",
        "16",
        "--npart",
        "8",
        "--p",
        "2",
        "--json",
        "--twiddles",
        path_str(&grid),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["second_half"], "S×2,B×1");
    let grid: Value = serde_json::from_str(&std::fs::read_to_string(&grid).unwrap()).unwrap();
    assert_eq!(grid["it0.st0.u0"], serde_json::json!([1, 1, 1, 1]));
    assert_eq!(grid["it2.st1.u0"], serde_json::json!([]));
}

#[test]
fn map_small_example_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("layout.csv");
    let out = hntt(&[
        "map",
        "--n",
        "16",
        "--npart",
        "8",
        "--p",
        "2",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["conflicts"], serde_json::json!([]));
    assert_eq!(report["burst_clean"], true);
    let csv = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,bank,offset");
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[1 + 9], "9,0,2");
}

#[test]
fn map_naive_layout_fails_verification() {
    let out = hntt(&["map", "--n", "64", "--npart", "8", "--p", "2", "--naive"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!json_stdout(&out)["conflicts"]
        .as_array()
        .unwrap()
        .is_empty());
    assert_eq!(json_error(&out)["kind"], "verification");
}

#[test]
fn verify_small_configuration() {
    let out = hntt(&[
        "verify", "--n", "16", "--npart", "8", "--p", "2", "--q", "97", "--runs", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["runs"], 100);
}

#[test]
fn verify_with_discovered_prime() {
    let out = hntt(&["verify", "--n", "4096", "--runs", "3", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["config"]["n_part"], 256);
}

#[test]
fn modulus_without_negacyclic_root_is_rejected() {
    // 17 = 1 mod 16 but not mod 32
    let out = hntt(&[
        "verify", "--n", "16", "--npart", "8", "--p", "2", "--q", "17", "--runs", "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_error(&out)["kind"], "config");
}

#[test]
fn params_output_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let tw = dir.path().join("tw.csv");
    let out = hntt(&[
        "params",
        "--n",
        "1024",
        "--npart",
        "64",
        "--p",
        "4",
        "--twiddle-csv",
        path_str(&tw),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let params = json_stdout(&out);
    let q = params["q"].as_u64().unwrap();
    assert!(q >= 1 << 59 && q % 2048 == 1);
    assert_eq!(std::fs::read_to_string(&tw).unwrap().lines().count(), 1025);
    std::fs::write(&cfg, &out.stdout).unwrap();
    let again = hntt(&["params", "--config", path_str(&cfg)]);
    assert_eq!(again.stdout, out.stdout);
    // flags win over the file
    let over = json_stdout(&hntt(&["params", "--config", path_str(&cfg), "--p", "8"]));
    assert_eq!(over["p"], 8);
    assert_eq!(over["n_part"], 64);
}

#[test]
fn transform_matches_reference_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let n = 1 << 10;
    let ctx = ModulusContext::with_prime_floor(n, 1 << 59).unwrap();
    let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(3));
    let input = dir.path().join("a.hply");
    write_polynomial(std::fs::File::create(&input).unwrap(), &a).unwrap();

    let mut artifacts = Vec::new();
    for tag in ["x", "y"] {
        let output = dir.path().join(format!("{tag}.hply"));
        let trace = dir.path().join(format!("{tag}.jsonl"));
        let out = hntt(&[
            "transform",
            "--input",
            path_str(&input),
            "--output",
            path_str(&output),
            "--npart",
            "64",
            "--p",
            "4",
            "--trace",
            path_str(&trace),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let got = read_polynomial(std::fs::File::open(&output).unwrap()).unwrap();
        assert_eq!(got, reference_forward_ntt(&ctx, &a).unwrap());
        artifacts.push((
            std::fs::read(&output).unwrap(),
            std::fs::read(&trace).unwrap(),
            out.stdout,
        ));
    }
    assert_eq!(artifacts[0], artifacts[1]);
    let first = String::from_utf8(artifacts[0].1.clone()).unwrap();
    let rec: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(rec["kind"], "read");
}

#[test]
fn transform_rejects_mismatched_length() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = ModulusContext::with_prime_floor(64, 1 << 40).unwrap();
    let input = dir.path().join("a.hply");
    write_polynomial(
        std::fs::File::create(&input).unwrap(),
        &hybrid_ntt::Polynomial::zero(&ctx),
    )
    .unwrap();
    let output = dir.path().join("b.hply");
    let out = hntt(&[
        "transform",
        "--n",
        "128",
        "--input",
        path_str(&input),
        "--output",
        path_str(&output),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.hply");
    std::fs::write(&input, b"HPLY\x01").unwrap();
    let output = dir.path().join("out.hply");
    let out = hntt(&[
        "transform",
        "--input",
        path_str(&input),
        "--output",
        path_str(&output),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_error(&out)["kind"], "io");
}

#[test]
fn verify_is_deterministic() {
    let args = [
        "verify", "--n", "256", "--npart", "16", "--p", "4", "--runs", "5", "--seed", "42",
    ];
    assert_eq!(hntt(&args).stdout, hntt(&args).stdout);
}

#[test]
fn analyze_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("roof.csv");
    let out = hntt(&[
        "analyze",
        "--sweep-n",
        "8..16",
        "--sweep-p",
        "2,4,8,16",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "kind,n,p,intensity,ceiling_ops,bound"
    );
    let stage: Vec<&str> = text.lines().filter(|l| l.starts_with("stage,")).collect();
    assert_eq!(stage.len(), 9 * 4);
    let intensities: Vec<&str> = stage.iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert!(intensities.iter().all(|i| *i == intensities[0]));
}

#[test]
fn analyze_bandwidth_demand() {
    let out = hntt(&[
        "analyze",
        "--n",
        "65536",
        "--arch",
        "hybrid",
        "--achieved-ops",
        "64172",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let gbps = json_stdout(&out)["bandwidth"]["data_gbps"]
        .as_f64()
        .unwrap();
    assert!((gbps - 67.0).abs() <= 1.0, "{gbps}");
}

#[test]
fn bad_arguments_exit_two_with_json() {
    for args in [
        &["frobnicate"][..],
        &["map", "--n", "16", "--npart", "32", "--p", "2"],
        &["schedule"],
        &["analyze", "--n", "256", "--arch", "gpu"],
        &["verify", "--n", "16", "--runs", "zero"],
    ] {
        let out = hntt(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(json_error(&out)["kind"], "config", "{args:?}");
    }
}

#[test]
fn missing_config_file_is_io() {
    let out = hntt(&["params", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(3));
}
