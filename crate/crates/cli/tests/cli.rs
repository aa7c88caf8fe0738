use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn wcauth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcauth"))
        .args(args)
        .env_remove("WCAUTH_SEED")
        .output()
        .expect("run wcauth")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn verify_family_exit_codes() {
    let ok = wcauth(&["verify-family", "--affine", "5"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));

    let dir = tempfile::tempdir().unwrap();
    let constant = dir.path().join("constant.json");
    fs::write(
        &constant,
        r#"{"kind":"table","tags":[[0,0],[0,0],[0,0],[0,0]],"num_tags":2,"epsilon":"1"}"#,
    )
    .unwrap();
    let bad = wcauth(&["verify-family", constant.to_str().unwrap()]);
    assert_eq!(code(&bad), 1, "{}", String::from_utf8_lossy(&bad.stderr));

    let composite = wcauth(&["verify-family", "--affine", "4"]);
    assert_eq!(code(&composite), 2);
}

#[test]
fn bounds_with_nothing_eliminated_are_zero() {
    let o = wcauth(&[
        "bounds",
        "--log2H",
        "4",
        "--log2T",
        "2",
        "--epsilon",
        "1/4",
        "--r",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let row = &v[0];
    assert_eq!(row["weak_pair_exact"]["exact"], "0/1");
    assert_eq!(row["chebyshev_asymptotic"]["value"], 0.0);
    assert_eq!(row["engineered"]["n_good_subsets"], 0.0);
}

#[test]
fn bounds_csv_sweep() {
    let o = wcauth(&[
        "bounds",
        "--log2H",
        "4,6",
        "--log2T",
        "2",
        "--epsilon",
        "1/4",
        "--r",
        "0.5,1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("log2_keys,log2_tags,epsilon,r,"));
    assert_eq!(header.split(',').count(), 20);
    assert_eq!(lines.count(), 4);
}

#[test]
fn bounds_reject_bad_r() {
    let o = wcauth(&[
        "bounds",
        "--log2H",
        "4",
        "--log2T",
        "2",
        "--epsilon",
        "1/4",
        "--r",
        "1.5",
    ]);
    assert_eq!(code(&o), 2);
}

const SIM: &[&str] = &[
    "simulate",
    "--binary",
    "5:2",
    "--variant",
    "salted",
    "--strategy",
    "engineered",
    "--r",
    "0.5",
    "--trials",
    "2000",
    "--no-timestamp",
];

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let mut args = SIM.to_vec();
    args.extend(["--seed", "42"]);
    let a = wcauth(&args);
    let b = wcauth(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let from_env = Command::new(env!("CARGO_BIN_EXE_wcauth"))
        .args(SIM)
        .env("WCAUTH_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(a.stdout, from_env.stdout);

    let single = Command::new(env!("CARGO_BIN_EXE_wcauth"))
        .args(&args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, single.stdout);

    let mut other = SIM.to_vec();
    other.extend(["--seed", "43"]);
    assert_ne!(a.stdout, wcauth(&other).stdout);
}

#[test]
fn simulate_timestamp_is_optional() {
    let with = wcauth(&SIM[..SIM.len() - 1]);
    assert!(json(&with)["generated_at"].is_u64());
    assert!(json(&wcauth(SIM)).get("generated_at").is_none());
}

#[test]
fn simulate_config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = wcauth(&[SIM, &["--seed", "5"]].concat());
    let cfg = json(&out)["config"].clone();
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let again = wcauth(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn simulate_assert_exit_codes() {
    let passive = wcauth(&[
        "simulate",
        "--affine",
        "5",
        "--trials",
        "100",
        "--assert",
        "--no-timestamp",
    ]);
    assert_eq!(code(&passive), 0);

    // The whole-class design reaches 1/24, not the predicted 1/21.
    let engineered = wcauth(&[
        "simulate",
        "--binary",
        "6:4",
        "--epsilon",
        "1/8",
        "--strategy",
        "engineered",
        "--r",
        "0.75",
        "--trials",
        "200000",
        "--assert",
        "--no-timestamp",
    ]);
    assert_eq!(code(&engineered), 4);
    let v = json(&engineered);
    assert_eq!(v["stats"]["verdict"], "disagree");
}

#[test]
fn simulate_csv_columns() {
    let o = wcauth(&[SIM, &["--format", "csv"]].concat());
    let text = String::from_utf8(o.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "trials,attempts,forgeries,detections,honest_accepted,success_rate,standard_error,\
         wilson_low,wilson_high,prediction_kind,prediction,prediction_source,verdict"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn dump_transcripts_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let o = wcauth(&[
        "simulate",
        "--affine",
        "5",
        "--strategy",
        "blind-guess",
        "--trials",
        "3",
        "--no-timestamp",
        "--dump-transcripts",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let lines: Vec<Value> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let rounds = lines.iter().filter(|l| l["record"] == "round").count();
    assert_eq!(rounds, 3);
    assert!(lines
        .iter()
        .filter(|l| l["record"] == "event")
        .all(|l| l["event"].is_string() && l["seq"].is_u64()));
    assert!(lines.iter().any(|l| l["event"] == "bob_verdict"));
}

#[test]
fn simulate_rejects_bad_config() {
    let o = wcauth(&[
        "simulate",
        "--affine",
        "5",
        "--variant",
        "salted",
        "--strategy",
        "blind-guess",
    ]);
    assert_eq!(code(&o), 2);
    let o = wcauth(&["simulate", "--affine", "5", "--noise", "2"]);
    assert_eq!(code(&o), 2);
    let o = wcauth(&["simulate", "--trials", "10"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn demo_prints_transcript() {
    let o = wcauth(&[
        "demo",
        "--affine",
        "5",
        "--strategy",
        "intercept-certain",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v.to_string().contains("bob_verdict"));
}

#[test]
fn reproduce_paper_passes() {
    let o = wcauth(&["reproduce-paper"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let o = wcauth(&["reproduce-paper", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["lines"].as_array().unwrap().len(), 5);
}

#[test]
fn reproduce_paper_tolerance_can_fail() {
    // 680.5 years against 680 is a 0.07% gap.
    let o = wcauth(&["reproduce-paper", "--tolerance", "0.0001"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}
