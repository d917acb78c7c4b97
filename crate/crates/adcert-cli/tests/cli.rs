//! End-to-end checks of the `adcert` binary: exit codes, exact output
//! formats, and config round-trips.

use std::process::{Command, Output};

fn adcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn ad_prints_exact_rationals() {
    let out = adcert(&["ad", "--fixture", "intro_identity", "--at", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0/1");
    let out = adcert(&["ad", "--fixture", "intro_identity", "--at", "3"]);
    assert_eq!(stdout(&out).trim(), "1/1");
}

#[test]
fn eval_matches_the_program() {
    let out = adcert(&["eval", "--fixture", "intro_identity", "--at", "-5/2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "-5/2");
    let out = adcert(&["eval", "--fixture", "intro_half", "--at", "-2", "--decimal"]);
    assert!(stdout(&out).contains("-1/1 (-1)"));
}

#[test]
fn classify_verdicts() {
    let out = adcert(&["classify", "--fixture", "intro_half", "--at", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("NonDiffNotClarke"));
    let out = adcert(&["classify", "--fixture", "intro_identity", "--at", "0"]);
    assert!(stdout(&out).starts_with("DiffIncorrect"));
    let out = adcert(&[
        "classify",
        "--fixture",
        "thm3_bias_lb,M=16eq,n=3,a=2",
        "--at",
        "-8,0,0,0",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("NonDiffClarke"), "{text}");
    assert!(text.contains("certificate=ThmBiasClarke"));
    assert!(text.contains("witness=1:1"));
}

#[test]
fn census_exit_codes_and_summary() {
    let out = adcert(&[
        "census",
        "--fixture",
        "intro_grid_adversary,M=list:-1:0:1,l=7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# inc_count,3"));
    assert!(text.contains("# inc_density,1/1"));
    assert!(text.contains("# verify,pass"));
}

#[test]
fn census_csv_and_determinism() {
    let dir = std::env::temp_dir().join(format!("adcert-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("r.csv");
    let args = [
        "census",
        "--fixture",
        "thm3_bias_lb,M=list:-1:0:1,n=2,a=1",
        "--log-points",
        "--out",
    ];
    let run = || {
        let mut a: Vec<&str> = args.to_vec();
        let path = csv.to_str().unwrap();
        a.push(path);
        let out = adcert(&a);
        assert!(out.status.success());
        std::fs::read_to_string(&csv).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "census output must be reproducible");
    assert!(first.starts_with("w1,w2,w3,verdict,certificate,witness"));
    assert!(first.contains("# verify,pass"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bounds_output() {
    let out = adcert(&[
        "bounds",
        "--fixture",
        "thm7_ndf_lb_kinks,M=16eq,n=4,a=1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bias_ndf_bound n/a"));
    assert!(text.contains("general_union_bound 1/4"));
    assert!(text.contains("inc_bound 1/4"));
}

#[test]
fn fixture_writes_config_that_reloads() {
    let dir = std::env::temp_dir().join(format!("adcert-cli-fx-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("net.json");
    let out = adcert(&[
        "fixture",
        "intro_grid_adversary,M=list:-1:0:1,l=7",
        "--out",
        cfg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(dir.join("net.answers.json").exists());
    // The written config round-trips through --net, pins included.
    let out = adcert(&["ad", "--net", cfg.to_str().unwrap(), "--at", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "7/1");
    let out = adcert(&["census", "--net", cfg.to_str().unwrap(), "--grid", "-1,0,1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# inc_count,3"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    // Neither --net nor --fixture.
    let out = adcert(&["classify", "--at", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown fixture.
    let out = adcert(&["classify", "--fixture", "nope", "--at", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // Wrong arity.
    let out = adcert(&["classify", "--fixture", "intro_identity", "--at", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    // Missing file.
    let out = adcert(&["eval", "--net", "/nonexistent.json", "--at", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // Bad subcommand usage (clap).
    let out = adcert(&["classify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_too_large_is_a_config_error() {
    let out = adcert(&[
        "census",
        "--fixture",
        "thm7_ndf_lb_zeros,M=16eq,n=4,a=1",
        "--point-cap",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equispaced_grid_form() {
    let out = adcert(&[
        "census",
        "--fixture",
        "thm3_bias_lb,M=list:-1:0:1,n=2,a=1",
        "--grid",
        "equispaced:-1:1:3",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# grid_size,3"));
}
