use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn coboson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coboson"))
        .args(args)
        .env_remove("COBOSON_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn qdot_csv_header_and_spot() {
    let out = coboson(&["qdot", "--n-max", "3", "--r", "0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,r,g2,delta"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "2");
    let delta: f64 = first[3].parse().unwrap();
    assert!((delta - 0.5001).abs() < 1e-12);
}

#[test]
fn json_output_carries_metadata() {
    let out = coboson(&["--format", "json", "branching", "--delta2", "0.1,0.2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for key in ["\"scenario\"", "\"columns\"", "\"rows\"", "\"error_estimates\"", "\"tool_version\""] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("ep.csv");
    let _ = fs::remove_file(&path);
    let out = coboson(&["--out", path.to_str().unwrap(), "ep-scan", "--v", "0.25", "--gamma-diff", "0.5"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("v,gamma_diff,abs_omega_sq,regime,coalescence\n"));
    assert!(text.contains("exceptional"));
}

#[test]
fn preset_scenario_runs_back_through_run() {
    let out = coboson(&["preset", "fig3a", "--print-scenario"]);
    assert!(out.status.success());
    let path = scratch("fig3a.json");
    fs::write(&path, &out.stdout).unwrap();
    let direct = coboson(&["preset", "fig3a"]);
    let via_file = coboson(&["run", path.to_str().unwrap()]);
    assert!(via_file.status.success(), "{}", stderr(&via_file));
    assert_eq!(direct.stdout, via_file.stdout);
}

#[test]
fn network_preset_has_branching_section() {
    let out = coboson(&["preset", "fmo_demo"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (_, footer) = text.split_once("\n\n").expect("blank line before branching table");
    assert!(footer.starts_with("site,fraction\n"));
    assert!(footer.contains("survival,"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [&["bogus"][..], &["tunnel", "--v", "1:2"], &["qdot", "--r", "abc"]] {
        let out = coboson(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).starts_with("error_code: usage: "), "{}", stderr(&out));
    }
}

#[test]
fn malformed_scenarios_exit_2() {
    let path = scratch("typo.json");
    fs::write(&path, "{\"version\": 1, \"kind\": \"ep_scan\",\n \"params\": {\"vv\": 1}}").unwrap();
    let out = coboson(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("vv"), "{}", stderr(&out));

    let out = coboson(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error_code: "));
}

#[test]
fn invalid_values_exit_3() {
    let out = coboson(&["tunnel", "--gamma1", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.starts_with("error_code: "), "{err}");
    assert!(err.contains("gamma1 >= 0"), "{err}");

    let out = coboson(&["qdot", "--n-max", "500", "--r", "0.07"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn network_subcommand_rejects_other_kinds() {
    let path = scratch("not_network.json");
    let print = coboson(&["preset", "fig1", "--print-scenario"]);
    fs::write(&path, &print.stdout).unwrap();
    let out = coboson(&["network", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn selftest_passes() {
    let out = coboson(&["selftest", "--cases", "20"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().count() >= 6);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn help_exits_zero() {
    let out = coboson(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("selftest"));
}
