use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wach-lab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wach-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn golden(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../wachlab/tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn verify_unit_examples() {
    let ok = run(&["verify-unit", "--p", "3", "--m", "1", "--prec", "8", "--pd-deg", "40"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("proof-bound cutoff"));
    let exp = run(&["verify-unit", "--p", "2", "--m", "1", "--chi0", "exp"]);
    assert_eq!(code(&exp), 2);
    assert!(String::from_utf8_lossy(&exp.stderr).contains("diverges"));
    assert_eq!(code(&run(&["verify-unit", "--prec", "many"])), 2);
    assert_eq!(code(&run(&["verify-unit", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn descend_examples() {
    let t1 = run(&["descend", "--fixture", "twist:1", "--p", "3", "--m", "1", "--prec", "6"]);
    assert_eq!(code(&t1), 0, "{}", stdout(&t1));
    assert!(stdout(&t1).contains("compare coefficients"));
    let triv = run(&["descend", "--fixture", "trivial", "--prec", "6"]);
    assert_eq!(code(&triv), 0);
    let bad = run(&["descend", "--fixture", "corrupt-commutation", "--prec", "6"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("consistency violation"));
    let low = run(&["descend", "--fixture", "twist:1", "--prec", "2"]);
    assert_eq!(code(&low), 3);
    assert_eq!(code(&run(&["descend"])), 2);
    assert_eq!(code(&run(&["descend", "--fixture", "twist"])), 2);
}

#[test]
fn json_report_embeds_config_and_ledger() {
    let out = tmp("twist1.json");
    let o = run(&[
        "descend", "--fixture", "twist:1", "--prec", "6", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "wach-lab/v1");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["config"]["prec"], 6);
    assert_eq!(v["config"]["fixture"], "twist:1");
    assert_eq!(v["ledger"]["surviving"], 3);
    let again = run(&["descend", "--fixture", "twist:1", "--prec", "6", "--json"]);
    let w: Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(w["result"], v["result"]);
}

#[test]
fn config_file_and_flag_precedence() {
    let path = tmp("run.conf");
    std::fs::write(&path, "# twist over Q_2(zeta_4)\np = 2\nm = 2\nprec = 8\nfixture = twist:2\n").unwrap();
    let p = path.to_str().unwrap();
    let v: Value = serde_json::from_str(&stdout(&run(&["descend", "--config", p, "--json"]))).unwrap();
    assert_eq!(v["config"]["p"], 2);
    assert_eq!(v["exit_code"], 0);
    let v: Value =
        serde_json::from_str(&stdout(&run(&["descend", "--config", p, "--prec", "7", "--json"]))).unwrap();
    assert_eq!(v["config"]["prec"], 7);
    std::fs::write(&path, "p = 2\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(&["descend", "--config", p])), 2);
}

#[test]
fn module_files_round_trip_through_the_cli() {
    let made = run(&["fixture", "--fixture", "twist:1", "--p", "3", "--m", "1", "--prec", "6"]);
    assert_eq!(code(&made), 0);
    assert_eq!(stdout(&made), std::fs::read_to_string(golden("twist1_p3_m1.wach")).unwrap());
    let o = run(&["descend", "--module-file", &golden("gauge1_p3_m1_d2.wach"), "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["d"], 2);
    assert_eq!(code(&run(&["descend", "--module-file", "/nonexistent/x.wach"])), 2);
}

#[test]
fn suite_filter_and_low_precision() {
    let o = run(&["suite", "--filter", "pd-ring", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["criteria"].as_array().unwrap().len(), 1);
    assert_eq!(v["result"]["criteria"][0]["id"], 2);
    let low = run(&["suite", "--filter", "descent", "--prec", "2"]);
    assert_eq!(code(&low), 3);
    assert!(stdout(&low).contains("precision-exhausted"));
    assert_eq!(code(&run(&["suite", "--filter", "nothing"])), 2);
}
