use std::path::PathBuf;

use wachlab::commands::descend_cmd;
use wachlab::config::RunConfig;
use wachlab::fixtures::Fixture;
use wachlab::io::{read_module, write_module};

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

fn cfg(p: u64, m: u32, d: usize, prec: u32) -> RunConfig {
    RunConfig {
        p,
        m,
        d,
        prec,
        ..RunConfig::default()
    }
}

const FILES: &[(&str, &str, u64, u32, usize, u32)] = &[
    ("twist1_p3_m1", "twist:1", 3, 1, 1, 6),
    ("twist2_p2_m2", "twist:2", 2, 2, 1, 8),
    ("gauge1_p3_m1_d2", "gauge:1", 3, 1, 2, 6),
];

#[test]
fn module_files_match_the_fixtures() {
    for &(name, fx, p, m, d, prec) in FILES {
        let rp = cfg(p, m, d, prec).rel().unwrap();
        let w = fx.parse::<Fixture>().unwrap().module(&rp).unwrap();
        let text = read(&format!("{name}.wach"));
        assert_eq!(write_module(&w), text, "{name}");
        assert!(read_module(&text).unwrap().axioms_check().all_pass(), "{name}");
    }
}

#[test]
fn descents_of_module_files_match_golden_output() {
    for &(name, ..) in FILES {
        let text = read(&format!("{name}.wach"));
        let report = descend_cmd(&RunConfig::default(), Some(&text));
        assert_eq!(report.exit_code, 0, "{name}: {}", report.text);
        let got = serde_json::to_string_pretty(&serde_json::json!({
            "basis": report.result["basis"]["f"],
            "ledger": report.ledger,
        }))
        .unwrap()
            + "\n";
        let golden = fixture_path(&format!("{name}.descent.json"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&golden, &got).unwrap();
        }
        assert_eq!(got, std::fs::read_to_string(&golden).unwrap(), "{name}");
    }
}

#[test]
fn module_file_descent_agrees_with_the_fixture_run() {
    let text = read("twist1_p3_m1.wach");
    let from_file = descend_cmd(&RunConfig::default(), Some(&text));
    let mut c = cfg(3, 1, 1, 6);
    c.fixture = Some("twist:1".into());
    let from_fixture = descend_cmd(&c, None);
    assert_eq!(from_file.result["basis"], from_fixture.result["basis"]);
    assert!(from_fixture.result["comparison"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}
