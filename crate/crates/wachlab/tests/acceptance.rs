use wachlab::config::RunConfig;
use wachlab::report::Status;
use wachlab::suite::run_suite;

#[test]
fn acceptance() {
    let start = std::time::Instant::now();
    let summary = run_suite(&RunConfig::default()).expect("default configuration is valid");
    for c in &summary.criteria {
        let verdict = if c.status == Status::Success { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2}: {verdict} ({:.2} s) {}",
            c.id,
            c.elapsed.as_secs_f64(),
            c.title
        );
        for k in c.checks.iter().filter(|k| !k.passed) {
            println!("    {}: {}", k.name, k.detail);
        }
    }
    let total = start.elapsed().as_secs_f64();
    println!("suite: {:.2} s (limit 60 s)", total);
    assert_eq!(summary.criteria.len(), 10);
    assert!(total < 60.0);
    assert_eq!(summary.status, Status::Success);
}
