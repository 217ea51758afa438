//! The acceptance suite as an integration test target: every criterion
//! runs at its stated tolerance and full default scale, one printed
//! pass/fail line each.

use microsing::config::RunConfig;
use microsing::selftest::criteria;

#[test]
fn acceptance_criteria() {
    let cfg = RunConfig::default();
    assert!(!cfg.quick, "acceptance runs at full scale");
    let mut failures = Vec::new();
    for c in criteria() {
        let t0 = std::time::Instant::now();
        let outcome = (c.run)(&cfg).unwrap_or_else(|e| panic!("criterion {} errored: {e}", c.id));
        let secs = t0.elapsed().as_secs_f64();
        println!(
            "[{}] criterion {:>2}: {} ({secs:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name
        );
        assert!(
            secs <= 60.0,
            "criterion {} exceeded the per-line budget: {secs:.1} s",
            c.id
        );
        if !outcome.pass {
            failures.push((c.id, c.name, outcome.details));
        }
    }
    for (id, name, details) in &failures {
        eprintln!("criterion {id} failed: {name}\n{details:#}");
    }
    assert!(failures.is_empty(), "{} criteria failed", failures.len());
}
