use linsys::selftest::{run_selftest, SelftestOptions};

#[test]
fn all_criteria() {
    let report = run_selftest(&SelftestOptions::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    assert_eq!(report.criteria.len(), 13);
    let failed: Vec<u8> = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.id)
        .collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
