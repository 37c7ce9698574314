//! The acceptance gate: every criterion in the `all` verification suite
//! must pass, with one printed line per criterion.

#[test]
fn acceptance() {
    let ledger = uslope::verify::run_suite("all").expect("suite runs");
    assert_eq!(ledger.items.len(), 15);
    for item in &ledger.items {
        println!("{} {}: {} — {}", item.id, item.status, item.desc, item.detail);
    }
    let failed: Vec<_> = ledger
        .items
        .iter()
        .filter(|i| i.status == uslope::verify::Status::Fail)
        .map(|i| i.id.as_str())
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
