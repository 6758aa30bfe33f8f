//! One line per acceptance criterion; the test fails if any criterion does.

use pushfwd::selftest::run_all;

#[test]
fn acceptance() {
    let results = run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
