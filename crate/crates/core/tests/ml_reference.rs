//! E_{α,β}(-η) against 50-digit reference values spanning every branch.

use fracdiff_core::mittag_leffler;
use serde_json::Value;

#[test]
fn matches_high_precision_table() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ml_reference.json")).unwrap();
    let rows: Vec<Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 480);
    let mut worst = (0.0_f64, String::new());
    for r in &rows {
        let (a, b, eta, want) = (
            r["alpha"].as_f64().unwrap(),
            r["beta"].as_f64().unwrap(),
            r["eta"].as_f64().unwrap(),
            r["value"].as_f64().unwrap(),
        );
        let got = mittag_leffler(a, b, -eta).unwrap();
        let err = (got - want).abs();
        if err > worst.0 {
            worst = (err, format!("alpha={a} beta={b} eta={eta}: {got:e} vs {want:e}"));
        }
    }
    assert!(worst.0 < 1e-13, "worst {}: {}", worst.0, worst.1);
}
