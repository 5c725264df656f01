//! Golden corpus: canonical objects re-print byte for byte, and recorded
//! command outputs are reproduced exactly.

mod common;

use std::time::Instant;

use jetidf::printer::form_text;
use jetidf::syntax::{parse_field, parse_form};
use jetidf_core::BundleConfig;

#[test]
fn corpus_reprints_and_replays_exactly() {
    let t = Instant::now();
    let files = common::corpus();
    assert_eq!(files.len(), 100);
    for (name, text) in &files {
        if let Err(e) = common::check(text) {
            panic!("{name}: {e}");
        }
    }
    assert!(t.elapsed().as_secs() < 30);
}

#[test]
fn noncanonical_inputs_print_canonically() {
    let cfg = BundleConfig::new(2, 1, 2).unwrap();
    for (a, b) in [
        ("x1*2 + u1 - u1", "2*x1"),
        ("d[1](x2) ^ d[1](x1)", "-d[1](x1) ^ d[1](x2)"),
        ("dv[2](dv[1](u1))", "-dv[1](dv[2](u1))"),
        ("kappa[2](dv[1](u1_(1,0)))", "dv[2](u1_(1,0))"),
        ("D(1,0)(u1)", "u1_(1,0)"),
        ("(1/2)*(2/3)", "1/3"),
        ("dh[1](u1)", "u1_(1,0) * d[1](x1) + u1_(0,1) * d[1](x2)"),
    ] {
        let f = parse_form(a, cfg).unwrap();
        assert_eq!(form_text(&f), b, "{a}");
        assert_eq!(parse_form(&form_text(&f), cfg).unwrap(), f);
    }
    let empty = parse_field("[]", cfg).unwrap();
    assert!(empty.is_zero());
}
