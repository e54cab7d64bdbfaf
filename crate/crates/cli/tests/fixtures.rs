//! The shipped fixtures are exactly what the emitter writes for the two
//! built-in codes. Set MSRLAB_BLESS=1 to regenerate them.

use std::path::PathBuf;

use msrlab::code::{known, ArrayCode};
use msrlab_cli::formats::{code_from_json, code_to_json};
use msrlab_cli::json;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn check(name: &str, code: ArrayCode) {
    let text = json::to_string(&code_to_json(&code));
    let path = fixture(name);
    if std::env::var_os("MSRLAB_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let shipped = std::fs::read_to_string(&path).unwrap();
    assert_eq!(shipped, text, "{name} drifted from the emitter");
    assert_eq!(code_from_json(&serde_json::from_str(&shipped).unwrap()).unwrap(), code);
}

#[test]
fn fig1_fixture_is_byte_stable() {
    check("fig1.json", known::fig1());
}

#[test]
fn table1_fixture_is_byte_stable() {
    check("table1.json", known::table1());
}
