#![allow(dead_code)]

use std::path::PathBuf;

use xcsp::document::{self, Loaded};
use xcsp::model::Instance;

pub const FIXTURES: &[&str] = &[
    "queens-extension.xml",
    "queens-intension.xml",
    "test-extension.xml",
    "test-intension.xml",
    "magic-square.xml",
    "qcsp-example.xml",
    "qcsp-plus-example.xml",
    "wcsp-example.xml",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn load_fixture(name: &str) -> Loaded {
    document::load_instance(&fixture_bytes(name)).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

pub fn fixture_instance(name: &str) -> Instance {
    load_fixture(name).instance
}
