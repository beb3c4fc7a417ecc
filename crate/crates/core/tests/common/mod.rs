#![allow(dead_code)]

use std::path::{Path, PathBuf};

use qrcompose::model::{ComponentLibrary, SystemGraph};
use qrcompose::query::load_system;
use qrcompose::sqdl::{parse_component_library, parse_query, Query};
use qrcompose::{build_system_model, Configuration, QRModel};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

pub fn library() -> ComponentLibrary {
    parse_component_library(&read("c123.qr")).unwrap()
}

pub fn system(sys: &str) -> (SystemGraph, QRModel) {
    let (graph, lib) = load_system(&data_dir().join(sys), &data_dir().join("c123.qr")).unwrap();
    let model = build_system_model(&graph, &lib).unwrap();
    (graph, model)
}

/// A stored query retargeted at another system file.
pub fn query_on(file: &str, sys: &str) -> Query {
    let mut q = parse_query(&read(file)).unwrap();
    q.system_file = sys.to_string();
    q
}

pub fn cfg(s: &str) -> Configuration {
    s.parse().unwrap()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}
