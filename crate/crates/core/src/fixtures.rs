//! The four L-bracket models of the case study, bundled as OpenSCAD source.
//!
//! `MODEL_D` is the reference; the others are the generated candidates in
//! order of increasing input structure.

pub const MODEL_A: &str = include_str!("../fixtures/model_a.scad");
pub const MODEL_B: &str = include_str!("../fixtures/model_b.scad");
pub const MODEL_C: &str = include_str!("../fixtures/model_c.scad");
pub const MODEL_D: &str = include_str!("../fixtures/model_d.scad");

/// `(file name, source)` in a → d order.
pub const ALL: [(&str, &str); 4] = [
    ("model_a.scad", MODEL_A),
    ("model_b.scad", MODEL_B),
    ("model_c.scad", MODEL_C),
    ("model_d.scad", MODEL_D),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".scad").unwrap_or(name);
    ALL.iter()
        .find(|(file, _)| file.strip_suffix(".scad") == Some(stem))
        .map(|(_, text)| *text)
}
