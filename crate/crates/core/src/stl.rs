//! STL reading and writing, binary and ASCII.
//!
//! Coordinates are stored as `f32`, exactly as they appear on disk. Conversion
//! to the `f64` geometry types happens in [`StlDocument::to_soup`] and
//! [`StlDocument::from_mesh`].

use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::{TriangleMesh, Vec3};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StlError {
    #[error("input is empty")]
    Empty,
    #[error("binary STL is truncated: {actual} bytes, expected {expected}")]
    Truncated { expected: u64, actual: usize },
    #[error("malformed ASCII STL at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("facet {0} has a non-finite coordinate")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlFormat {
    Binary,
    Ascii,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

impl Facet {
    /// Unit normal from the winding of the corners; zero for degenerate facets.
    pub fn computed_normal(&self) -> Vec3 {
        let [a, b, c] = self.vertices.map(to_vec3);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StlHeader {
    Binary([u8; HEADER_LEN]),
    Ascii(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StlDocument {
    pub header: StlHeader,
    pub facets: Vec<Facet>,
}

fn to_vec3(p: [f32; 3]) -> Vec3 {
    Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64)
}

fn to_f32(p: &Vec3) -> [f32; 3] {
    [p.x as f32, p.y as f32, p.z as f32]
}

impl StlDocument {
    /// Builds a document from a mesh, with normals recomputed from the winding.
    pub fn from_mesh(mesh: &TriangleMesh, name: &str) -> Self {
        let facets = mesh
            .to_soup()
            .iter()
            .map(|corners| {
                let mut facet = Facet {
                    normal: [0.0; 3],
                    vertices: corners.map(|p| to_f32(&p)),
                };
                facet.normal = to_f32(&facet.computed_normal());
                facet
            })
            .collect();
        StlDocument {
            header: StlHeader::Ascii(name.to_string()),
            facets,
        }
    }

    /// Triangle soup in `f64`, stored normals ignored.
    pub fn to_soup(&self) -> Vec<[Vec3; 3]> {
        self.facets.iter().map(|f| f.vertices.map(to_vec3)).collect()
    }

    pub fn name(&self) -> String {
        match &self.header {
            StlHeader::Ascii(name) => name.clone(),
            StlHeader::Binary(bytes) => String::from_utf8_lossy(bytes)
                .trim_end_matches(['\0', ' '])
                .to_string(),
        }
    }
}

/// Parses STL bytes, auto-detecting the format.
///
/// Input is ASCII only when it starts with `solid` and the whole text parses;
/// anything else is read as binary. When both readings fail, the ASCII error
/// is reported for `solid`-prefixed input.
pub fn parse_stl(bytes: &[u8]) -> Result<StlDocument, StlError> {
    if bytes.is_empty() {
        return Err(StlError::Empty);
    }
    if bytes.starts_with(b"solid") {
        let ascii_err = match parse_ascii(bytes) {
            Ok(doc) => return Ok(doc),
            Err(e) => e,
        };
        return parse_binary(bytes).map_err(|_| ascii_err);
    }
    parse_binary(bytes)
}

pub fn parse_binary(bytes: &[u8]) -> Result<StlDocument, StlError> {
    if bytes.is_empty() {
        return Err(StlError::Empty);
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(StlError::Truncated {
            expected: (HEADER_LEN + 4) as u64,
            actual: bytes.len(),
        });
    }
    let mut header = [0u8; HEADER_LEN];
    header.copy_from_slice(&bytes[..HEADER_LEN]);
    let count = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap());
    let expected = (HEADER_LEN + 4) as u64 + RECORD_LEN as u64 * count as u64;
    if bytes.len() as u64 != expected {
        return Err(StlError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let facets = bytes[HEADER_LEN + 4..]
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, record)| {
            let mut floats = [0f32; 12];
            for (k, f) in floats.iter_mut().enumerate() {
                *f = f32::from_le_bytes(record[4 * k..4 * k + 4].try_into().unwrap());
            }
            if floats[3..].iter().any(|f| !f.is_finite()) {
                return Err(StlError::NonFinite(i));
            }
            let v = |k: usize| [floats[k], floats[k + 1], floats[k + 2]];
            Ok(Facet {
                normal: v(0),
                vertices: [v(3), v(6), v(9)],
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StlDocument {
        header: StlHeader::Binary(header),
        facets,
    })
}

struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: std::str::SplitWhitespace<'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens {
            lines: text.lines().enumerate(),
            current: "".split_whitespace(),
            line: 0,
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        loop {
            if let Some(tok) = self.current.next() {
                return Some(tok);
            }
            let (i, line) = self.lines.next()?;
            self.line = i + 1;
            self.current = line.split_whitespace();
        }
    }

    fn err(&self, message: impl Into<String>) -> StlError {
        StlError::Malformed {
            line: self.line.max(1),
            message: message.into(),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<(), StlError> {
        match self.next() {
            Some(tok) if tok == keyword => Ok(()),
            Some(tok) => Err(self.err(format!("expected `{keyword}`, found `{tok}`"))),
            None => Err(self.err(format!("expected `{keyword}`, found end of input"))),
        }
    }

    fn float(&mut self) -> Result<f32, StlError> {
        let tok = self
            .next()
            .ok_or_else(|| self.err("expected a number, found end of input"))?;
        let value: f32 = tok
            .parse()
            .map_err(|_| self.err(format!("invalid number `{tok}`")))?;
        if !value.is_finite() {
            return Err(self.err(format!("non-finite number `{tok}`")));
        }
        Ok(value)
    }

    fn triple(&mut self) -> Result<[f32; 3], StlError> {
        Ok([self.float()?, self.float()?, self.float()?])
    }
}

pub fn parse_ascii(bytes: &[u8]) -> Result<StlDocument, StlError> {
    if bytes.is_empty() {
        return Err(StlError::Empty);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        StlError::Malformed {
            line,
            message: "input is not valid UTF-8".into(),
        }
    })?;
    let first_line = text.lines().next().unwrap_or("");
    let name = first_line
        .trim_start()
        .strip_prefix("solid")
        .ok_or(StlError::Malformed {
            line: 1,
            message: "expected `solid`".into(),
        })?
        .trim()
        .to_string();
    let mut tokens = Tokens::new(text);
    // Skip the header line wholesale: the solid name may contain anything.
    tokens.next();
    tokens.current = "".split_whitespace();

    let mut facets = Vec::new();
    loop {
        match tokens.next() {
            Some("facet") => {
                tokens.expect("normal")?;
                let normal = tokens.triple()?;
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                let mut vertices = [[0f32; 3]; 3];
                for v in &mut vertices {
                    tokens.expect("vertex")?;
                    *v = tokens.triple()?;
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
                facets.push(Facet { normal, vertices });
            }
            Some("endsolid") => break,
            Some(tok) => {
                return Err(tokens.err(format!("expected `facet` or `endsolid`, found `{tok}`")))
            }
            None => return Err(tokens.err("missing `endsolid`")),
        }
    }
    // Only the optional solid name may follow `endsolid` on its line.
    let end_line = tokens.line;
    tokens.current = "".split_whitespace();
    if let Some(tok) = tokens.next() {
        if tokens.line != end_line {
            return Err(tokens.err(format!("unexpected `{tok}` after `endsolid`")));
        }
    }
    Ok(StlDocument {
        header: StlHeader::Ascii(name),
        facets,
    })
}

pub fn write_stl(doc: &StlDocument, format: StlFormat) -> Vec<u8> {
    match format {
        StlFormat::Binary => write_binary(doc),
        StlFormat::Ascii => write_ascii(doc).into_bytes(),
    }
}

fn write_binary(doc: &StlDocument) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * doc.facets.len());
    let header = match &doc.header {
        StlHeader::Binary(bytes) => *bytes,
        StlHeader::Ascii(name) => {
            let mut bytes = [0u8; HEADER_LEN];
            // A binary header must not start with "solid" or readers may take it for ASCII.
            let text = format!("binary {name}");
            let n = text.len().min(HEADER_LEN);
            bytes[..n].copy_from_slice(&text.as_bytes()[..n]);
            bytes
        }
    };
    out.extend_from_slice(&header);
    out.extend_from_slice(&(doc.facets.len() as u32).to_le_bytes());
    for facet in &doc.facets {
        for v in std::iter::once(&facet.normal).chain(&facet.vertices) {
            for c in v {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

fn write_ascii(doc: &StlDocument) -> String {
    let name = doc.name();
    let mut out = format!("solid {name}\n");
    // `{:?}` on f32 prints the shortest string that parses back to the same value.
    let fmt = |v: &[f32; 3]| format!("{:?} {:?} {:?}", v[0], v[1], v[2]);
    for facet in &doc.facets {
        let _ = writeln!(out, "  facet normal {}", fmt(&facet.normal));
        out.push_str("    outer loop\n");
        for v in &facet.vertices {
            let _ = writeln!(out, "      vertex {}", fmt(v));
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(out, "endsolid {name}");
    out
}
