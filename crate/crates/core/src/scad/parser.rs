//! Parser for the box-only OpenSCAD subset:
//! `module NAME() { ... }`, `NAME();`, `cube([x,y,z]);`, `translate([x,y,z]) CHILD`,
//! `union() { ... }`, `difference() { ... }` and `//` comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScadError {
    #[error("{location}: unsupported construct `{construct}`")]
    UnsupportedConstruct { construct: String, location: Location },
    #[error("{location}: call to undefined module `{name}`")]
    UndefinedModule { name: String, location: Location },
    #[error("{location}: module `{name}` is defined more than once")]
    DuplicateModule { name: String, location: Location },
    #[error("module `{0}` calls itself recursively")]
    RecursiveModule(String),
    #[error("{location}: cube size must be strictly positive and finite")]
    InvalidCube { location: Location },
    #[error("{location}: syntax error: {message}")]
    SyntaxError { message: String, location: Location },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScadNode {
    Cube(Vec3),
    Translate { offset: Vec3, children: Vec<ScadNode> },
    Union(Vec<ScadNode>),
    Difference(Vec<ScadNode>),
    ModuleCall { name: String, location: Location },
}

/// Parsed program. Top-level statements form an implicit union, as do module bodies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScadAst {
    pub modules: BTreeMap<String, Vec<ScadNode>>,
    pub statements: Vec<ScadNode>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Punct(char),
    Other(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    at: Location,
}

fn lex(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
            if c == '-' || c == '+' {
                i += 1;
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            match s.parse::<f64>() {
                Ok(v) if s.chars().any(|c| c.is_ascii_digit()) => Tok::Number(v),
                _ => Tok::Other(s),
            }
        } else if "()[]{},;".contains(c) {
            i += 1;
            Tok::Punct(c)
        } else {
            i += 1;
            Tok::Other(c.to_string())
        };
        col += i - start;
        out.push(Token { tok, at });
    }
    out
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Location,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn location(&self) -> Location {
        self.tokens.get(self.pos).map(|t| t.at).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn syntax(&self, message: impl Into<String>) -> ScadError {
        ScadError::SyntaxError {
            message: message.into(),
            location: self.location(),
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Other(s)) => format!("`{s}`"),
            Some(Tok::Number(v)) => format!("number {v}"),
            Some(Tok::Punct(c)) => format!("`{c}`"),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ScadError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`, found {}", self.describe())))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), ScadError> {
        match self.bump() {
            Some(Token { tok: Tok::Ident(s), at }) => Ok((s, at)),
            _ => {
                self.pos -= 1;
                Err(self.syntax(format!("expected identifier, found {}", self.describe())))
            }
        }
    }

    fn number(&mut self) -> Result<f64, ScadError> {
        match self.peek() {
            Some(Tok::Number(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(s)) => Err(ScadError::UnsupportedConstruct {
                construct: format!("expression `{s}`"),
                location: self.location(),
            }),
            _ => Err(self.syntax(format!("expected number, found {}", self.describe()))),
        }
    }

    fn vector(&mut self) -> Result<Vec3, ScadError> {
        if let Some(Tok::Number(_)) = self.peek() {
            return Err(ScadError::UnsupportedConstruct {
                construct: "scalar argument (only `[x, y, z]` vectors are supported)".into(),
                location: self.location(),
            });
        }
        self.expect('[')?;
        let x = self.number()?;
        self.expect(',')?;
        let y = self.number()?;
        self.expect(',')?;
        let z = self.number()?;
        self.expect(']')?;
        Ok(Vec3::new(x, y, z))
    }

    fn empty_args(&mut self, what: &str, at: Location) -> Result<(), ScadError> {
        self.expect('(')?;
        if self.peek() != Some(&Tok::Punct(')')) {
            return Err(ScadError::UnsupportedConstruct {
                construct: format!("arguments to `{what}`"),
                location: at,
            });
        }
        self.expect(')')
    }

    /// A block `{ ... }` or a single statement.
    fn child(&mut self) -> Result<Vec<ScadNode>, ScadError> {
        if self.peek() == Some(&Tok::Punct('{')) {
            self.pos += 1;
            let mut body = Vec::new();
            while self.peek() != Some(&Tok::Punct('}')) {
                if self.peek().is_none() {
                    return Err(self.syntax("unclosed `{`"));
                }
                body.extend(self.statement()?);
            }
            self.pos += 1;
            Ok(body)
        } else {
            Ok(self.statement()?.into_iter().collect())
        }
    }

    fn statement(&mut self) -> Result<Option<ScadNode>, ScadError> {
        if self.peek() == Some(&Tok::Punct(';')) {
            self.pos += 1;
            return Ok(None);
        }
        if self.peek() == Some(&Tok::Punct('{')) {
            return Ok(Some(ScadNode::Union(self.child()?)));
        }
        if let Some(Tok::Other(s)) = self.peek() {
            return Err(ScadError::UnsupportedConstruct {
                construct: s.clone(),
                location: self.location(),
            });
        }
        let (name, at) = self.ident()?;
        match name.as_str() {
            "cube" => {
                self.expect('(')?;
                let size = self.vector()?;
                if self.peek() == Some(&Tok::Punct(',')) {
                    return Err(ScadError::UnsupportedConstruct {
                        construct: "extra arguments to `cube`".into(),
                        location: self.location(),
                    });
                }
                self.expect(')')?;
                self.expect(';')?;
                if !(0..3).all(|k| size[k].is_finite() && size[k] > 0.0) {
                    return Err(ScadError::InvalidCube { location: at });
                }
                Ok(Some(ScadNode::Cube(size)))
            }
            "translate" => {
                self.expect('(')?;
                let offset = self.vector()?;
                self.expect(')')?;
                let children = self.child()?;
                Ok(Some(ScadNode::Translate { offset, children }))
            }
            "union" => {
                self.empty_args("union", at)?;
                Ok(Some(ScadNode::Union(self.child()?)))
            }
            "difference" => {
                self.empty_args("difference", at)?;
                Ok(Some(ScadNode::Difference(self.child()?)))
            }
            "module" => Err(ScadError::UnsupportedConstruct {
                construct: "nested module definition".into(),
                location: at,
            }),
            _ => {
                if self.peek() != Some(&Tok::Punct('(')) {
                    return Err(ScadError::UnsupportedConstruct {
                        construct: name,
                        location: at,
                    });
                }
                self.pos += 1;
                if self.peek() != Some(&Tok::Punct(')')) || is_builtin(&name) {
                    return Err(ScadError::UnsupportedConstruct {
                        construct: name,
                        location: at,
                    });
                }
                self.pos += 1;
                // `name() child` would be a transform-like builtin, which is outside the subset.
                if self.peek() != Some(&Tok::Punct(';')) {
                    return Err(ScadError::UnsupportedConstruct {
                        construct: format!("children passed to `{name}`"),
                        location: at,
                    });
                }
                self.pos += 1;
                Ok(Some(ScadNode::ModuleCall { name, location: at }))
            }
        }
    }
}

const BUILTINS: &[&str] = &[
    "sphere", "cylinder", "polyhedron", "square", "circle", "polygon", "text", "rotate", "scale",
    "mirror", "multmatrix", "color", "offset", "resize", "hull", "minkowski", "intersection",
    "linear_extrude", "rotate_extrude", "projection", "render", "surface", "import", "children",
    "echo", "assert", "for", "intersection_for", "if", "let", "each", "function", "include", "use",
];

fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

pub fn parse_scad(text: &str) -> Result<ScadAst, ScadError> {
    let tokens = lex(text);
    let end = Location {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser { tokens, pos: 0, end };
    let mut ast = ScadAst::default();
    while p.peek().is_some() {
        if p.peek() == Some(&Tok::Ident("module".into())) {
            p.pos += 1;
            let (name, at) = p.ident()?;
            p.expect('(')?;
            if p.peek() != Some(&Tok::Punct(')')) {
                return Err(ScadError::UnsupportedConstruct {
                    construct: format!("parameters of module `{name}`"),
                    location: p.location(),
                });
            }
            p.expect(')')?;
            if p.peek() != Some(&Tok::Punct('{')) {
                return Err(p.syntax(format!("expected `{{` after module `{name}`")));
            }
            let body = p.child()?;
            if ast.modules.insert(name.clone(), body).is_some() {
                return Err(ScadError::DuplicateModule { name, location: at });
            }
        } else if let Some(node) = p.statement()? {
            ast.statements.push(node);
        }
    }
    validate(&ast)?;
    Ok(ast)
}

fn calls<'a>(nodes: &'a [ScadNode], out: &mut Vec<(&'a str, Location)>) {
    for node in nodes {
        match node {
            ScadNode::Cube(_) => {}
            ScadNode::Translate { children, .. } | ScadNode::Union(children) | ScadNode::Difference(children) => {
                calls(children, out)
            }
            ScadNode::ModuleCall { name, location } => out.push((name, *location)),
        }
    }
}

pub(crate) fn validate(ast: &ScadAst) -> Result<(), ScadError> {
    let mut all = Vec::new();
    calls(&ast.statements, &mut all);
    let mut graph: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (name, body) in &ast.modules {
        let mut inner = Vec::new();
        calls(body, &mut inner);
        graph.insert(name, inner.iter().map(|(n, _)| *n).collect());
        all.extend(inner);
    }
    all.sort_by_key(|(_, at)| *at);
    if let Some((name, location)) = all.iter().find(|(n, _)| !ast.modules.contains_key(*n)) {
        return Err(ScadError::UndefinedModule {
            name: name.to_string(),
            location: *location,
        });
    }
    // Depth-first cycle detection over the call graph.
    fn visit<'a>(
        name: &'a str,
        graph: &BTreeMap<&'a str, Vec<&'a str>>,
        active: &mut BTreeSet<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<(), ScadError> {
        if done.contains(name) {
            return Ok(());
        }
        if !active.insert(name) {
            return Err(ScadError::RecursiveModule(name.to_string()));
        }
        for callee in &graph[name] {
            visit(callee, graph, active, done)?;
        }
        active.remove(name);
        done.insert(name);
        Ok(())
    }
    let (mut active, mut done) = (BTreeSet::new(), BTreeSet::new());
    for name in graph.keys() {
        visit(name, &graph, &mut active, &mut done)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn listing_d_structure() {
        let ast = parse_scad(fixtures::MODEL_D).unwrap();
        assert_eq!(ast.modules.len(), 1);
        let body = &ast.modules["L_Bracket_d"];
        assert_eq!(body.len(), 1);
        let ScadNode::Difference(parts) = &body[0] else {
            panic!("expected difference, got {:?}", body[0]);
        };
        assert_eq!(parts.len(), 3);
        assert!(matches!(&parts[0], ScadNode::Union(u) if u.len() == 2 && u.iter().all(|n| matches!(n, ScadNode::Cube(_)))));
        for cut in &parts[1..] {
            assert!(matches!(cut, ScadNode::Translate { children, .. } if matches!(children[..], [ScadNode::Cube(_)])));
        }
        assert!(matches!(&ast.statements[..], [ScadNode::ModuleCall { name, .. }] if name == "L_Bracket_d"));
    }

    #[test]
    fn all_listings_parse() {
        for (_, text) in fixtures::ALL {
            parse_scad(text).unwrap();
        }
    }

    #[test]
    fn single_cube() {
        let ast = parse_scad("cube([1,1,1]);").unwrap();
        assert_eq!(ast.statements, vec![ScadNode::Cube(Vec3::new(1.0, 1.0, 1.0))]);
    }

    #[test]
    fn decimals_and_negatives() {
        let ast = parse_scad("translate([-1.5, .25, 10.1]) cube([1, 2, 3]);").unwrap();
        assert!(matches!(&ast.statements[0], ScadNode::Translate { offset, .. } if *offset == Vec3::new(-1.5, 0.25, 10.1)));
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "sphere(5);",
            "rotate([0,0,45]) cube([1,1,1]);",
            "cylinder(h=2, r=1);",
            "x = 3;",
            "cube(5);",
            "cube([1,1,1], center=true);",
            "module m(a) { cube([1,1,1]); }",
            "cube([a,1,1]);",
            "intersection() { cube([1,1,1]); }",
            "/* block */ cube([1,1,1]);",
        ] {
            assert!(
                matches!(parse_scad(src), Err(ScadError::UnsupportedConstruct { .. })),
                "{src}: {:?}",
                parse_scad(src)
            );
        }
        match parse_scad("cube([1,1,1]);\n  sphere(5);") {
            Err(ScadError::UnsupportedConstruct { location, .. }) => {
                assert_eq!(location, Location { line: 2, column: 3 })
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undefined_and_recursive_modules() {
        assert!(matches!(
            parse_scad("foo();"),
            Err(ScadError::UndefinedModule { name, .. }) if name == "foo"
        ));
        assert!(matches!(
            parse_scad("module a() { b(); } module b() { a(); } a();"),
            Err(ScadError::RecursiveModule(_))
        ));
        // Calls before the definition are fine.
        assert!(parse_scad("m(); module m() { cube([1,1,1]); }").is_ok());
    }

    #[test]
    fn syntax_errors() {
        for src in ["cube([1,1,1])", "union() { cube([1,1,1]);", "cube([1,1]);", "translate([1,2,3])"] {
            assert!(matches!(parse_scad(src), Err(ScadError::SyntaxError { .. })), "{src}");
        }
        assert!(matches!(parse_scad("cube([0,1,1]);"), Err(ScadError::InvalidCube { .. })));
    }
}
