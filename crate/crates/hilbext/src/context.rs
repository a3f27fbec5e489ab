//! The surface-level input data: a set of object symbols, graded Ext
//! spaces between ordered pairs of them, composition structure-constant
//! tables for ordered triples, and declared identity morphisms.
//!
//! Contexts load from a JSON document and are validated eagerly: degree
//! additivity of every structure constant, identity laws wherever an
//! identity is declared, and associativity on every complete table chain.
//! Validation failures carry the offending key path.

use crate::graded::{Element, GradedError, GradedSpace};
use crate::linalg::Rat;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("ext space for ordered pair ({a}, {b}) is not declared")]
    MissingExt { a: String, b: String },
    #[error("composition table for ordered triple ({a}, {b}, {c}) is not declared")]
    MissingTable { a: String, b: String, c: String },
    #[error("no identity declared for object {object}")]
    MissingIdentity { object: String },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// Structure constants of one composition map
/// `ext(B,C) x ext(A,B) -> ext(A,C)`, keyed by (label in ext(B,C), label in
/// ext(A,B)). Missing pairs compose to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComposeTable {
    entries: BTreeMap<(String, String), Element>,
}

impl ComposeTable {
    pub fn new() -> Self {
        ComposeTable::default()
    }

    pub fn insert(&mut self, g: &str, f: &str, value: Element) {
        if value.is_zero() {
            self.entries.remove(&(g.to_string(), f.to_string()));
        } else {
            self.entries.insert((g.to_string(), f.to_string()), value);
        }
    }

    pub fn compose(&self, g: &str, f: &str) -> Element {
        self.entries
            .get(&(g.to_string(), f.to_string()))
            .cloned()
            .unwrap_or_else(Element::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(String, String), &Element)> {
        self.entries.iter()
    }
}

/// A model of the Ext algebra of a surface over declared object symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceContext {
    objects: BTreeSet<String>,
    ext: BTreeMap<(String, String), GradedSpace>,
    compose: BTreeMap<(String, String, String), ComposeTable>,
    identities: BTreeMap<String, String>,
}

impl SurfaceContext {
    pub fn new() -> Self {
        SurfaceContext::default()
    }

    pub fn add_object(&mut self, name: &str) {
        self.objects.insert(name.to_string());
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(String::as_str)
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.contains(name)
    }

    pub fn set_ext(&mut self, a: &str, b: &str, space: GradedSpace) {
        self.objects.insert(a.to_string());
        self.objects.insert(b.to_string());
        self.ext.insert((a.to_string(), b.to_string()), space);
    }

    /// The graded Ext space of an ordered pair. A declared empty space is
    /// the zero object; an undeclared pair is an error naming the pair.
    pub fn ext(&self, a: &str, b: &str) -> Result<&GradedSpace, ContextError> {
        self.ext
            .get(&(a.to_string(), b.to_string()))
            .ok_or_else(|| ContextError::MissingExt {
                a: a.to_string(),
                b: b.to_string(),
            })
    }

    pub fn ext_pairs(&self) -> impl Iterator<Item = (&(String, String), &GradedSpace)> {
        self.ext.iter()
    }

    pub fn set_table(&mut self, a: &str, b: &str, c: &str, table: ComposeTable) {
        self.compose
            .insert((a.to_string(), b.to_string(), c.to_string()), table);
    }

    pub fn table(&self, a: &str, b: &str, c: &str) -> Result<&ComposeTable, ContextError> {
        self.compose
            .get(&(a.to_string(), b.to_string(), c.to_string()))
            .ok_or_else(|| ContextError::MissingTable {
                a: a.to_string(),
                b: b.to_string(),
                c: c.to_string(),
            })
    }

    pub fn has_table(&self, a: &str, b: &str, c: &str) -> bool {
        self.compose
            .contains_key(&(a.to_string(), b.to_string(), c.to_string()))
    }

    /// Composition `g ∘ f` for `g` in ext(B,C), `f` in ext(A,B).
    pub fn compose(
        &self,
        a: &str,
        b: &str,
        c: &str,
        g: &str,
        f: &str,
    ) -> Result<Element, ContextError> {
        Ok(self.table(a, b, c)?.compose(g, f))
    }

    /// Bilinear extension of `compose` to whole elements.
    pub fn compose_elements(
        &self,
        a: &str,
        b: &str,
        c: &str,
        g: &Element,
        f: &Element,
    ) -> Result<Element, ContextError> {
        let table = self.table(a, b, c)?;
        let mut out = Element::zero();
        for (gl, gc) in g.terms() {
            for (fl, fc) in f.terms() {
                out = out.add(&table.compose(gl, fl).scaled(&(gc * fc)));
            }
        }
        Ok(out)
    }

    pub fn set_identity(&mut self, object: &str, label: &str) {
        self.identities
            .insert(object.to_string(), label.to_string());
    }

    pub fn identity(&self, object: &str) -> Result<&str, ContextError> {
        self.identities
            .get(object)
            .map(String::as_str)
            .ok_or_else(|| ContextError::MissingIdentity {
                object: object.to_string(),
            })
    }

    pub fn identities(&self) -> impl Iterator<Item = (&str, &str)> {
        self.identities
            .iter()
            .map(|(o, l)| (o.as_str(), l.as_str()))
    }

    /// Validates the whole context; errors carry the offending key path.
    pub fn validate(&self) -> Result<(), ContextError> {
        let err = |path: String, message: String| ContextError::Validation { path, message };

        for name in &self.objects {
            if name.is_empty() || name.contains(',') || name.contains('|') {
                return Err(err(
                    format!("objects[{name:?}]"),
                    "object names must be nonempty and must not contain ',' or '|'".into(),
                ));
            }
        }

        for ((a, b), space) in &self.ext {
            let path = format!("ext[{a},{b}]");
            for obj in [a, b] {
                if !self.objects.contains(obj) {
                    return Err(err(path.clone(), format!("object {obj:?} is not declared")));
                }
            }
            for (label, _) in space.basis() {
                if label.is_empty() || label.contains(',') || label.contains('|') {
                    return Err(err(
                        format!("{path}.basis[{label:?}]"),
                        "labels must be nonempty and must not contain ',' or '|'".into(),
                    ));
                }
            }
        }

        for (object, label) in &self.identities {
            let path = format!("identities[{object}]");
            let space = self
                .ext
                .get(&(object.clone(), object.clone()))
                .ok_or_else(|| {
                    err(
                        path.clone(),
                        format!("ext[{object},{object}] is not declared"),
                    )
                })?;
            let degree = space.degree_of(label).map_err(|_| {
                err(
                    path.clone(),
                    format!("label {label:?} not in ext[{object},{object}]"),
                )
            })?;
            if degree != 0 {
                return Err(err(
                    path,
                    format!("identity label {label:?} has degree {degree}, expected 0"),
                ));
            }
        }

        for ((a, b, c), table) in &self.compose {
            let path = format!("compose[{a},{b},{c}]");
            let src = self
                .ext
                .get(&(a.clone(), b.clone()))
                .ok_or_else(|| err(path.clone(), format!("ext[{a},{b}] is not declared")))?;
            let mid = self
                .ext
                .get(&(b.clone(), c.clone()))
                .ok_or_else(|| err(path.clone(), format!("ext[{b},{c}] is not declared")))?;
            let dst = self
                .ext
                .get(&(a.clone(), c.clone()))
                .ok_or_else(|| err(path.clone(), format!("ext[{a},{c}] is not declared")))?;
            for ((g, f), value) in table.entries() {
                let entry_path = format!("{path}[g={g},f={f}]");
                let dg = mid.degree_of(g).map_err(|_| {
                    err(
                        entry_path.clone(),
                        format!("label {g:?} not in ext[{b},{c}]"),
                    )
                })?;
                let df = src.degree_of(f).map_err(|_| {
                    err(
                        entry_path.clone(),
                        format!("label {f:?} not in ext[{a},{b}]"),
                    )
                })?;
                for (label, _) in value.terms() {
                    let dr = dst.degree_of(label).map_err(|_| {
                        err(
                            entry_path.clone(),
                            format!("result label {label:?} not in ext[{a},{c}]"),
                        )
                    })?;
                    if dr != dg + df {
                        return Err(err(
                            entry_path,
                            format!(
                                "degree violation: deg({g})={dg}, deg({f})={df}, \
                                 result {label} has degree {dr}"
                            ),
                        ));
                    }
                }
            }
        }

        // identity laws wherever both the identity and the relevant table exist
        for (object, label) in &self.identities {
            for (a, b, c) in self.compose.keys() {
                if b == object && c == object {
                    let src = self
                        .ext
                        .get(&(a.clone(), b.clone()))
                        .expect("checked above");
                    for (f, _) in src.basis() {
                        let lhs = self.compose(a, b, c, label, f)?;
                        if lhs != Element::single(f, crate::linalg::rati(1)) {
                            return Err(err(
                                format!("compose[{a},{b},{c}]"),
                                format!("identity law fails: {label} ∘ {f} != {f}"),
                            ));
                        }
                    }
                }
                if a == object && b == object {
                    let mid = self
                        .ext
                        .get(&(b.clone(), c.clone()))
                        .expect("checked above");
                    for (g, _) in mid.basis() {
                        let rhs = self.compose(a, b, c, g, label)?;
                        if rhs != Element::single(g, crate::linalg::rati(1)) {
                            return Err(err(
                                format!("compose[{a},{b},{c}]"),
                                format!("identity law fails: {g} ∘ {label} != {g}"),
                            ));
                        }
                    }
                }
            }
        }

        // associativity on complete chains
        let triples: Vec<(String, String, String)> = self.compose.keys().cloned().collect();
        for (a, b, c) in &triples {
            for (b2, c2, d) in &triples {
                if b2 != b || c2 != c {
                    continue;
                }
                if !self.has_table(a, c, d) || !self.has_table(a, b, d) {
                    continue;
                }
                let sab = self.ext.get(&(a.clone(), b.clone())).expect("validated");
                let sbc = self.ext.get(&(b.clone(), c.clone())).expect("validated");
                let scd = self.ext.get(&(c.clone(), d.clone())).expect("validated");
                for (f, _) in sab.basis() {
                    for (g, _) in sbc.basis() {
                        for (h, _) in scd.basis() {
                            let gf = self.compose(a, b, c, g, f)?;
                            let left = self.compose_elements(
                                a,
                                c,
                                d,
                                &Element::single(h, crate::linalg::rati(1)),
                                &gf,
                            )?;
                            let hg = self.compose(b, c, d, h, g)?;
                            let right = self.compose_elements(
                                a,
                                b,
                                d,
                                &hg,
                                &Element::single(f, crate::linalg::rati(1)),
                            )?;
                            if left != right {
                                return Err(err(
                                    format!("compose[{a},{b},{c}]→[{a},{c},{d}]"),
                                    format!("associativity fails on (h={h}, g={g}, f={f})"),
                                ));
                            }
                        }
                    }
                }
            }
        }

        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, ContextError> {
        let raw: RawContext = serde_json::from_str(text).map_err(|e| ContextError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let ctx = raw.into_context()?;
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ContextError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ContextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawContext::from_context(self)).expect("serializable")
    }
}

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rat(text: &str) -> Option<Rat> {
    match text.split_once('/') {
        Some((num, den)) => {
            let n = BigInt::from_str(num.trim()).ok()?;
            let d = BigInt::from_str(den.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => Some(Rat::from_integer(BigInt::from_str(text.trim()).ok()?)),
    }
}

/// Renders an exact rational as "p" or "p/q".
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawContext {
    objects: Vec<String>,
    ext: BTreeMap<String, Vec<RawBasisVector>>,
    #[serde(default)]
    compose: BTreeMap<String, Vec<RawConstant>>,
    #[serde(default)]
    identities: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBasisVector {
    label: String,
    degree: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawConstant {
    g: String,
    f: String,
    result: Vec<RawTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTerm {
    label: String,
    coeff: String,
}

impl RawContext {
    fn into_context(self) -> Result<SurfaceContext, ContextError> {
        let mut ctx = SurfaceContext::new();
        for o in &self.objects {
            ctx.add_object(o);
        }
        for (key, basis) in &self.ext {
            let (a, b) = split_pair(key).ok_or_else(|| ContextError::Validation {
                path: format!("ext[{key}]"),
                message: "key must be \"A,B\"".into(),
            })?;
            let space =
                GradedSpace::new(basis.iter().map(|v| (v.label.clone(), v.degree)).collect())
                    .map_err(|e| ContextError::Validation {
                        path: format!("ext[{key}]"),
                        message: e.to_string(),
                    })?;
            ctx.set_ext(&a, &b, space);
        }
        // keep only the declared object list; validate() reports strays
        ctx.objects = self.objects.iter().cloned().collect();
        for (key, constants) in &self.compose {
            let (a, b, c) = split_triple(key).ok_or_else(|| ContextError::Validation {
                path: format!("compose[{key}]"),
                message: "key must be \"A,B,C\"".into(),
            })?;
            let mut table = ComposeTable::new();
            for (i, raw) in constants.iter().enumerate() {
                let mut elem = Element::zero();
                for term in &raw.result {
                    let coeff = parse_rat(&term.coeff).ok_or_else(|| ContextError::Validation {
                        path: format!("compose[{key}][{i}]"),
                        message: format!("bad rational {:?}", term.coeff),
                    })?;
                    elem.add_term(&term.label, coeff);
                }
                table.insert(&raw.g, &raw.f, elem);
            }
            ctx.set_table(&a, &b, &c, table);
        }
        for (object, label) in &self.identities {
            ctx.set_identity(object, label);
        }
        Ok(ctx)
    }

    fn from_context(ctx: &SurfaceContext) -> RawContext {
        RawContext {
            objects: ctx.objects.iter().cloned().collect(),
            ext: ctx
                .ext
                .iter()
                .map(|((a, b), space)| {
                    (
                        format!("{a},{b}"),
                        space
                            .basis()
                            .iter()
                            .map(|(label, degree)| RawBasisVector {
                                label: label.clone(),
                                degree: *degree,
                            })
                            .collect(),
                    )
                })
                .collect(),
            compose: ctx
                .compose
                .iter()
                .map(|((a, b, c), table)| {
                    (
                        format!("{a},{b},{c}"),
                        table
                            .entries()
                            .map(|((g, f), value)| RawConstant {
                                g: g.clone(),
                                f: f.clone(),
                                result: value
                                    .terms()
                                    .map(|(label, coeff)| RawTerm {
                                        label: label.to_string(),
                                        coeff: format_rat(coeff),
                                    })
                                    .collect(),
                            })
                            .collect(),
                    )
                })
                .collect(),
            identities: ctx.identities.clone(),
        }
    }
}

fn split_pair(key: &str) -> Option<(String, String)> {
    let mut parts = key.split(',');
    let a = parts.next()?.trim().to_string();
    let b = parts.next()?.trim().to_string();
    if parts.next().is_some() || a.is_empty() || b.is_empty() {
        return None;
    }
    Some((a, b))
}

fn split_triple(key: &str) -> Option<(String, String, String)> {
    let mut parts = key.split(',');
    let a = parts.next()?.trim().to_string();
    let b = parts.next()?.trim().to_string();
    let c = parts.next()?.trim().to_string();
    if parts.next().is_some() || a.is_empty() || b.is_empty() || c.is_empty() {
        return None;
    }
    Some((a, b, c))
}

impl fmt::Display for SurfaceContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "objects: {}",
            self.objects.iter().cloned().collect::<Vec<_>>().join(", ")
        )?;
        for ((a, b), space) in &self.ext {
            writeln!(f, "ext({a}, {b}): {}", space.poincare())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rati};

    fn trivial_context() -> SurfaceContext {
        // every needed ext space one-dimensional in degree zero
        let mut ctx = SurfaceContext::new();
        for (a, b) in [("E", "F"), ("E", "M"), ("L", "F"), ("L", "M")] {
            let space = GradedSpace::new(vec![(format!("{a}{b}"), 0)]).unwrap();
            ctx.set_ext(a, b, space);
        }
        ctx
    }

    #[test]
    fn trivial_context_validates_and_roundtrips() {
        let ctx = trivial_context();
        ctx.validate().unwrap();
        let json = ctx.to_json_string();
        let back = SurfaceContext::from_json_str(&json).unwrap();
        assert_eq!(ctx, back);
        assert_eq!(back.to_json_string(), json);
    }

    #[test]
    fn missing_pair_is_named() {
        let ctx = trivial_context();
        match ctx.ext("F", "E") {
            Err(ContextError::MissingExt { a, b }) => {
                assert_eq!((a.as_str(), b.as_str()), ("F", "E"));
            }
            other => panic!("expected MissingExt, got {other:?}"),
        }
    }

    #[test]
    fn degree_violation_names_the_triple() {
        let mut ctx = SurfaceContext::new();
        ctx.set_ext("A", "B", GradedSpace::new(vec![("f".into(), 1)]).unwrap());
        ctx.set_ext("B", "C", GradedSpace::new(vec![("g".into(), 1)]).unwrap());
        ctx.set_ext("A", "C", GradedSpace::new(vec![("h".into(), 1)]).unwrap());
        let mut table = ComposeTable::new();
        table.insert("g", "f", Element::single("h", rati(1))); // deg 1 != 1+1
        ctx.set_table("A", "B", "C", table);
        let err = ctx.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("compose[A,B,C]"), "{msg}");
        assert!(msg.contains("degree violation"), "{msg}");
    }

    #[test]
    fn identity_law_is_checked() {
        let mut ctx = SurfaceContext::new();
        ctx.set_ext("A", "B", GradedSpace::new(vec![("f".into(), 0)]).unwrap());
        ctx.set_ext("B", "B", GradedSpace::new(vec![("one".into(), 0)]).unwrap());
        ctx.set_identity("B", "one");
        let mut table = ComposeTable::new();
        table.insert("one", "f", Element::single("f", rat(1, 2))); // wrong scale
        ctx.set_table("A", "B", "B", table);
        let err = ctx.validate().unwrap_err();
        assert!(err.to_string().contains("identity law"), "{err}");
    }

    #[test]
    fn associative_exterior_table_validates() {
        // one object, one odd generator x with x∘x = 0
        let mut ctx = SurfaceContext::new();
        let space = GradedSpace::new(vec![("one".into(), 0), ("x".into(), 1)]).unwrap();
        ctx.set_ext("A", "A", space);
        ctx.set_identity("A", "one");
        let mut table = ComposeTable::new();
        for (g, f, result) in [
            ("one", "one", Element::single("one", rati(1))),
            ("one", "x", Element::single("x", rati(1))),
            ("x", "one", Element::single("x", rati(1))),
            ("x", "x", Element::zero()),
        ] {
            table.insert(g, f, result);
        }
        ctx.set_table("A", "A", "A", table);
        ctx.validate().unwrap();
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = SurfaceContext::from_json_str("{ not json").unwrap_err();
        match err {
            ContextError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rat("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("-5").unwrap(), rati(-5));
        assert_eq!(parse_rat(" 7 / 4 ").unwrap(), rat(7, 4));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("abc").is_none());
        assert_eq!(format_rat(&rat(-3, 6)), "-1/2");
        assert_eq!(format_rat(&rati(4)), "4");
    }
}
