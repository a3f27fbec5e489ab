//! The Yoneda product of extension classes on the Hilbert scheme, in two
//! independent implementations that are held equal by the test suite:
//!
//! * a closed five-sum engine operating directly on the two-summand class
//!   representation, with all signs read off the written letter layout of
//!   each summand, and
//! * a brute-force engine that lifts classes to the equivariant component
//!   model, composes componentwise with Künneth signs, and projects back.
//!
//! Classes between determinant line bundles and the mixed pairings are
//! served by the component-model route only.

use crate::context::{format_rat, parse_rat, ContextError, SurfaceContext};
use crate::equivariant::{compose as eq_compose, EqClass, EqModel, EquivariantError, Side};
use crate::graded::{sort_with_sign, GradedError, GradedSpace};
use crate::linalg::{rat, rati, Rat};
use crate::signs::Permutation;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest n for which the component-model engine will build its n!-term
/// lifts by default. Override with the `_with_cap` variants; cost grows
/// factorially.
pub const DEFAULT_ORACLE_CAP: usize = 6;

#[derive(Debug, Error)]
pub enum YonedaError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Equivariant(#[from] EquivariantError),
    #[error("degree sequences have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("bad letter layout: {0}")]
    BadLayout(String),
    #[error("classes are not composable: {0}")]
    NotComposable(String),
    #[error("n must be at least {min}, got {n}")]
    NTooSmall { n: usize, min: usize },
    #[error("component-model engine capped at n = {cap}, got {n} (n! lifts)")]
    OracleCapExceeded { n: usize, cap: usize },
    #[error("malformed class: {0}")]
    Malformed(String),
    #[error("json parse error: {0}")]
    Parse(String),
}

/// Composition sign of decomposable tensors under the Künneth
/// identification: `(-1)^{Σ_{k<l} deg inner_k · deg outer_l}` for the
/// inner (applied first) and outer degree tuples.
pub fn kunneth_compose_sign(inner: &[i64], outer: &[i64]) -> Result<i64, YonedaError> {
    if inner.len() != outer.len() {
        return Err(YonedaError::LengthMismatch {
            a: inner.len(),
            b: outer.len(),
        });
    }
    let mut exp = 0usize;
    for (k, inner_deg) in inner.iter().enumerate() {
        if inner_deg % 2 == 0 {
            continue;
        }
        exp += outer[k + 1..].iter().filter(|d| *d % 2 != 0).count();
    }
    Ok(if exp.is_multiple_of(2) { 1 } else { -1 })
}

/// A letter of a two-class product term: position within the outer or the
/// inner class, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    Outer(usize),
    Inner(usize),
}

/// Sign convention for written sums: the sign of the permutation that the
/// left-to-right letter layout induces on the canonical order
/// (outer letters first, then inner letters), as a Koszul sign over the
/// letter degrees.
pub fn sum_bullet_sign(
    layout: &[Letter],
    outer_degrees: &[i64],
    inner_degrees: &[i64],
) -> Result<i64, YonedaError> {
    let n_out = outer_degrees.len();
    let n_in = inner_degrees.len();
    if layout.len() != n_out + n_in {
        return Err(YonedaError::BadLayout(format!(
            "layout has {} letters, expected {}",
            layout.len(),
            n_out + n_in
        )));
    }
    let mut seen = vec![false; n_out + n_in];
    let mut ids = Vec::with_capacity(layout.len());
    let mut degs = Vec::with_capacity(layout.len());
    for letter in layout {
        let (id, d) = match *letter {
            Letter::Outer(i) => {
                if i == 0 || i > n_out {
                    return Err(YonedaError::BadLayout(format!(
                        "outer letter {i} out of range"
                    )));
                }
                (i - 1, outer_degrees[i - 1])
            }
            Letter::Inner(i) => {
                if i == 0 || i > n_in {
                    return Err(YonedaError::BadLayout(format!(
                        "inner letter {i} out of range"
                    )));
                }
                (n_out + i - 1, inner_degrees[i - 1])
            }
        };
        if seen[id] {
            return Err(YonedaError::BadLayout("letter repeated in layout".into()));
        }
        seen[id] = true;
        ids.push(id);
        degs.push(d);
    }
    let mut exp = 0usize;
    for p in 0..ids.len() {
        if degs[p] % 2 == 0 {
            continue;
        }
        for q in p + 1..ids.len() {
            if degs[q] % 2 != 0 && ids[p] > ids[q] {
                exp += 1;
            }
        }
    }
    Ok(if exp.is_multiple_of(2) { 1 } else { -1 })
}

/// Basis-decomposable summand of a two-summand class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PKey {
    T1 {
        phi: String,
        s: Vec<String>,
    },
    T2 {
        eta: String,
        x: String,
        t: Vec<String>,
    },
}

/// A class in `P(E,L,F,M)`: a combination of decomposable type-1 terms
/// `(φ; s_2..s_n)` and type-2 terms `(η; x; t_3..t_n)`. Multisets are
/// stored sorted by basis position in `ext(L,M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PClass {
    pub el: String,
    pub l: String,
    pub fm: String,
    pub m: String,
    pub n: usize,
    pub terms: BTreeMap<PKey, Rat>,
}

impl PClass {
    pub fn zero(el: &str, l: &str, fm: &str, m: &str, n: usize) -> Self {
        PClass {
            el: el.to_string(),
            l: l.to_string(),
            fm: fm.to_string(),
            m: m.to_string(),
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_typing(&self, other: &PClass) -> bool {
        self.el == other.el
            && self.l == other.l
            && self.fm == other.fm
            && self.m == other.m
            && self.n == other.n
    }

    pub fn add(&self, other: &PClass) -> PClass {
        assert!(self.same_typing(other), "class typings differ");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push_raw(k.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Rat) -> PClass {
        let mut out = PClass::zero(&self.el, &self.l, &self.fm, &self.m, self.n);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.push_raw(k.clone(), v * c);
        }
        out
    }

    fn push_raw(&mut self, key: PKey, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Adds `coeff · (φ; s_2..s_n)`, sorting the multiset with the Koszul
    /// sign; vanishes when an odd label repeats.
    pub fn add_type1(
        &mut self,
        ctx: &SurfaceContext,
        phi: &str,
        s: &[&str],
        coeff: Rat,
    ) -> Result<(), YonedaError> {
        if s.len() + 1 != self.n {
            return Err(YonedaError::Malformed(format!(
                "type-1 term needs {} free labels, got {}",
                self.n - 1,
                s.len()
            )));
        }
        ctx.ext(&self.el, &self.fm)?.index_of(phi)?;
        let s_space = ctx.ext(&self.l, &self.m)?;
        if let Some((sorted, sign)) = canonical_multiset(s_space, s)? {
            self.push_raw(
                PKey::T1 {
                    phi: phi.to_string(),
                    s: sorted,
                },
                rati(sign) * coeff,
            );
        }
        Ok(())
    }

    /// Adds `coeff · (η; x; t_3..t_n)` with the same conventions.
    pub fn add_type2(
        &mut self,
        ctx: &SurfaceContext,
        eta: &str,
        x: &str,
        t: &[&str],
        coeff: Rat,
    ) -> Result<(), YonedaError> {
        if t.len() + 2 != self.n {
            return Err(YonedaError::Malformed(format!(
                "type-2 term needs {} free labels, got {}",
                self.n - 2,
                t.len()
            )));
        }
        ctx.ext(&self.el, &self.m)?.index_of(eta)?;
        ctx.ext(&self.l, &self.fm)?.index_of(x)?;
        let s_space = ctx.ext(&self.l, &self.m)?;
        if let Some((sorted, sign)) = canonical_multiset(s_space, t)? {
            self.push_raw(
                PKey::T2 {
                    eta: eta.to_string(),
                    x: x.to_string(),
                    t: sorted,
                },
                rati(sign) * coeff,
            );
        }
        Ok(())
    }

    /// Degree of one decomposable term.
    pub fn term_degree(&self, ctx: &SurfaceContext, key: &PKey) -> Result<i64, YonedaError> {
        let s_space = ctx.ext(&self.l, &self.m)?;
        Ok(match key {
            PKey::T1 { phi, s } => {
                let mut d = ctx.ext(&self.el, &self.fm)?.degree_of(phi)?;
                for label in s {
                    d += s_space.degree_of(label)?;
                }
                d
            }
            PKey::T2 { eta, x, t } => {
                let mut d = ctx.ext(&self.el, &self.m)?.degree_of(eta)?
                    + ctx.ext(&self.l, &self.fm)?.degree_of(x)?;
                for label in t {
                    d += s_space.degree_of(label)?;
                }
                d
            }
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawPClass::from_class(self)).expect("serializable")
    }

    pub fn from_json_str(ctx: &SurfaceContext, text: &str) -> Result<Self, YonedaError> {
        let raw: RawPClass =
            serde_json::from_str(text).map_err(|e| YonedaError::Parse(e.to_string()))?;
        raw.into_class(ctx)
    }
}

fn canonical_multiset(
    space: &GradedSpace,
    labels: &[&str],
) -> Result<Option<(Vec<String>, i64)>, YonedaError> {
    let entries: Vec<(usize, i64)> = labels
        .iter()
        .map(|l| {
            let idx = space.index_of(l)?;
            Ok((idx, space.degree(idx)))
        })
        .collect::<Result<_, GradedError>>()?;
    Ok(sort_with_sign(&entries).map(|(idxs, sign)| {
        (
            idxs.into_iter()
                .map(|i| space.label(i).to_string())
                .collect(),
            sign,
        )
    }))
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product::<i64>().max(1)
}

/// All orderings of `values`; ordering `ord` pairs position `i` (in the
/// order of `positions`) with `ord[i]`.
fn assignments(values: &[usize]) -> Vec<Vec<usize>> {
    if values.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let mut rest = values.to_vec();
        rest.remove(i);
        for mut tail in assignments(&rest) {
            tail.insert(0, v);
            out.push(tail);
        }
    }
    out
}

/// Letters of one decomposable term in canonical positions 1..=n:
/// type 1 puts the head first and the free labels after it, type 2 puts
/// the two heads first.
struct TermLetters {
    labels: Vec<String>,
    degrees: Vec<i64>,
}

fn letters_of(
    ctx: &SurfaceContext,
    class: &PClass,
    key: &PKey,
) -> Result<TermLetters, YonedaError> {
    let s_space = ctx.ext(&class.l, &class.m)?;
    match key {
        PKey::T1 { phi, s } => {
            let mut labels = vec![phi.clone()];
            let mut degrees = vec![ctx.ext(&class.el, &class.fm)?.degree_of(phi)?];
            for label in s {
                labels.push(label.clone());
                degrees.push(s_space.degree_of(label)?);
            }
            Ok(TermLetters { labels, degrees })
        }
        PKey::T2 { eta, x, t } => {
            let mut labels = vec![eta.clone(), x.clone()];
            let mut degrees = vec![
                ctx.ext(&class.el, &class.m)?.degree_of(eta)?,
                ctx.ext(&class.l, &class.fm)?.degree_of(x)?,
            ];
            for label in t {
                labels.push(label.clone());
                degrees.push(s_space.degree_of(label)?);
            }
            Ok(TermLetters { labels, degrees })
        }
    }
}

/// Expands a list of slot compositions (each a linear combination) into
/// decomposable combinations.
fn expand_slots(slots: &[crate::graded::Element]) -> Vec<(Vec<String>, Rat)> {
    let mut out: Vec<(Vec<String>, Rat)> = vec![(Vec::new(), rati(1))];
    for slot in slots {
        let mut next = Vec::new();
        for (labels, coeff) in &out {
            for (label, c) in slot.terms() {
                let mut l2 = labels.clone();
                l2.push(label.to_string());
                next.push((l2, coeff * c));
            }
        }
        out = next;
        if out.is_empty() {
            break;
        }
    }
    out
}

/// The closed five-sum engine for the product of two classes between
/// twisted tautological objects: `a ∘ b` for `a` in `P(F,M,G,N)` and `b`
/// in `P(E,L,F,M)`, landing in `P(E,L,G,N)`.
pub fn yoneda_closed(ctx: &SurfaceContext, a: &PClass, b: &PClass) -> Result<PClass, YonedaError> {
    if b.fm != a.el || b.m != a.l || a.n != b.n {
        return Err(YonedaError::NotComposable(format!(
            "inner lands in ({}, {}) n={}, outer starts at ({}, {}) n={}",
            b.fm, b.m, b.n, a.el, a.l, a.n
        )));
    }
    let n = a.n;
    if n < 2 {
        return Err(YonedaError::NTooSmall { n, min: 2 });
    }
    let mut out = PClass::zero(&b.el, &b.l, &a.fm, &a.m, n);
    let out_s_space = ctx.ext(&b.l, &a.m)?.clone();
    let inv1 = rat(1, factorial(n - 1));
    let inv2 = rat(1, factorial(n - 2));

    // slot index lists
    let free1: Vec<usize> = (2..=n).collect(); // type-1 free letters
    let free2: Vec<usize> = (3..=n).collect(); // type-2 free letters

    for (a_key, a_coeff) in &a.terms {
        let a_letters = letters_of(ctx, a, a_key)?;
        for (b_key, b_coeff) in &b.terms {
            let b_letters = letters_of(ctx, b, b_key)?;
            let base = a_coeff * b_coeff;
            match (a_key, b_key) {
                // first sum: heads compose, free letters pair under σ
                (PKey::T1 { .. }, PKey::T1 { .. }) => {
                    for ord in assignments(&free1) {
                        let mut layout = vec![Letter::Outer(1), Letter::Inner(1)];
                        for (idx, &inner_pos) in ord.iter().enumerate() {
                            layout.push(Letter::Outer(free1[idx]));
                            layout.push(Letter::Inner(inner_pos));
                        }
                        let sign =
                            sum_bullet_sign(&layout, &a_letters.degrees, &b_letters.degrees)?;
                        let head = ctx.compose(
                            &b.el,
                            &a.el,
                            &a.fm,
                            &a_letters.labels[0],
                            &b_letters.labels[0],
                        )?;
                        let mut slots = vec![head];
                        for (idx, &inner_pos) in ord.iter().enumerate() {
                            slots.push(ctx.compose(
                                &b.l,
                                &a.l,
                                &a.m,
                                &a_letters.labels[free1[idx] - 1],
                                &b_letters.labels[inner_pos - 1],
                            )?);
                        }
                        for (labels, coeff) in expand_slots(&slots) {
                            emit_t1(
                                ctx,
                                &mut out,
                                &out_s_space,
                                &labels[0],
                                &labels[1..],
                                &base * rati(sign) * &inv1 * coeff,
                            )?;
                        }
                    }
                }
                // second sum: both heads cross; the product of the crossed
                // pair joins the free multiset. The crossed pair may sit in
                // any of the n-1 free positions of the target monomial, so
                // the coefficient is (n-1)/(n-2)! rather than 1/(n-2)!; the
                // component model forces this factor (see the engine
                // equality tests).
                (PKey::T2 { .. }, PKey::T2 { .. }) => {
                    let coeff2 = rati(n as i64 - 1) * &inv2;
                    for ord in assignments(&free2) {
                        let mut layout = vec![
                            Letter::Outer(2),
                            Letter::Inner(1),
                            Letter::Outer(1),
                            Letter::Inner(2),
                        ];
                        for (idx, &inner_pos) in ord.iter().enumerate() {
                            layout.push(Letter::Outer(free2[idx]));
                            layout.push(Letter::Inner(inner_pos));
                        }
                        let sign =
                            sum_bullet_sign(&layout, &a_letters.degrees, &b_letters.degrees)?;
                        // x ∘ η' lands in the head slot
                        let head = ctx.compose(
                            &b.el,
                            &a.l,
                            &a.fm,
                            &a_letters.labels[1],
                            &b_letters.labels[0],
                        )?;
                        // η ∘ x' joins the free multiset
                        let mut slots = vec![
                            head,
                            ctx.compose(
                                &b.l,
                                &a.el,
                                &a.m,
                                &a_letters.labels[0],
                                &b_letters.labels[1],
                            )?,
                        ];
                        for (idx, &inner_pos) in ord.iter().enumerate() {
                            slots.push(ctx.compose(
                                &b.l,
                                &a.l,
                                &a.m,
                                &a_letters.labels[free2[idx] - 1],
                                &b_letters.labels[inner_pos - 1],
                            )?);
                        }
                        for (labels, coeff) in expand_slots(&slots) {
                            emit_t1(
                                ctx,
                                &mut out,
                                &out_s_space,
                                &labels[0],
                                &labels[1..],
                                &base * rati(sign) * &coeff2 * coeff,
                            )?;
                        }
                    }
                }
                // third sum: outer type 2 against inner type 1
                (PKey::T2 { .. }, PKey::T1 { .. }) => {
                    for ord in assignments(&free1) {
                        let mut layout = vec![Letter::Outer(1), Letter::Inner(1)];
                        for (idx, &inner_pos) in ord.iter().enumerate() {
                            layout.push(Letter::Outer(free1[idx]));
                            layout.push(Letter::Inner(inner_pos));
                        }
                        let sign =
                            sum_bullet_sign(&layout, &a_letters.degrees, &b_letters.degrees)?;
                        // η ∘ φ'
                        let eta = ctx.compose(
                            &b.el,
                            &a.el,
                            &a.m,
                            &a_letters.labels[0],
                            &b_letters.labels[0],
                        )?;
                        // x ∘ s'_{β^{-1}(2)}
                        let x = ctx.compose(
                            &b.l,
                            &a.l,
                            &a.fm,
                            &a_letters.labels[1],
                            &b_letters.labels[ord[0] - 1],
                        )?;
                        let mut slots = vec![eta, x];
                        for (idx, &inner_pos) in ord.iter().enumerate().skip(1) {
                            slots.push(ctx.compose(
                                &b.l,
                                &a.l,
                                &a.m,
                                &a_letters.labels[free1[idx] - 1],
                                &b_letters.labels[inner_pos - 1],
                            )?);
                        }
                        for (labels, coeff) in expand_slots(&slots) {
                            emit_t2(
                                ctx,
                                &mut out,
                                &out_s_space,
                                &labels[0],
                                &labels[1],
                                &labels[2..],
                                &base * rati(sign) * &inv1 * coeff,
                            )?;
                        }
                    }
                }
                // fourth sum: outer type 1 against inner type 2; here the
                // outer free letters are distributed by γ
                (PKey::T1 { .. }, PKey::T2 { .. }) => {
                    for ord in assignments(&free1) {
                        // ord[idx] = γ^{-1}(idx + 2)
                        let mut layout = vec![
                            Letter::Outer(ord[0]),
                            Letter::Inner(1),
                            Letter::Outer(1),
                            Letter::Inner(2),
                        ];
                        for (idx, &outer_pos) in ord.iter().enumerate().skip(1) {
                            layout.push(Letter::Outer(outer_pos));
                            layout.push(Letter::Inner(free1[idx]));
                        }
                        let sign =
                            sum_bullet_sign(&layout, &a_letters.degrees, &b_letters.degrees)?;
                        // s_{γ^{-1}(2)} ∘ η'
                        let eta = ctx.compose(
                            &b.el,
                            &a.l,
                            &a.m,
                            &a_letters.labels[ord[0] - 1],
                            &b_letters.labels[0],
                        )?;
                        // φ ∘ x'
                        let x = ctx.compose(
                            &b.l,
                            &a.el,
                            &a.fm,
                            &a_letters.labels[0],
                            &b_letters.labels[1],
                        )?;
                        let mut slots = vec![eta, x];
                        for (idx, &outer_pos) in ord.iter().enumerate().skip(1) {
                            slots.push(ctx.compose(
                                &b.l,
                                &a.l,
                                &a.m,
                                &a_letters.labels[outer_pos - 1],
                                &b_letters.labels[free1[idx] - 1],
                            )?);
                        }
                        for (labels, coeff) in expand_slots(&slots) {
                            emit_t2(
                                ctx,
                                &mut out,
                                &out_s_space,
                                &labels[0],
                                &labels[1],
                                &labels[2..],
                                &base * rati(sign) * &inv1 * coeff,
                            )?;
                        }
                    }
                }
            }
            // fifth sum: both type 2, the remaining composable pattern.
            // The omitted pair contributes its two letters through the two
            // head factors, so the layout still contains every letter once.
            if let (PKey::T2 { .. }, PKey::T2 { .. }) = (a_key, b_key) {
                for &i in &free2 {
                    for ord in assignments(&free2) {
                        // ord[idx] = α^{-1}(free2[idx])
                        let pos_of = |j: usize| free2.iter().position(|&v| v == j).unwrap();
                        let mut layout = vec![
                            Letter::Outer(i),
                            Letter::Inner(1),
                            Letter::Outer(2),
                            Letter::Inner(ord[pos_of(i)]),
                            Letter::Outer(1),
                            Letter::Inner(2),
                        ];
                        for &j in &free2 {
                            if j == i {
                                continue;
                            }
                            layout.push(Letter::Outer(j));
                            layout.push(Letter::Inner(ord[pos_of(j)]));
                        }
                        let sign =
                            sum_bullet_sign(&layout, &a_letters.degrees, &b_letters.degrees)?;
                        // t_i ∘ η'
                        let eta = ctx.compose(
                            &b.el,
                            &a.l,
                            &a.m,
                            &a_letters.labels[i - 1],
                            &b_letters.labels[0],
                        )?;
                        // x ∘ t'_{α^{-1}(i)}
                        let x = ctx.compose(
                            &b.l,
                            &a.l,
                            &a.fm,
                            &a_letters.labels[1],
                            &b_letters.labels[ord[pos_of(i)] - 1],
                        )?;
                        // η ∘ x' joins the free multiset
                        let mut slots = vec![
                            eta,
                            x,
                            ctx.compose(
                                &b.l,
                                &a.el,
                                &a.m,
                                &a_letters.labels[0],
                                &b_letters.labels[1],
                            )?,
                        ];
                        for &j in &free2 {
                            if j == i {
                                continue;
                            }
                            slots.push(ctx.compose(
                                &b.l,
                                &a.l,
                                &a.m,
                                &a_letters.labels[j - 1],
                                &b_letters.labels[ord[pos_of(j)] - 1],
                            )?);
                        }
                        for (labels, coeff) in expand_slots(&slots) {
                            emit_t2(
                                ctx,
                                &mut out,
                                &out_s_space,
                                &labels[0],
                                &labels[1],
                                &labels[2..],
                                &base * rati(sign) * &inv2 * coeff,
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn emit_t1(
    _ctx: &SurfaceContext,
    out: &mut PClass,
    s_space: &GradedSpace,
    phi: &str,
    free: &[String],
    coeff: Rat,
) -> Result<(), YonedaError> {
    if coeff.is_zero() {
        return Ok(());
    }
    let refs: Vec<&str> = free.iter().map(String::as_str).collect();
    if let Some((sorted, sign)) = canonical_multiset(s_space, &refs)? {
        out.push_raw(
            PKey::T1 {
                phi: phi.to_string(),
                s: sorted,
            },
            coeff * rati(sign),
        );
    }
    Ok(())
}

fn emit_t2(
    _ctx: &SurfaceContext,
    out: &mut PClass,
    s_space: &GradedSpace,
    eta: &str,
    x: &str,
    free: &[String],
    coeff: Rat,
) -> Result<(), YonedaError> {
    if coeff.is_zero() {
        return Ok(());
    }
    let refs: Vec<&str> = free.iter().map(String::as_str).collect();
    if let Some((sorted, sign)) = canonical_multiset(s_space, &refs)? {
        out.push_raw(
            PKey::T2 {
                eta: eta.to_string(),
                x: x.to_string(),
                t: sorted,
            },
            coeff * rati(sign),
        );
    }
    Ok(())
}

/// Lift of a class to the equivariant component model: type-1 terms spread
/// over the diagonal components, type-2 terms over the off-diagonal ones,
/// with the written-sum signs and the symmetrization coefficients
/// `1/(n-1)!` and `1/(n-2)!`.
pub fn lift_pclass(ctx: &SurfaceContext, c: &PClass) -> Result<EqClass, YonedaError> {
    let n = c.n;
    let model = EqModel::new(
        n,
        Side::Taut {
            obj: c.el.clone(),
            line: c.l.clone(),
        },
        Side::Taut {
            obj: c.fm.clone(),
            line: c.m.clone(),
        },
    );
    let mut out = EqClass::zero(model);
    let inv1 = rat(1, factorial(n - 1));
    let inv2 = rat(1, factorial(n - 2));
    for (key, coeff) in &c.terms {
        let letters = letters_of(ctx, c, key)?;
        match key {
            PKey::T1 { .. } => {
                for sigma in Permutation::all(n) {
                    let sign = crate::graded::koszul_sign(&sigma, &letters.degrees)?;
                    let inv = sigma.inverse();
                    let labels: Vec<String> = (1..=n)
                        .map(|slot| letters.labels[inv.apply(slot) - 1].clone())
                        .collect();
                    let active = sigma.apply(1);
                    out.add_term(
                        (Some(active), Some(active)),
                        labels,
                        rati(sign) * coeff * &inv1,
                    );
                }
            }
            PKey::T2 { .. } => {
                for tau in Permutation::all(n) {
                    let sign = crate::graded::koszul_sign(&tau, &letters.degrees)?;
                    let inv = tau.inverse();
                    let labels: Vec<String> = (1..=n)
                        .map(|slot| letters.labels[inv.apply(slot) - 1].clone())
                        .collect();
                    out.add_term(
                        (Some(tau.apply(1)), Some(tau.apply(2))),
                        labels,
                        rati(sign) * coeff * &inv2,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Projection back: read the diagonal component at (1,1) and the
/// off-diagonal component at (1,2), symmetrizing the free slots.
pub fn project_pclass(ctx: &SurfaceContext, eq: &EqClass) -> Result<PClass, YonedaError> {
    let (el, l) = match &eq.model.src {
        Side::Taut { obj, line } => (obj.clone(), line.clone()),
        Side::Det { .. } => {
            return Err(YonedaError::NotComposable(
                "source side is not tautological".into(),
            ))
        }
    };
    let (fm, m) = match &eq.model.tgt {
        Side::Taut { obj, line } => (obj.clone(), line.clone()),
        Side::Det { .. } => {
            return Err(YonedaError::NotComposable(
                "target side is not tautological".into(),
            ))
        }
    };
    let n = eq.model.n;
    let mut out = PClass::zero(&el, &l, &fm, &m, n);
    let s_space = ctx.ext(&l, &m)?.clone();
    for ((comp, labels), coeff) in &eq.terms {
        match comp {
            (Some(1), Some(1)) => {
                let free: Vec<String> = labels[1..].to_vec();
                emit_t1(ctx, &mut out, &s_space, &labels[0], &free, coeff.clone())?;
            }
            (Some(1), Some(2)) => {
                let free: Vec<String> = labels[2..].to_vec();
                emit_t2(
                    ctx,
                    &mut out,
                    &s_space,
                    &labels[0],
                    &labels[1],
                    &free,
                    coeff.clone(),
                )?;
            }
            _ => {}
        }
    }
    Ok(out)
}

/// The component-model product: lift both classes, compose, project.
pub fn yoneda_oracle(ctx: &SurfaceContext, a: &PClass, b: &PClass) -> Result<PClass, YonedaError> {
    yoneda_oracle_with_cap(ctx, a, b, DEFAULT_ORACLE_CAP)
}

pub fn yoneda_oracle_with_cap(
    ctx: &SurfaceContext,
    a: &PClass,
    b: &PClass,
    cap: usize,
) -> Result<PClass, YonedaError> {
    if a.n > cap {
        return Err(YonedaError::OracleCapExceeded { n: a.n, cap });
    }
    if b.fm != a.el || b.m != a.l || a.n != b.n {
        return Err(YonedaError::NotComposable(format!(
            "inner lands in ({}, {}) n={}, outer starts at ({}, {}) n={}",
            b.fm, b.m, b.n, a.el, a.l, a.n
        )));
    }
    let lifted_a = lift_pclass(ctx, a)?;
    let lifted_b = lift_pclass(ctx, b)?;
    let composed = eq_compose(ctx, &lifted_a, &lifted_b)?;
    project_pclass(ctx, &composed)
}

/// The class induced by a surface morphism `φ: ext(EL, FM)` twisted by the
/// declared identity of `ext(M, M)`: `(φ ⊗ 1_M ⋯ 1_M ; 0)`.
pub fn induced_morphism_class(
    ctx: &SurfaceContext,
    el: &str,
    fm: &str,
    phi: &str,
    m: &str,
    n: usize,
) -> Result<PClass, YonedaError> {
    if n < 2 {
        return Err(YonedaError::NTooSmall { n, min: 2 });
    }
    let one = ctx.identity(m)?.to_string();
    let mut class = PClass::zero(el, m, fm, m, n);
    let ones: Vec<&str> = (0..n - 1).map(|_| one.as_str()).collect();
    class.add_type1(ctx, phi, &ones, rati(1))?;
    Ok(class)
}

/// The unit of `P(E,L,E,L)`: the identity of `ext(EL,EL)` tensored with
/// identities of `ext(L,L)`.
pub fn identity_pclass(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    n: usize,
) -> Result<PClass, YonedaError> {
    if n < 2 {
        return Err(YonedaError::NTooSmall { n, min: 2 });
    }
    let one_obj = ctx.identity(el)?.to_string();
    let one_line = ctx.identity(l)?.to_string();
    let mut class = PClass::zero(el, l, el, l, n);
    let ones: Vec<&str> = (0..n - 1).map(|_| one_line.as_str()).collect();
    class.add_type1(ctx, &one_obj, &ones, rati(1))?;
    Ok(class)
}

/// A class in `S^n ext(L,M)` (extensions between determinant line
/// bundles): a combination of canonical monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymClass {
    pub l: String,
    pub m: String,
    pub n: usize,
    pub terms: BTreeMap<Vec<String>, Rat>,
}

impl SymClass {
    pub fn zero(l: &str, m: &str, n: usize) -> Self {
        SymClass {
            l: l.to_string(),
            m: m.to_string(),
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_monomial(
        &mut self,
        ctx: &SurfaceContext,
        labels: &[&str],
        coeff: Rat,
    ) -> Result<(), YonedaError> {
        if labels.len() != self.n {
            return Err(YonedaError::Malformed(format!(
                "monomial needs {} labels, got {}",
                self.n,
                labels.len()
            )));
        }
        let space = ctx.ext(&self.l, &self.m)?;
        if let Some((sorted, sign)) = canonical_multiset(space, labels)? {
            let entry = self.terms.entry(sorted.clone()).or_insert_with(Rat::zero);
            *entry += rati(sign) * coeff;
            if entry.is_zero() {
                self.terms.remove(&sorted);
            }
        }
        Ok(())
    }

    /// The unit: n copies of the declared identity of `ext(L,L)`.
    pub fn identity(ctx: &SurfaceContext, l: &str, n: usize) -> Result<Self, YonedaError> {
        let one = ctx.identity(l)?.to_string();
        let mut class = SymClass::zero(l, l, n);
        let ones: Vec<&str> = (0..n).map(|_| one.as_str()).collect();
        class.add_monomial(ctx, &ones, rati(1))?;
        Ok(class)
    }
}

/// Lift of a determinant-to-determinant class: the symmetrization
/// expansion `(1/n!) Σ_σ ε_σ · (ordered tensor)` in the single component.
pub fn lift_sym(ctx: &SurfaceContext, c: &SymClass) -> Result<EqClass, YonedaError> {
    let n = c.n;
    let model = EqModel::new(
        n,
        Side::Det { line: c.l.clone() },
        Side::Det { line: c.m.clone() },
    );
    let mut out = EqClass::zero(model);
    let space = ctx.ext(&c.l, &c.m)?;
    let inv_fact = rat(1, factorial(n));
    for (labels, coeff) in &c.terms {
        let degrees: Vec<i64> = labels
            .iter()
            .map(|l| space.degree_of(l))
            .collect::<Result<_, _>>()?;
        for sigma in Permutation::all(n) {
            let sign = crate::graded::koszul_sign(&sigma, &degrees)?;
            let inv = sigma.inverse();
            let tuple: Vec<String> = (1..=n)
                .map(|slot| labels[inv.apply(slot) - 1].clone())
                .collect();
            out.add_term((None, None), tuple, rati(sign) * coeff * &inv_fact);
        }
    }
    Ok(out)
}

pub fn project_sym(ctx: &SurfaceContext, eq: &EqClass) -> Result<SymClass, YonedaError> {
    let (l, m) = match (&eq.model.src, &eq.model.tgt) {
        (Side::Det { line: l }, Side::Det { line: m }) => (l.clone(), m.clone()),
        _ => {
            return Err(YonedaError::NotComposable(
                "not a determinant pairing".into(),
            ))
        }
    };
    let mut out = SymClass::zero(&l, &m, eq.model.n);
    for ((comp, labels), coeff) in &eq.terms {
        debug_assert_eq!(*comp, (None, None));
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let space = ctx.ext(&l, &m)?;
        if let Some((sorted, sign)) = canonical_multiset(space, &refs)? {
            let entry = out.terms.entry(sorted.clone()).or_insert_with(Rat::zero);
            *entry += rati(sign) * coeff;
            if entry.is_zero() {
                out.terms.remove(&sorted);
            }
        }
    }
    Ok(out)
}

/// Product of two determinant-to-determinant classes through the
/// component model: the n-fold slotwise product with Künneth signs,
/// re-symmetrized.
pub fn det_det_compose(
    ctx: &SurfaceContext,
    a: &SymClass,
    b: &SymClass,
) -> Result<SymClass, YonedaError> {
    det_det_compose_with_cap(ctx, a, b, DEFAULT_ORACLE_CAP)
}

pub fn det_det_compose_with_cap(
    ctx: &SurfaceContext,
    a: &SymClass,
    b: &SymClass,
    cap: usize,
) -> Result<SymClass, YonedaError> {
    if a.n > cap {
        return Err(YonedaError::OracleCapExceeded { n: a.n, cap });
    }
    if b.m != a.l || a.n != b.n {
        return Err(YonedaError::NotComposable(format!(
            "inner lands in {} (n={}), outer starts at {} (n={})",
            b.m, b.n, a.l, a.n
        )));
    }
    let lifted_a = lift_sym(ctx, a)?;
    let lifted_b = lift_sym(ctx, b)?;
    project_sym(ctx, &eq_compose(ctx, &lifted_a, &lifted_b)?)
}

/// A class with one marked head slot: extensions from a twisted
/// tautological object to a determinant line bundle (head in `ext(EL,M)`)
/// or the other way around (head in `ext(L,FM)`), with n-1 free labels in
/// `ext(L,M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedClass {
    pub src: Side,
    pub tgt: Side,
    pub n: usize,
    pub terms: BTreeMap<(String, Vec<String>), Rat>,
}

impl MarkedClass {
    pub fn taut_to_det(el: &str, l: &str, m: &str, n: usize) -> Self {
        MarkedClass {
            src: Side::Taut {
                obj: el.to_string(),
                line: l.to_string(),
            },
            tgt: Side::Det {
                line: m.to_string(),
            },
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn det_to_taut(l: &str, fm: &str, m: &str, n: usize) -> Self {
        MarkedClass {
            src: Side::Det {
                line: l.to_string(),
            },
            tgt: Side::Taut {
                obj: fm.to_string(),
                line: m.to_string(),
            },
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Ordered pair of symbols for the head slot.
    fn head_pair(&self) -> (String, String) {
        match (&self.src, &self.tgt) {
            (Side::Taut { obj, .. }, Side::Det { line }) => (obj.clone(), line.clone()),
            (Side::Det { line }, Side::Taut { obj, .. }) => (line.clone(), obj.clone()),
            _ => unreachable!("marked classes have exactly one tautological side"),
        }
    }

    fn free_pair(&self) -> (String, String) {
        (self.src.line().to_string(), self.tgt.line().to_string())
    }

    pub fn add_term(
        &mut self,
        ctx: &SurfaceContext,
        head: &str,
        free: &[&str],
        coeff: Rat,
    ) -> Result<(), YonedaError> {
        if free.len() + 1 != self.n {
            return Err(YonedaError::Malformed(format!(
                "marked term needs {} free labels, got {}",
                self.n - 1,
                free.len()
            )));
        }
        let (ha, hb) = self.head_pair();
        ctx.ext(&ha, &hb)?.index_of(head)?;
        let (fa, fb) = self.free_pair();
        let space = ctx.ext(&fa, &fb)?;
        if let Some((sorted, sign)) = canonical_multiset(space, free)? {
            let key = (head.to_string(), sorted);
            let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
            *entry += rati(sign) * coeff;
            if entry.is_zero() {
                self.terms.remove(&key);
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Lift of a marked class: the head letter occupies the active slot, the
/// free letters spread with written-sum signs and coefficient `1/(n-1)!`.
pub fn lift_marked(ctx: &SurfaceContext, c: &MarkedClass) -> Result<EqClass, YonedaError> {
    let n = c.n;
    let model = EqModel::new(n, c.src.clone(), c.tgt.clone());
    let mut out = EqClass::zero(model);
    let (ha, hb) = c.head_pair();
    let (fa, fb) = c.free_pair();
    let head_space = ctx.ext(&ha, &hb)?;
    let free_space = ctx.ext(&fa, &fb)?;
    let inv1 = rat(1, factorial(n - 1));
    for ((head, free), coeff) in &c.terms {
        let mut degrees = vec![head_space.degree_of(head)?];
        for label in free {
            degrees.push(free_space.degree_of(label)?);
        }
        let mut letters = vec![head.clone()];
        letters.extend(free.iter().cloned());
        for sigma in Permutation::all(n) {
            let sign = crate::graded::koszul_sign(&sigma, &degrees)?;
            let inv = sigma.inverse();
            let labels: Vec<String> = (1..=n)
                .map(|slot| letters[inv.apply(slot) - 1].clone())
                .collect();
            let active = sigma.apply(1);
            let comp = if c.src.is_taut() {
                (Some(active), None)
            } else {
                (None, Some(active))
            };
            out.add_term(comp, labels, rati(sign) * coeff * &inv1);
        }
    }
    Ok(out)
}

pub fn project_marked(ctx: &SurfaceContext, eq: &EqClass) -> Result<MarkedClass, YonedaError> {
    let mut out = match (&eq.model.src, &eq.model.tgt) {
        (Side::Taut { obj, line }, Side::Det { line: m }) => {
            MarkedClass::taut_to_det(obj, line, m, eq.model.n)
        }
        (Side::Det { line }, Side::Taut { obj, line: m }) => {
            MarkedClass::det_to_taut(line, obj, m, eq.model.n)
        }
        _ => return Err(YonedaError::NotComposable("not a marked pairing".into())),
    };
    let marked_comp = if out.src.is_taut() {
        (Some(1), None)
    } else {
        (None, Some(1))
    };
    for ((comp, labels), coeff) in &eq.terms {
        if *comp != marked_comp {
            continue;
        }
        let refs: Vec<&str> = labels[1..].iter().map(String::as_str).collect();
        let (fa, fb) = out.free_pair();
        let space = ctx.ext(&fa, &fb)?;
        if let Some((sorted, sign)) = canonical_multiset(space, &refs)? {
            let key = (labels[0].clone(), sorted);
            let entry = out.terms.entry(key.clone()).or_insert_with(Rat::zero);
            *entry += rati(sign) * coeff;
            if entry.is_zero() {
                out.terms.remove(&key);
            }
        }
    }
    Ok(out)
}

/// Mixed-case product through the component model: a marked class after a
/// class between twisted tautological objects.
pub fn marked_after_pclass(
    ctx: &SurfaceContext,
    a: &MarkedClass,
    b: &PClass,
) -> Result<MarkedClass, YonedaError> {
    if a.n > DEFAULT_ORACLE_CAP {
        return Err(YonedaError::OracleCapExceeded {
            n: a.n,
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    let lifted_a = lift_marked(ctx, a)?;
    let lifted_b = lift_pclass(ctx, b)?;
    project_marked(ctx, &eq_compose(ctx, &lifted_a, &lifted_b)?)
}

#[derive(Serialize, Deserialize)]
struct RawPClass {
    space: RawPTyping,
    terms: Vec<RawPTerm>,
}

#[derive(Serialize, Deserialize)]
struct RawPTyping {
    el: String,
    l: String,
    fm: String,
    m: String,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RawPTerm {
    summand: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    s: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    t: Vec<String>,
    coeff: String,
}

impl RawPClass {
    fn from_class(c: &PClass) -> Self {
        let terms = c
            .terms
            .iter()
            .map(|(key, coeff)| match key {
                PKey::T1 { phi, s } => RawPTerm {
                    summand: 1,
                    phi: Some(phi.clone()),
                    eta: None,
                    x: None,
                    s: s.clone(),
                    t: Vec::new(),
                    coeff: format_rat(coeff),
                },
                PKey::T2 { eta, x, t } => RawPTerm {
                    summand: 2,
                    phi: None,
                    eta: Some(eta.clone()),
                    x: Some(x.clone()),
                    s: Vec::new(),
                    t: t.clone(),
                    coeff: format_rat(coeff),
                },
            })
            .collect();
        RawPClass {
            space: RawPTyping {
                el: c.el.clone(),
                l: c.l.clone(),
                fm: c.fm.clone(),
                m: c.m.clone(),
                n: c.n,
            },
            terms,
        }
    }

    fn into_class(self, ctx: &SurfaceContext) -> Result<PClass, YonedaError> {
        let mut class = PClass::zero(
            &self.space.el,
            &self.space.l,
            &self.space.fm,
            &self.space.m,
            self.space.n,
        );
        for (i, term) in self.terms.into_iter().enumerate() {
            let coeff = parse_rat(&term.coeff)
                .ok_or_else(|| YonedaError::Malformed(format!("term {i}: bad coefficient")))?;
            match term.summand {
                1 => {
                    let phi = term
                        .phi
                        .ok_or_else(|| YonedaError::Malformed(format!("term {i}: missing phi")))?;
                    let s: Vec<&str> = term.s.iter().map(String::as_str).collect();
                    class.add_type1(ctx, &phi, &s, coeff)?;
                }
                2 => {
                    let eta = term
                        .eta
                        .ok_or_else(|| YonedaError::Malformed(format!("term {i}: missing eta")))?;
                    let x = term
                        .x
                        .ok_or_else(|| YonedaError::Malformed(format!("term {i}: missing x")))?;
                    let t: Vec<&str> = term.t.iter().map(String::as_str).collect();
                    class.add_type2(ctx, &eta, &x, &t, coeff)?;
                }
                other => {
                    return Err(YonedaError::Malformed(format!(
                        "term {i}: bad summand {other}"
                    )))
                }
            }
        }
        Ok(class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ComposeTable;
    use crate::graded::Element;

    #[test]
    fn kunneth_sign_examples() {
        assert_eq!(kunneth_compose_sign(&[1, 0], &[0, 1]).unwrap(), -1);
        assert_eq!(kunneth_compose_sign(&[2, 0, 4], &[0, 6, 2]).unwrap(), 1);
        // iterate the two-factor rule: exponent a1(b2+b3) + a2 b3 = 3
        assert_eq!(kunneth_compose_sign(&[1, 1, 0], &[0, 1, 1]).unwrap(), -1);
        assert!(kunneth_compose_sign(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn sum_bullet_sign_examples() {
        // identity layout
        let layout = [
            Letter::Outer(1),
            Letter::Outer(2),
            Letter::Inner(1),
            Letter::Inner(2),
        ];
        assert_eq!(sum_bullet_sign(&layout, &[1, 1], &[1, 1]).unwrap(), 1);
        // four odd letters interleaved (x1 y1 x2 y2)
        let layout = [
            Letter::Outer(1),
            Letter::Inner(1),
            Letter::Outer(2),
            Letter::Inner(2),
        ];
        assert_eq!(sum_bullet_sign(&layout, &[1, 1], &[1, 1]).unwrap(), -1);
        // (x1 y2 x2 y1)
        let layout = [
            Letter::Outer(1),
            Letter::Inner(2),
            Letter::Outer(2),
            Letter::Inner(1),
        ];
        assert_eq!(sum_bullet_sign(&layout, &[1, 1], &[1, 1]).unwrap(), 1);
        // repeated letter rejected
        let layout = [
            Letter::Outer(1),
            Letter::Outer(1),
            Letter::Inner(1),
            Letter::Inner(2),
        ];
        assert!(sum_bullet_sign(&layout, &[1, 1], &[1, 1]).is_err());
    }

    /// Context with the twelve ext spaces and eight tables of the three
    /// object pairs (E,L) -> (F,M) -> (G,N), all one-dimensional in degree
    /// zero, all structure constants 1.
    fn all_one_context() -> SurfaceContext {
        let mut ctx = SurfaceContext::new();
        let pairs = [
            ("E", "F"),
            ("E", "M"),
            ("L", "F"),
            ("L", "M"),
            ("F", "G"),
            ("F", "N"),
            ("M", "G"),
            ("M", "N"),
            ("E", "G"),
            ("E", "N"),
            ("L", "G"),
            ("L", "N"),
        ];
        for (a, b) in pairs {
            ctx.set_ext(
                a,
                b,
                GradedSpace::new(vec![(format!("{a}{b}"), 0)]).unwrap(),
            );
        }
        let triples = [
            ("E", "F", "G"),
            ("L", "M", "N"),
            ("E", "M", "G"),
            ("L", "F", "N"),
            ("E", "F", "N"),
            ("L", "M", "G"),
            ("E", "M", "N"),
            ("L", "F", "G"),
        ];
        for (a, b, c) in triples {
            let mut table = ComposeTable::new();
            table.insert(
                &format!("{b}{c}"),
                &format!("{a}{b}"),
                Element::single(&format!("{a}{c}"), rati(1)),
            );
            ctx.set_table(a, b, c, table);
        }
        ctx.validate().unwrap();
        ctx
    }

    #[test]
    fn closed_product_all_one_n2() {
        // frozen by hand: with every space one-dimensional in degree zero
        // and every structure constant 1, the full classes compose to
        // 2·(type 1) + 2·(type 2)
        let ctx = all_one_context();
        let mut a = PClass::zero("F", "M", "G", "N", 2);
        a.add_type1(&ctx, "FG", &["MN"], rati(1)).unwrap();
        a.add_type2(&ctx, "FN", "MG", &[], rati(1)).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", 2);
        b.add_type1(&ctx, "EF", &["LM"], rati(1)).unwrap();
        b.add_type2(&ctx, "EM", "LF", &[], rati(1)).unwrap();

        let closed = yoneda_closed(&ctx, &a, &b).unwrap();
        let mut expected = PClass::zero("E", "L", "G", "N", 2);
        expected.add_type1(&ctx, "EG", &["LN"], rati(2)).unwrap();
        expected.add_type2(&ctx, "EN", "LG", &[], rati(2)).unwrap();
        assert_eq!(closed, expected);

        let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
        assert_eq!(closed, oracle);
    }

    #[test]
    fn lift_project_roundtrip_small() {
        let ctx = all_one_context();
        for n in 2..=4usize {
            let mut c = PClass::zero("E", "L", "F", "M", n);
            let s: Vec<&str> = (0..n - 1).map(|_| "LM").collect();
            c.add_type1(&ctx, "EF", &s, rat(3, 2)).unwrap();
            let t: Vec<&str> = (0..n - 2).map(|_| "LM").collect();
            c.add_type2(&ctx, "EM", "LF", &t, rat(-1, 3)).unwrap();
            let lifted = lift_pclass(&ctx, &c).unwrap();
            lifted.validate(&ctx).unwrap();
            let back = project_pclass(&ctx, &lifted).unwrap();
            assert_eq!(back, c, "n={n}");
            // the lift is invariant under the signed group action
            for sigma in Permutation::all(n) {
                assert_eq!(lifted.apply_permutation(&ctx, &sigma).unwrap(), lifted);
            }
        }
    }

    #[test]
    fn identity_is_two_sided_unit() {
        let mut ctx = all_one_context();
        // add self-hom spaces and identity tables for (F, M)
        for obj in ["F", "M"] {
            ctx.set_ext(
                obj,
                obj,
                GradedSpace::new(vec![(format!("one{obj}"), 0)]).unwrap(),
            );
            ctx.set_identity(obj, &format!("one{obj}"));
        }
        // tables for composing with the identity on either side
        for (a, b, c, g, f, r) in [
            // id ∘ b-terms
            ("E", "F", "F", "oneF", "EF", "EF"),
            ("L", "M", "M", "oneM", "LM", "LM"),
            ("E", "M", "M", "oneM", "EM", "EM"),
            ("L", "F", "F", "oneF", "LF", "LF"),
            ("E", "F", "M", "FM", "EF", "EM"),
            ("L", "M", "F", "MF", "LM", "LF"),
            ("E", "M", "F", "MF", "EM", "EF"),
            ("L", "F", "M", "FM", "LF", "LM"),
            // a-terms ∘ id
            ("F", "F", "G", "FG", "oneF", "FG"),
            ("M", "M", "N", "MN", "oneM", "MN"),
            ("F", "F", "N", "FN", "oneF", "FN"),
            ("M", "M", "G", "MG", "oneM", "MG"),
            ("F", "M", "G", "MG", "FM", "FG"),
            ("M", "F", "N", "FN", "MF", "MN"),
            ("F", "M", "N", "MN", "FM", "FN"),
            ("M", "F", "G", "FG", "MF", "MG"),
        ] {
            // create the mid spaces used above when missing
            if ctx.ext(a, b).is_err() {
                ctx.set_ext(
                    a,
                    b,
                    GradedSpace::new(vec![(format!("{a}{b}"), 0)]).unwrap(),
                );
            }
            if ctx.ext(b, c).is_err() {
                ctx.set_ext(
                    b,
                    c,
                    GradedSpace::new(vec![(format!("{b}{c}"), 0)]).unwrap(),
                );
            }
            if ctx.ext(a, c).is_err() {
                ctx.set_ext(
                    a,
                    c,
                    GradedSpace::new(vec![(format!("{a}{c}"), 0)]).unwrap(),
                );
            }
            let mut table = ctx.table(a, b, c).cloned().unwrap_or_default();
            table.insert(g, f, Element::single(r, rati(1)));
            ctx.set_table(a, b, c, table);
        }
        ctx.validate().unwrap();

        let unit = identity_pclass(&ctx, "F", "M", 3).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", 3);
        b.add_type1(&ctx, "EF", &["LM", "LM"], rat(2, 1)).unwrap();
        b.add_type2(&ctx, "EM", "LF", &["LM"], rat(5, 7)).unwrap();
        let left = yoneda_closed(&ctx, &unit, &b).unwrap();
        assert_eq!(left, b);

        let mut a = PClass::zero("F", "M", "G", "N", 3);
        a.add_type1(&ctx, "FG", &["MN", "MN"], rati(1)).unwrap();
        a.add_type2(&ctx, "FN", "MG", &["MN"], rati(-2)).unwrap();
        let right = yoneda_closed(&ctx, &a, &unit).unwrap();
        assert_eq!(right, a);

        // both engines agree on the unit laws
        assert_eq!(yoneda_oracle(&ctx, &unit, &b).unwrap(), b);
        assert_eq!(yoneda_oracle(&ctx, &a, &unit).unwrap(), a);
    }

    #[test]
    fn det_det_composition_squares_constant() {
        // one-dimensional degree-zero spaces with structure constant c:
        // the product of the squared classes carries c^2
        let mut ctx = SurfaceContext::new();
        ctx.set_ext("L", "M", GradedSpace::new(vec![("s".into(), 0)]).unwrap());
        ctx.set_ext("M", "N", GradedSpace::new(vec![("u".into(), 0)]).unwrap());
        ctx.set_ext("L", "N", GradedSpace::new(vec![("v".into(), 0)]).unwrap());
        let mut table = ComposeTable::new();
        let c = rat(3, 7);
        table.insert("u", "s", Element::single("v", c.clone()));
        ctx.set_table("L", "M", "N", table);
        ctx.validate().unwrap();

        let mut a = SymClass::zero("M", "N", 2);
        a.add_monomial(&ctx, &["u", "u"], rati(1)).unwrap();
        let mut b = SymClass::zero("L", "M", 2);
        b.add_monomial(&ctx, &["s", "s"], rati(1)).unwrap();
        let product = det_det_compose(&ctx, &a, &b).unwrap();
        let mut expected = SymClass::zero("L", "N", 2);
        expected.add_monomial(&ctx, &["v", "v"], &c * &c).unwrap();
        assert_eq!(product, expected);
    }

    #[test]
    fn pclass_json_roundtrip() {
        let ctx = all_one_context();
        let mut c = PClass::zero("E", "L", "F", "M", 3);
        c.add_type1(&ctx, "EF", &["LM", "LM"], rat(1, 2)).unwrap();
        c.add_type2(&ctx, "EM", "LF", &["LM"], rati(-2)).unwrap();
        let json = c.to_json_string();
        let back = PClass::from_json_str(&ctx, &json).unwrap();
        assert_eq!(back, c);
    }
}

#[cfg(test)]
mod more_tests {
    use super::*;
    use crate::context::ComposeTable;
    use crate::equivariant::{EqModel, Side};
    use crate::graded::Element;
    use crate::verify::exterior_context;

    #[test]
    fn lift_of_type1_class_n2_frozen() {
        // odd φ and odd s: components (1,1) and (2,2) with coefficients
        // 1/(n-1)! = 1 and the written-sum signs +1 and -1
        let ctx = exterior_context(&["E", "L", "F", "M"], 1);
        let mut c = PClass::zero("E", "L", "F", "M", 2);
        c.add_type1(&ctx, "w1", &["w1"], rati(1)).unwrap();
        let lifted = lift_pclass(&ctx, &c).unwrap();
        let expected_model = EqModel::new(
            2,
            Side::Taut {
                obj: "E".into(),
                line: "L".into(),
            },
            Side::Taut {
                obj: "F".into(),
                line: "M".into(),
            },
        );
        let mut expected = EqClass::zero(expected_model);
        expected.add_term((Some(1), Some(1)), vec!["w1".into(), "w1".into()], rati(1));
        expected.add_term((Some(2), Some(2)), vec!["w1".into(), "w1".into()], rati(-1));
        assert_eq!(lifted, expected);

        // zero class lifts to zero
        let zero = PClass::zero("E", "L", "F", "M", 2);
        assert!(lift_pclass(&ctx, &zero).unwrap().is_zero());
    }

    #[test]
    fn odd_slot_type2_product_n3_matches_oracle() {
        // classes with every slot odd: the sign bookkeeping is exercised
        // in all five sums and must agree with the component engine
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 2);
        let mut a = PClass::zero("F", "M", "G", "N", 3);
        a.add_type2(&ctx, "w1", "w2", &["w1"], rati(1)).unwrap();
        a.add_type2(&ctx, "w2", "w1", &["w2"], rati(1)).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", 3);
        b.add_type2(&ctx, "w2", "w1", &["w1"], rati(1)).unwrap();
        b.add_type1(&ctx, "w1", &["w1", "w2"], rati(1)).unwrap();
        let closed = yoneda_closed(&ctx, &a, &b).unwrap();
        let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
        assert_eq!(closed, oracle);
        assert!(!closed.is_zero());
    }

    #[test]
    fn det_det_identities_compose_to_identity() {
        let ctx = exterior_context(&["L"], 2);
        for n in 1..=3usize {
            let unit = SymClass::identity(&ctx, "L", n).unwrap();
            let product = det_det_compose(&ctx, &unit, &unit).unwrap();
            assert_eq!(product, unit, "n={n}");
        }
    }

    #[test]
    fn marked_composition_lands_in_taut_det_space() {
        // det ∘ taut mixed case on a one-dimensional context: the product
        // of a taut->det class with a taut->taut class is a taut->det
        // class whose labels live in ext(E,N) and ext(L,N)
        let ctx = {
            let mut ctx = SurfaceContext::new();
            let pairs = [
                ("E", "F"),
                ("E", "M"),
                ("L", "F"),
                ("L", "M"),
                ("F", "N"),
                ("M", "N"),
                ("E", "N"),
                ("L", "N"),
            ];
            for (a, b) in pairs {
                ctx.set_ext(
                    a,
                    b,
                    GradedSpace::new(vec![(format!("{a}{b}"), 0)]).unwrap(),
                );
            }
            for (a, b, c) in [
                ("E", "F", "N"),
                ("L", "M", "N"),
                ("E", "M", "N"),
                ("L", "F", "N"),
            ] {
                let mut table = ComposeTable::new();
                table.insert(
                    &format!("{b}{c}"),
                    &format!("{a}{b}"),
                    Element::single(&format!("{a}{c}"), rati(1)),
                );
                ctx.set_table(a, b, c, table);
            }
            ctx.validate().unwrap();
            ctx
        };
        let n = 2;
        let mut a = MarkedClass::taut_to_det("F", "M", "N", n);
        a.add_term(&ctx, "FN", &["MN"], rati(1)).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", n);
        b.add_type1(&ctx, "EF", &["LM"], rati(1)).unwrap();
        b.add_type2(&ctx, "EM", "LF", &[], rati(1)).unwrap();
        let product = marked_after_pclass(&ctx, &a, &b).unwrap();
        assert_eq!(
            product.src,
            Side::Taut {
                obj: "E".into(),
                line: "L".into()
            }
        );
        assert_eq!(product.tgt, Side::Det { line: "N".into() });
        assert!(!product.is_zero());
        for (head, free) in product.terms.keys() {
            assert!(ctx.ext("E", "N").unwrap().index_of(head).is_ok());
            for label in free {
                assert!(ctx.ext("L", "N").unwrap().index_of(label).is_ok());
            }
        }
        // degrees stay in the taut->det dimension table
        let space = crate::hilbert::ext_taut_det(&ctx, "E", "L", "N", n).unwrap();
        assert!(space.dim() >= product.terms.len());
    }

    #[test]
    fn exhaustive_single_term_products_n3_agree() {
        // every single-term type-2 x type-2 product over a two-generator
        // exterior context at n = 3; this slice pins the coefficient of
        // the crossed-pair sum, which only differs from the component
        // engine for n >= 3
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 2);
        let labels = ["e", "w1", "w2", "w12"];
        let mut nonzero = 0usize;
        for ae in labels {
            for ax in labels {
                for at in labels {
                    for be in labels {
                        for bx in labels {
                            for bt in labels {
                                let mut a = PClass::zero("F", "M", "G", "N", 3);
                                a.add_type2(&ctx, ae, ax, &[at], rati(1)).unwrap();
                                let mut b = PClass::zero("E", "L", "F", "M", 3);
                                b.add_type2(&ctx, be, bx, &[bt], rati(1)).unwrap();
                                if a.is_zero() || b.is_zero() {
                                    continue;
                                }
                                let closed = yoneda_closed(&ctx, &a, &b).unwrap();
                                let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
                                assert_eq!(
                                    closed, oracle,
                                    "a=({ae},{ax},[{at}]) b=({be},{bx},[{bt}])"
                                );
                                if !closed.is_zero() {
                                    nonzero += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(
            nonzero > 100,
            "the scan must exercise nonvanishing products"
        );
    }

    #[test]
    fn exterior_products_n4_exercise_the_hatted_sum() {
        // n = 4 is the smallest size where the last sum has a nontrivial
        // inner permutation and a surviving remainder product; the unit
        // letters keep every slot composition alive
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 3);
        let mut a = PClass::zero("F", "M", "G", "N", 4);
        a.add_type2(&ctx, "e", "e", &["w1", "e"], rati(1)).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", 4);
        b.add_type2(&ctx, "e", "e", &["w2", "e"], rati(1)).unwrap();
        let closed = yoneda_closed(&ctx, &a, &b).unwrap();
        let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
        assert_eq!(closed, oracle);
        assert!(!closed.is_zero());
        // the type-2 part receives contributions from the hatted sum
        assert!(closed.terms.keys().any(|k| matches!(k, PKey::T2 { .. })));

        // randomized classes over the same context
        use rand::{RngExt, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(44);
        let labels = ["e", "w1", "w2", "w3", "w12", "w13", "w23", "w123"];
        let mut nonzero = 0usize;
        for _ in 0..30 {
            let pick = |rng: &mut rand::rngs::StdRng| labels[rng.random_range(0..labels.len())];
            let mut a = PClass::zero("F", "M", "G", "N", 4);
            a.add_type2(
                &ctx,
                pick(&mut rng),
                pick(&mut rng),
                &[pick(&mut rng), pick(&mut rng)],
                rati(1),
            )
            .unwrap();
            a.add_type1(
                &ctx,
                pick(&mut rng),
                &[pick(&mut rng), pick(&mut rng), pick(&mut rng)],
                rati(1),
            )
            .unwrap();
            let mut b = PClass::zero("E", "L", "F", "M", 4);
            b.add_type2(
                &ctx,
                pick(&mut rng),
                pick(&mut rng),
                &[pick(&mut rng), pick(&mut rng)],
                rati(1),
            )
            .unwrap();
            b.add_type1(
                &ctx,
                pick(&mut rng),
                &[pick(&mut rng), pick(&mut rng), pick(&mut rng)],
                rati(1),
            )
            .unwrap();
            let closed = yoneda_closed(&ctx, &a, &b).unwrap();
            let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
            assert_eq!(closed, oracle);
            if !closed.is_zero() {
                nonzero += 1;
            }
        }
        assert!(
            nonzero > 5,
            "the sweep must hit nonvanishing products, got {nonzero}"
        );
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 1);
        let a = PClass::zero("F", "M", "G", "N", 7);
        let b = PClass::zero("E", "L", "F", "M", 7);
        assert!(matches!(
            yoneda_oracle(&ctx, &a, &b),
            Err(YonedaError::OracleCapExceeded { n: 7, cap: 6 })
        ));
        assert!(yoneda_oracle_with_cap(&ctx, &a, &b, 8).unwrap().is_zero());
    }
}
