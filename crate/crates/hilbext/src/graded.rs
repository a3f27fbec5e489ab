//! Integer-graded vector spaces over the rationals with labeled bases,
//! Koszul signs, tensor powers, and graded symmetric powers.
//!
//! Degrees are signed; duals negate them. The symmetric power of a graded
//! space is taken in the graded sense: even-degree basis labels may repeat
//! inside a monomial, odd-degree labels may not.

use crate::linalg::{rat, rati, Matrix, Rat};
use crate::signs::{Permutation, SignError};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GradedError {
    #[error("duplicate basis label {label:?}")]
    DuplicateLabel { label: String },
    #[error("label {label:?} does not belong to the space")]
    UnknownLabel { label: String },
    #[error("tensor factors are not all the same space")]
    MixedFactors,
    #[error("tuple length {got} does not match {expected} factors")]
    TupleLength { got: usize, expected: usize },
    #[error(transparent)]
    Sign(#[from] SignError),
}

/// Koszul sign ε_{σ, p_1..p_k}: the sign picked up when σ permutes
/// homogeneous tensor factors of the given degrees. Generated by
/// `(-1)^{p_i p_{i+1}}` on adjacent swaps; equivalently, -1 for every
/// inversion of σ between two odd-degree slots.
pub fn koszul_sign(sigma: &Permutation, degrees: &[i64]) -> Result<i64, GradedError> {
    if sigma.n() != degrees.len() {
        return Err(GradedError::Sign(SignError::LengthMismatch {
            perm: sigma.n(),
            given: degrees.len(),
        }));
    }
    let mut exp = 0usize;
    for i in 1..=degrees.len() {
        if degrees[i - 1] % 2 == 0 {
            continue;
        }
        for j in i + 1..=degrees.len() {
            if degrees[j - 1] % 2 != 0 && sigma.apply(i) > sigma.apply(j) {
                exp += 1;
            }
        }
    }
    Ok(if exp.is_multiple_of(2) { 1 } else { -1 })
}

/// Koszul sign of sorting label indices into ascending order, where
/// `degrees[k]` is the degree of the k-th entry. Returns `None` when two
/// equal entries of odd degree collide (the monomial vanishes).
pub fn sort_with_sign<T: Ord + Clone>(entries: &[(T, i64)]) -> Option<(Vec<T>, i64)> {
    let mut items: Vec<(T, i64)> = entries.to_vec();
    let mut sign = 1i64;
    // insertion sort, counting odd-odd crossings
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1].0 > items[j].0 {
            if items[j - 1].1 % 2 != 0 && items[j].1 % 2 != 0 {
                sign = -sign;
            }
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in items.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 % 2 != 0 {
            return None;
        }
    }
    Some((items.into_iter().map(|(t, _)| t).collect(), sign))
}

/// A finitely supported graded vector space with an ordered labeled basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    basis: Vec<(String, i64)>,
    by_label: BTreeMap<String, usize>,
}

impl GradedSpace {
    pub fn new(basis: Vec<(String, i64)>) -> Result<Self, GradedError> {
        let mut by_label = BTreeMap::new();
        for (i, (label, _)) in basis.iter().enumerate() {
            if by_label.insert(label.clone(), i).is_some() {
                return Err(GradedError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(GradedSpace { basis, by_label })
    }

    /// The zero space.
    pub fn empty() -> Self {
        GradedSpace {
            basis: Vec::new(),
            by_label: BTreeMap::new(),
        }
    }

    /// Convenience: labels `prefix0, prefix1, ..` with the given degrees.
    pub fn with_degrees(prefix: &str, degrees: &[i64]) -> Self {
        GradedSpace::new(
            degrees
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("{prefix}{i}"), d))
                .collect(),
        )
        .expect("generated labels are distinct")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(String, i64)] {
        &self.basis
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.basis[idx].0
    }

    pub fn degree(&self, idx: usize) -> i64 {
        self.basis[idx].1
    }

    pub fn index_of(&self, label: &str) -> Result<usize, GradedError> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| GradedError::UnknownLabel {
                label: label.to_string(),
            })
    }

    pub fn degree_of(&self, label: &str) -> Result<i64, GradedError> {
        Ok(self.degree(self.index_of(label)?))
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        let mut dims = BTreeMap::new();
        for (_, d) in &self.basis {
            *dims.entry(*d).or_insert(0) += 1;
        }
        dims
    }

    pub fn dim_in_degree(&self, d: i64) -> usize {
        self.basis.iter().filter(|(_, deg)| *deg == d).count()
    }

    pub fn poincare(&self) -> Poincare {
        Poincare::from_dims(&self.dims())
    }

    /// Dual space: degrees negated, labels kept.
    pub fn dual(&self) -> GradedSpace {
        GradedSpace::new(self.basis.iter().map(|(l, d)| (l.clone(), -d)).collect())
            .expect("labels unchanged")
    }

    /// Shift `[k]`: subtracts `k` from every degree.
    pub fn shift(&self, k: i64) -> GradedSpace {
        GradedSpace::new(self.basis.iter().map(|(l, d)| (l.clone(), d - k)).collect())
            .expect("labels unchanged")
    }

    /// Pairwise tensor product with composite labels `a⊗b`.
    pub fn tensor(&self, other: &GradedSpace) -> GradedSpace {
        let mut basis = Vec::with_capacity(self.dim() * other.dim());
        for (la, da) in &self.basis {
            for (lb, db) in &other.basis {
                basis.push((format!("{la}⊗{lb}"), da + db));
            }
        }
        GradedSpace::new(basis).expect("tensor labels are distinct")
    }
}

/// A vector in a `GradedSpace`, sparse over labels. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<String, Rat>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn single(label: &str, coeff: Rat) -> Self {
        let mut e = Element::zero();
        e.add_term(label, coeff);
        e
    }

    pub fn add_term(&mut self, label: &str, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(label.to_string())
            .or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(label);
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (l, c) in &other.terms {
            out.add_term(l, c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Rat) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self.terms.iter().map(|(l, v)| (l.clone(), v * c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rat)> {
        self.terms.iter().map(|(l, c)| (l.as_str(), c))
    }

    pub fn coeff(&self, label: &str) -> Rat {
        self.terms.get(label).cloned().unwrap_or_else(Rat::zero)
    }

    /// Checks every label belongs to `space` and, if homogeneous, returns
    /// the common degree.
    pub fn validate_in(&self, space: &GradedSpace) -> Result<Option<i64>, GradedError> {
        let mut degree: Option<i64> = None;
        for l in self.terms.keys() {
            let d = space.degree_of(l)?;
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return Ok(None),
                _ => {}
            }
        }
        Ok(degree)
    }
}

/// Poincaré polynomial: finitely many (degree, dimension) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poincare(BTreeMap<i64, u64>);

impl Poincare {
    pub fn zero() -> Self {
        Poincare::default()
    }

    pub fn one() -> Self {
        Poincare::monomial(0, 1)
    }

    pub fn monomial(degree: i64, coeff: u64) -> Self {
        let mut m = BTreeMap::new();
        if coeff != 0 {
            m.insert(degree, coeff);
        }
        Poincare(m)
    }

    pub fn from_dims(dims: &BTreeMap<i64, usize>) -> Self {
        Poincare(
            dims.iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&d, &c)| (d, c as u64))
                .collect(),
        )
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.0.iter().map(|(&d, &c)| (d, c as usize)).collect()
    }

    pub fn coeff(&self, degree: i64) -> u64 {
        self.0.get(&degree).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Poincare) -> Poincare {
        let mut out = self.0.clone();
        for (&d, &c) in &other.0 {
            *out.entry(d).or_insert(0) += c;
        }
        Poincare(out)
    }

    pub fn mul(&self, other: &Poincare) -> Poincare {
        let mut out: BTreeMap<i64, u64> = BTreeMap::new();
        for (&d1, &c1) in &self.0 {
            for (&d2, &c2) in &other.0 {
                *out.entry(d1 + d2).or_insert(0) += c1 * c2;
            }
        }
        out.retain(|_, c| *c > 0);
        Poincare(out)
    }
}

impl fmt::Display for Poincare {
    /// Text form: terms ascending by degree, `c*t^d` with the coefficient
    /// omitted when 1; the degree-0 term prints as a bare number.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (&d, &c) in &self.0 {
            let part = if d == 0 {
                format!("{c}")
            } else {
                let t = if d == 1 {
                    "t".to_string()
                } else {
                    format!("t^{d}")
                };
                if c == 1 {
                    t
                } else {
                    format!("{c}*{t}")
                }
            };
            parts.push(part);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Tensor product of finitely many graded spaces; basis elements are
/// tuples of factor basis indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpace {
    factors: Vec<GradedSpace>,
}

impl TensorSpace {
    pub fn new(factors: Vec<GradedSpace>) -> Self {
        TensorSpace { factors }
    }

    pub fn power(base: &GradedSpace, n: usize) -> Self {
        TensorSpace {
            factors: vec![base.clone(); n],
        }
    }

    pub fn factors(&self) -> &[GradedSpace] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(GradedSpace::dim).product()
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for f in &self.factors {
            let mut next = Vec::with_capacity(out.len() * f.dim());
            for t in &out {
                for i in 0..f.dim() {
                    let mut t2 = t.clone();
                    t2.push(i);
                    next.push(t2);
                }
            }
            out = next;
        }
        out
    }

    pub fn degree_of(&self, tuple: &[usize]) -> i64 {
        tuple
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.degree(i))
            .sum()
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        let mut p = Poincare::one();
        for f in &self.factors {
            p = p.mul(&f.poincare());
        }
        p.dims()
    }

    pub fn label_of(&self, tuple: &[usize]) -> String {
        tuple
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.label(i).to_string())
            .collect::<Vec<_>>()
            .join("⊗")
    }

    fn check_equal_factors(&self) -> Result<&GradedSpace, GradedError> {
        let first = self.factors.first().ok_or(GradedError::MixedFactors)?;
        if self.factors.iter().any(|f| f != first) {
            return Err(GradedError::MixedFactors);
        }
        Ok(first)
    }

    /// Signed permutation action on a tensor element: slot `i` of the image
    /// holds the entry previously in slot `σ^{-1}(i)`, with the Koszul sign.
    pub fn permute(&self, elem: &TensorElement, sigma: &Permutation) -> TensorElement {
        let mut out = TensorElement::zero();
        for (tuple, coeff) in &elem.terms {
            let degrees: Vec<i64> = tuple
                .iter()
                .zip(&self.factors)
                .map(|(&i, f)| f.degree(i))
                .collect();
            let sign = koszul_sign(sigma, &degrees).expect("arity checked");
            let inv = sigma.inverse();
            let new_tuple: Vec<usize> = (1..=tuple.len())
                .map(|slot| tuple[inv.apply(slot) - 1])
                .collect();
            out.add_term(new_tuple, rati(sign) * coeff);
        }
        out
    }

    /// Symmetrization into the graded symmetric power: each ordered tuple
    /// maps to its sorted monomial with the Koszul sorting sign, or to zero
    /// when an odd-degree label repeats. On signed-invariant tensors this
    /// inverts `SymPowerSpace::expand`.
    pub fn symmetrize(&self, elem: &TensorElement) -> Result<SymElement, GradedError> {
        let base = self.check_equal_factors()?;
        let mut out = SymElement::zero();
        for (tuple, coeff) in &elem.terms {
            let entries: Vec<(usize, i64)> = tuple.iter().map(|&i| (i, base.degree(i))).collect();
            if let Some((sorted, sign)) = sort_with_sign(&entries) {
                out.add_term(sorted, rati(sign) * coeff);
            }
        }
        Ok(out)
    }
}

/// Sparse vector in a tensor space, keyed by index tuples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorElement {
    terms: BTreeMap<Vec<usize>, Rat>,
}

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement::default()
    }

    pub fn single(tuple: Vec<usize>, coeff: Rat) -> Self {
        let mut e = TensorElement::zero();
        e.add_term(tuple, coeff);
        e
    }

    pub fn add_term(&mut self, tuple: Vec<usize>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(tuple.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&tuple);
        }
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Rat) -> TensorElement {
        if c.is_zero() {
            return TensorElement::zero();
        }
        TensorElement {
            terms: self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, tuple: &[usize]) -> Rat {
        self.terms.get(tuple).cloned().unwrap_or_else(Rat::zero)
    }
}

/// Monomial in a graded symmetric power: a sorted multiset of base indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymElement {
    terms: BTreeMap<Vec<usize>, Rat>,
}

impl SymElement {
    pub fn zero() -> Self {
        SymElement::default()
    }

    pub fn add_term(&mut self, multiset: Vec<usize>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(multiset.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&multiset);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, multiset: &[usize]) -> Rat {
        self.terms.get(multiset).cloned().unwrap_or_else(Rat::zero)
    }
}

/// Graded symmetric power S^n V: basis monomials are nondecreasing index
/// multisets in which odd-degree indices never repeat, ordered by base
/// index (lexicographically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPowerSpace {
    base: GradedSpace,
    n: usize,
    basis: Vec<Vec<usize>>,
}

/// Builds S^n V.
pub fn sym_power(base: &GradedSpace, n: usize) -> SymPowerSpace {
    let mut basis = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(
        base: &GradedSpace,
        n: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..base.dim() {
            let odd = base.degree(i) % 2 != 0;
            if odd && cur.last() == Some(&i) {
                continue;
            }
            let next_start = if odd { i + 1 } else { i };
            cur.push(i);
            rec(base, n, next_start, cur, out);
            cur.pop();
        }
    }
    rec(base, n, 0, &mut cur, &mut basis);
    SymPowerSpace {
        base: base.clone(),
        n,
        basis,
    }
}

impl SymPowerSpace {
    pub fn base(&self) -> &GradedSpace {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn degree_of(&self, multiset: &[usize]) -> i64 {
        multiset.iter().map(|&i| self.base.degree(i)).sum()
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        let mut dims = BTreeMap::new();
        for m in &self.basis {
            *dims.entry(self.degree_of(m)).or_insert(0) += 1;
        }
        dims
    }

    pub fn poincare(&self) -> Poincare {
        Poincare::from_dims(&self.dims())
    }

    pub fn label_of(&self, multiset: &[usize]) -> String {
        format!(
            "{{{}}}",
            multiset
                .iter()
                .map(|&i| self.base.label(i).to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }

    /// Expansion S^n V -> V^{⊗n}: a monomial with entries `u_1 .. u_n`
    /// (sorted) maps to `(1/n!) Σ_σ ε_σ u_{σ^{-1}(1)} ⊗ .. ⊗ u_{σ^{-1}(n)}`.
    pub fn expand(&self, elem: &SymElement) -> TensorElement {
        let mut out = TensorElement::zero();
        let factorial: i64 = (1..=self.n as i64).product();
        let inv_fact = rat(1, factorial.max(1));
        for (multiset, coeff) in elem.terms() {
            let degrees: Vec<i64> = multiset.iter().map(|&i| self.base.degree(i)).collect();
            for sigma in Permutation::all(self.n) {
                let sign = koszul_sign(&sigma, &degrees).expect("lengths match");
                let inv = sigma.inverse();
                let tuple: Vec<usize> = (1..=self.n)
                    .map(|slot| multiset[inv.apply(slot) - 1])
                    .collect();
                out.add_term(tuple, rati(sign) * coeff * &inv_fact);
            }
        }
        out
    }
}

/// Poincaré polynomial of S^n V computed from the generating function
/// `Π_{even d} (1 - u t^d)^{-1} · Π_{odd d} (1 + u t^d)`, reading off the
/// coefficient of u^n. Independent of the monomial enumeration.
pub fn sym_power_poincare(base: &GradedSpace, n: usize) -> Poincare {
    // series[k] = coefficient of u^k, a Poincaré polynomial in t
    let mut series: Vec<Poincare> = vec![Poincare::zero(); n + 1];
    series[0] = Poincare::one();
    for (_, d) in base.basis() {
        let mono = Poincare::monomial(*d, 1);
        if d % 2 == 0 {
            // multiply by 1/(1 - u t^d): prefix sums along u with t-shift
            for k in 1..=n {
                let shifted = series[k - 1].mul(&mono);
                series[k] = series[k].add(&shifted);
            }
        } else {
            // multiply by (1 + u t^d)
            for k in (1..=n).rev() {
                let shifted = series[k - 1].mul(&mono);
                series[k] = series[k].add(&shifted);
            }
        }
    }
    series[n].clone()
}

/// Brute-force dimension count of the signed-symmetrization projector
/// `(1/n!) Σ_σ ε(σ) σ` on each degree slice of V^{⊗n}. This is the
/// invariants oracle the symmetric power is checked against.
pub fn tensor_power_invariants_dims(base: &GradedSpace, n: usize) -> BTreeMap<i64, usize> {
    let ts = TensorSpace::power(base, n);
    let tuples = ts.tuples();
    let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (idx, t) in tuples.iter().enumerate() {
        by_degree.entry(ts.degree_of(t)).or_default().push(idx);
    }
    let index_of: BTreeMap<&[usize], usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), i))
        .collect();
    let perms = Permutation::all(n);
    let mut out = BTreeMap::new();
    for (degree, block) in by_degree {
        let pos: BTreeMap<usize, usize> = block.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut proj = Matrix::zeros(block.len(), block.len());
        for sigma in &perms {
            let inv = sigma.inverse();
            for (col, &tuple_idx) in block.iter().enumerate() {
                let tuple = &tuples[tuple_idx];
                let degrees: Vec<i64> = tuple.iter().map(|&i| base.degree(i)).collect();
                let sign = koszul_sign(sigma, &degrees).expect("lengths match");
                let image: Vec<usize> = (1..=n).map(|slot| tuple[inv.apply(slot) - 1]).collect();
                let row = pos[&index_of[image.as_slice()]];
                let cur = proj.at(row, col) + rati(sign);
                proj.set(row, col, cur);
            }
        }
        let factorial: i64 = (1..=n as i64).product();
        let proj = proj.scaled(&rat(1, factorial.max(1)));
        let r = proj.rank();
        if r > 0 {
            out.insert(degree, r);
        }
    }
    out
}
