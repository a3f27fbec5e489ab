//! Component model for extension classes between direct-sum objects on the
//! n-fold product: a class is a table of components indexed by the active
//! source and target summand, each component a combination of n-fold
//! decomposable tensors of surface ext labels. Composition is slotwise
//! through the context's structure constants with the Künneth sign, and
//! the symmetric group acts by permuting slots (with Koszul signs) and
//! relabeling components. This is the brute-force engine the closed
//! product formulas are checked against, and its invariant dimensions are
//! the counting oracle for the closed dimension formulas.

use crate::context::{ContextError, SurfaceContext};
use crate::graded::{koszul_sign, GradedError, GradedSpace};
use crate::linalg::{rati, Rat};
use crate::signs::Permutation;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquivariantError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error("models do not match: {0}")]
    ModelMismatch(String),
    #[error("malformed class term: {0}")]
    BadTerm(String),
}

/// One side of a morphism model: either the direct-sum model of a twisted
/// tautological object (an active slot carries the object symbol, the rest
/// carry the line symbol) or the single-component model of a determinant
/// line bundle (every slot carries the line symbol).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Taut { obj: String, line: String },
    Det { line: String },
}

impl Side {
    pub fn is_taut(&self) -> bool {
        matches!(self, Side::Taut { .. })
    }

    pub fn line(&self) -> &str {
        match self {
            Side::Taut { line, .. } => line,
            Side::Det { line } => line,
        }
    }

    /// Symbol carried by `slot` when the active index is `active`.
    fn slot_symbol(&self, slot: usize, active: Option<usize>) -> &str {
        match self {
            Side::Taut { obj, line } => {
                if Some(slot) == active {
                    obj
                } else {
                    line
                }
            }
            Side::Det { line } => line,
        }
    }

    /// Valid active indices: `1..=n` for a tautological side, none for a
    /// determinant side.
    fn actives(&self, n: usize) -> Vec<Option<usize>> {
        match self {
            Side::Taut { .. } => (1..=n).map(Some).collect(),
            Side::Det { .. } => vec![None],
        }
    }
}

/// The shape of an equivariant morphism space between two side models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqModel {
    pub n: usize,
    pub src: Side,
    pub tgt: Side,
}

pub type Component = (Option<usize>, Option<usize>);

impl EqModel {
    pub fn new(n: usize, src: Side, tgt: Side) -> Self {
        EqModel { n, src, tgt }
    }

    pub fn components(&self) -> Vec<Component> {
        let mut out = Vec::new();
        for i in self.src.actives(self.n) {
            for j in self.tgt.actives(self.n) {
                out.push((i, j));
            }
        }
        out
    }

    /// Ordered pair of symbols for `slot` inside `comp`.
    pub fn slot_pair(&self, comp: Component, slot: usize) -> (&str, &str) {
        (
            self.src.slot_symbol(slot, comp.0),
            self.tgt.slot_symbol(slot, comp.1),
        )
    }

    pub fn slot_space<'c>(
        &self,
        ctx: &'c SurfaceContext,
        comp: Component,
        slot: usize,
    ) -> Result<&'c GradedSpace, EquivariantError> {
        let (a, b) = self.slot_pair(comp, slot);
        Ok(ctx.ext(a, b)?)
    }

    pub fn degrees_of(
        &self,
        ctx: &SurfaceContext,
        comp: Component,
        labels: &[String],
    ) -> Result<Vec<i64>, EquivariantError> {
        let mut out = Vec::with_capacity(labels.len());
        for (slot, label) in labels.iter().enumerate() {
            out.push(self.slot_space(ctx, comp, slot + 1)?.degree_of(label)?);
        }
        Ok(out)
    }
}

/// A class in the component model: per component, a combination of ordered
/// n-tuples of slot labels with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqClass {
    pub model: EqModel,
    pub terms: BTreeMap<(Component, Vec<String>), Rat>,
}

impl EqClass {
    pub fn zero(model: EqModel) -> Self {
        EqClass {
            model,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, comp: Component, labels: Vec<String>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let key = (comp, labels);
        let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &EqClass) -> EqClass {
        assert_eq!(self.model, other.model);
        let mut out = self.clone();
        for ((comp, labels), c) in &other.terms {
            out.add_term(*comp, labels.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Rat) -> EqClass {
        let mut out = EqClass::zero(self.model.clone());
        for ((comp, labels), v) in &self.terms {
            out.add_term(*comp, labels.clone(), v * c);
        }
        out
    }

    /// Validates every term against the model's slot spaces.
    pub fn validate(&self, ctx: &SurfaceContext) -> Result<(), EquivariantError> {
        for (comp, labels) in self.terms.keys() {
            if labels.len() != self.model.n {
                return Err(EquivariantError::BadTerm(format!(
                    "tuple length {} != n = {}",
                    labels.len(),
                    self.model.n
                )));
            }
            self.model.degrees_of(ctx, *comp, labels)?;
        }
        Ok(())
    }

    /// The signed action of a permutation: components relabel along σ and
    /// slot entries move so that slot σ(m) receives the entry of slot m,
    /// with the Koszul sign of the slot permutation.
    pub fn apply_permutation(
        &self,
        ctx: &SurfaceContext,
        sigma: &Permutation,
    ) -> Result<EqClass, EquivariantError> {
        let n = self.model.n;
        let inv = sigma.inverse();
        let mut out = EqClass::zero(self.model.clone());
        for ((comp, labels), coeff) in &self.terms {
            let degrees = self.model.degrees_of(ctx, *comp, labels)?;
            let sign = koszul_sign(sigma, &degrees)?;
            let new_comp = (
                comp.0.map(|i| sigma.apply(i)),
                comp.1.map(|j| sigma.apply(j)),
            );
            let new_labels: Vec<String> = (1..=n)
                .map(|slot| labels[inv.apply(slot) - 1].clone())
                .collect();
            out.add_term(new_comp, new_labels, rati(sign) * coeff);
        }
        Ok(out)
    }

    /// Common degree of all terms, `None` when inhomogeneous or zero.
    pub fn degree(&self, ctx: &SurfaceContext) -> Result<Option<i64>, EquivariantError> {
        let mut degree = None;
        for (comp, labels) in self.terms.keys() {
            let d: i64 = self.model.degrees_of(ctx, *comp, labels)?.iter().sum();
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return Ok(None),
                _ => {}
            }
        }
        Ok(degree)
    }
}

/// Composition of component classes: `outer ∘ inner`, matching the inner
/// target side against the outer source side. Components compose when the
/// mid indices agree; slots compose through the context tables with the
/// Künneth sign of the two degree tuples.
pub fn compose(
    ctx: &SurfaceContext,
    outer: &EqClass,
    inner: &EqClass,
) -> Result<EqClass, EquivariantError> {
    if inner.model.tgt != outer.model.src || inner.model.n != outer.model.n {
        return Err(EquivariantError::ModelMismatch(format!(
            "inner target {:?} (n={}) vs outer source {:?} (n={})",
            inner.model.tgt, inner.model.n, outer.model.src, outer.model.n
        )));
    }
    let n = inner.model.n;
    let model = EqModel::new(n, inner.model.src.clone(), outer.model.tgt.clone());
    let mut out = EqClass::zero(model);
    for (((i, j_in), in_labels), c_in) in &inner.terms {
        let in_degs = inner.model.degrees_of(ctx, (*i, *j_in), in_labels)?;
        for (((j_out, k), out_labels), c_out) in &outer.terms {
            if j_in != j_out {
                continue;
            }
            let out_degs = outer.model.degrees_of(ctx, (*j_out, *k), out_labels)?;
            let sign = crate::yoneda::kunneth_compose_sign(&in_degs, &out_degs)
                .expect("equal lengths by construction");
            // slotwise composition, expanded multilinearly
            let mut partial: Vec<(Vec<String>, Rat)> =
                vec![(Vec::new(), rati(sign) * c_in * c_out)];
            for slot in 1..=n {
                let (a, b) = inner.model.slot_pair((*i, *j_in), slot);
                let (b2, c) = outer.model.slot_pair((*j_out, *k), slot);
                debug_assert_eq!(b, b2, "mid symbols must agree");
                let product = ctx.compose(a, b, c, &out_labels[slot - 1], &in_labels[slot - 1])?;
                if product.is_zero() {
                    partial.clear();
                    break;
                }
                let mut next = Vec::new();
                for (labels, coeff) in &partial {
                    for (label, pc) in product.terms() {
                        let mut l2 = labels.clone();
                        l2.push(label.to_string());
                        next.push((l2, coeff * pc));
                    }
                }
                partial = next;
            }
            for (labels, coeff) in partial {
                out.add_term((*i, *k), labels, coeff);
            }
        }
    }
    Ok(out)
}

/// Per-degree dimension of the invariants of the whole component model
/// under the signed symmetric-group action, counted by orbits of basis
/// tensors: an orbit contributes one invariant unless some group element
/// returns to the starting tensor with a flipped sign.
pub fn invariant_dims_by_degree(
    ctx: &SurfaceContext,
    model: &EqModel,
) -> Result<BTreeMap<i64, usize>, EquivariantError> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    struct BasisElem {
        comp: Component,
        tuple: Vec<usize>,
    }

    let n = model.n;
    assert!(n < 256, "orbit encoding packs indices into bytes");
    let mut basis: Vec<(BasisElem, i64)> = Vec::new();
    for comp in model.components() {
        let spaces: Vec<&GradedSpace> = (1..=n)
            .map(|s| model.slot_space(ctx, comp, s))
            .collect::<Result<_, _>>()?;
        assert!(
            spaces.iter().all(|sp| sp.dim() < 256),
            "orbit encoding packs basis indices into bytes"
        );
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for sp in &spaces {
            let mut next = Vec::new();
            for t in &tuples {
                for i in 0..sp.dim() {
                    let mut t2 = t.clone();
                    t2.push(i);
                    next.push(t2);
                }
            }
            tuples = next;
        }
        for t in tuples {
            let degree: i64 = t.iter().zip(&spaces).map(|(&i, sp)| sp.degree(i)).sum();
            basis.push((BasisElem { comp, tuple: t }, degree));
        }
    }

    // signed action of the adjacent transposition (k, k+1) on a basis elem
    let apply_gen = |elem: &BasisElem, k: usize| -> Result<(BasisElem, i64), EquivariantError> {
        let comp = elem.comp;
        let swap = |x: Option<usize>| {
            x.map(|v| {
                if v == k {
                    k + 1
                } else if v == k + 1 {
                    k
                } else {
                    v
                }
            })
        };
        let new_comp = (swap(comp.0), swap(comp.1));
        let mut tuple = elem.tuple.clone();
        tuple.swap(k - 1, k);
        let d1 = model.slot_space(ctx, comp, k)?.degree(elem.tuple[k - 1]);
        let d2 = model.slot_space(ctx, comp, k + 1)?.degree(elem.tuple[k]);
        let sign = if d1 % 2 != 0 && d2 % 2 != 0 { -1 } else { 1 };
        Ok((
            BasisElem {
                comp: new_comp,
                tuple,
            },
            sign,
        ))
    };

    let encode = |e: &BasisElem| -> Vec<u8> {
        let mut v = Vec::new();
        v.push(e.comp.0.map_or(0, |x| x as u8));
        v.push(e.comp.1.map_or(0, |x| x as u8));
        v.extend(e.tuple.iter().map(|&x| x as u8));
        v
    };

    let mut seen: BTreeMap<Vec<u8>, ()> = BTreeMap::new();
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    for (start, degree) in &basis {
        if seen.contains_key(&encode(start)) {
            continue;
        }
        // BFS with sign tracking relative to the orbit root
        let mut signs: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
        let mut queue: Vec<(BasisElem, i64)> = vec![(start.clone(), 1)];
        signs.insert(encode(start), 1);
        let mut alive = true;
        while let Some((elem, sign)) = queue.pop() {
            for k in 1..n {
                let (next, s) = apply_gen(&elem, k)?;
                let key = encode(&next);
                let next_sign = sign * s;
                match signs.get(&key) {
                    Some(&prev) => {
                        if prev != next_sign {
                            alive = false;
                        }
                    }
                    None => {
                        signs.insert(key, next_sign);
                        queue.push((next, next_sign));
                    }
                }
            }
        }
        for key in signs.keys() {
            seen.insert(key.clone(), ());
        }
        if alive {
            *dims.entry(*degree).or_insert(0) += 1;
        }
    }
    dims.retain(|_, v| *v > 0);
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedSpace;

    fn ctx_with(pairs: &[(&str, &str, &[i64])]) -> SurfaceContext {
        let mut ctx = SurfaceContext::new();
        for (i, (a, b, degs)) in pairs.iter().enumerate() {
            ctx.set_ext(a, b, GradedSpace::with_degrees(&format!("q{i}_"), degs));
        }
        ctx.validate().unwrap();
        ctx
    }

    #[test]
    fn taut_taut_component_count() {
        let model = EqModel::new(
            3,
            Side::Taut {
                obj: "E".into(),
                line: "L".into(),
            },
            Side::Taut {
                obj: "F".into(),
                line: "M".into(),
            },
        );
        assert_eq!(model.components().len(), 9);
        let det = EqModel::new(
            3,
            Side::Det { line: "L".into() },
            Side::Det { line: "M".into() },
        );
        assert_eq!(det.components(), vec![(None, None)]);
    }

    #[test]
    fn slot_symbols_follow_active_indices() {
        let model = EqModel::new(
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
        assert_eq!(model.slot_pair((Some(1), Some(2)), 1), ("E", "M"));
        assert_eq!(model.slot_pair((Some(1), Some(2)), 2), ("L", "F"));
        assert_eq!(model.slot_pair((Some(1), Some(1)), 1), ("E", "F"));
        assert_eq!(model.slot_pair((Some(1), Some(1)), 2), ("L", "M"));
    }

    #[test]
    fn invariant_count_trivial_case() {
        // all four spaces one-dimensional in degree 0, n = 2: the diagonal
        // and off-diagonal orbits each contribute one invariant
        let ctx = ctx_with(&[
            ("E", "F", &[0]),
            ("E", "M", &[0]),
            ("L", "F", &[0]),
            ("L", "M", &[0]),
        ]);
        let model = EqModel::new(
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
        let dims = invariant_dims_by_degree(&ctx, &model).unwrap();
        assert_eq!(dims, [(0, 2)].into_iter().collect());
    }

    /// Independent matrix route for the invariant count: assemble the
    /// signed permutation action per degree slice and take the joint
    /// fixed space of the generators.
    fn invariant_dims_by_matrices(
        ctx: &SurfaceContext,
        model: &EqModel,
    ) -> std::collections::BTreeMap<i64, usize> {
        use crate::linalg::{rati, Matrix};
        let n = model.n;
        // basis with degrees
        let mut basis: Vec<(Component, Vec<usize>, i64)> = Vec::new();
        for comp in model.components() {
            let spaces: Vec<&GradedSpace> = (1..=n)
                .map(|s| model.slot_space(ctx, comp, s).unwrap())
                .collect();
            let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
            for sp in &spaces {
                let mut next = Vec::new();
                for t in &tuples {
                    for i in 0..sp.dim() {
                        let mut t2 = t.clone();
                        t2.push(i);
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            for t in tuples {
                let d: i64 = t.iter().zip(&spaces).map(|(&i, sp)| sp.degree(i)).sum();
                basis.push((comp, t, d));
            }
        }
        let mut degrees: Vec<i64> = basis.iter().map(|(_, _, d)| *d).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let mut out = std::collections::BTreeMap::new();
        for degree in degrees {
            let block: Vec<(Component, Vec<usize>)> = basis
                .iter()
                .filter(|(_, _, d)| *d == degree)
                .map(|(c, t, _)| (*c, t.clone()))
                .collect();
            let index_of = |c: &Component, t: &[usize]| {
                block
                    .iter()
                    .position(|(bc, bt)| bc == c && bt == t)
                    .unwrap()
            };
            let mut stacked: Vec<Matrix> = Vec::new();
            for k in 1..n {
                let mut m = Matrix::zeros(block.len(), block.len());
                for (col, (comp, tuple)) in block.iter().enumerate() {
                    let swap = |x: Option<usize>| {
                        x.map(|v| {
                            if v == k {
                                k + 1
                            } else if v == k + 1 {
                                k
                            } else {
                                v
                            }
                        })
                    };
                    let new_comp = (swap(comp.0), swap(comp.1));
                    let mut new_tuple = tuple.clone();
                    new_tuple.swap(k - 1, k);
                    let d1 = model
                        .slot_space(ctx, *comp, k)
                        .unwrap()
                        .degree(tuple[k - 1]);
                    let d2 = model
                        .slot_space(ctx, *comp, k + 1)
                        .unwrap()
                        .degree(tuple[k]);
                    let sign = if d1 % 2 != 0 && d2 % 2 != 0 { -1 } else { 1 };
                    let row = index_of(&new_comp, &new_tuple);
                    m.set(row, col, rati(sign));
                }
                stacked.push(m.sub(&Matrix::identity(block.len())));
            }
            let dim = if stacked.is_empty() {
                block.len()
            } else {
                Matrix::vstack(&stacked).kernel_basis().len()
            };
            if dim > 0 {
                out.insert(degree, dim);
            }
        }
        out
    }

    #[test]
    fn orbit_count_matches_matrix_kernel_count() {
        let ctx = ctx_with(&[
            ("E", "F", &[0, 1]),
            ("E", "M", &[1]),
            ("L", "F", &[0, 2]),
            ("L", "M", &[0, 1]),
        ]);
        for n in 2..=3usize {
            let model = EqModel::new(
                n,
                Side::Taut {
                    obj: "E".into(),
                    line: "L".into(),
                },
                Side::Taut {
                    obj: "F".into(),
                    line: "M".into(),
                },
            );
            assert_eq!(
                invariant_dims_by_degree(&ctx, &model).unwrap(),
                invariant_dims_by_matrices(&ctx, &model),
                "n={n}"
            );
        }
        let det = EqModel::new(
            3,
            Side::Det { line: "L".into() },
            Side::Det { line: "M".into() },
        );
        assert_eq!(
            invariant_dims_by_degree(&ctx, &det).unwrap(),
            invariant_dims_by_matrices(&ctx, &det)
        );
    }

    #[test]
    fn invariant_count_matches_symmetric_power_for_det_det() {
        // the determinant-to-determinant model is the signed tensor power
        let ctx = ctx_with(&[("L", "M", &[0, 1, 2])]);
        for n in 1..=3usize {
            let model = EqModel::new(
                n,
                Side::Det { line: "L".into() },
                Side::Det { line: "M".into() },
            );
            let dims = invariant_dims_by_degree(&ctx, &model).unwrap();
            let sym = crate::graded::sym_power(ctx.ext("L", "M").unwrap(), n);
            assert_eq!(dims, sym.dims(), "n={n}");
        }
    }
}
