//! Closed formulas for extension groups and cohomology on the Hilbert
//! scheme of n points, evaluated over a surface context: graded dimensions
//! with explicitly labeled bases for every pairing of twisted tautological
//! objects and determinant line bundles, the degree-zero partition-sum
//! formulas for homomorphisms out of tensor products of tautological
//! bundles, and the spherical/projective-space pattern report for
//! self-extensions.
//!
//! Every operation has two routes: an explicit labeled basis and a pure
//! Poincaré-polynomial computation whose symmetric powers come from the
//! generating-function expansion. Tests hold the two routes equal.

use crate::context::{ContextError, SurfaceContext};
use crate::graded::{sym_power, sym_power_poincare, GradedSpace, Poincare, SymPowerSpace};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalcError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("n must be at least {min} for this formula, got {n}")]
    NTooSmall { n: usize, min: usize },
    #[error("no tensor factors given")]
    NoFactors,
}

/// The two-summand space of extension classes between twisted tautological
/// objects: `ext(EL,FM) ⊗ S^{n-1} ext(L,M)` plus
/// `ext(EL,M) ⊗ ext(L,FM) ⊗ S^{n-2} ext(L,M)`.
///
/// Basis entries carry the summand and the slot indices; multisets are
/// stored sorted by basis position in `ext(L,M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSpace {
    pub n: usize,
    pub el: String,
    pub l: String,
    pub fm: String,
    pub m: String,
    /// ext(EL, FM)
    pub phi_space: GradedSpace,
    /// ext(EL, M)
    pub eta_space: GradedSpace,
    /// ext(L, FM)
    pub x_space: GradedSpace,
    /// ext(L, M)
    pub s_space: GradedSpace,
    pub type1: Vec<(usize, Vec<usize>)>,
    pub type2: Vec<(usize, usize, Vec<usize>)>,
}

impl PSpace {
    pub fn type1_degree(&self, phi: usize, s: &[usize]) -> i64 {
        self.phi_space.degree(phi) + s.iter().map(|&i| self.s_space.degree(i)).sum::<i64>()
    }

    pub fn type2_degree(&self, eta: usize, x: usize, t: &[usize]) -> i64 {
        self.eta_space.degree(eta)
            + self.x_space.degree(x)
            + t.iter().map(|&i| self.s_space.degree(i)).sum::<i64>()
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        let mut dims = BTreeMap::new();
        for (phi, s) in &self.type1 {
            *dims.entry(self.type1_degree(*phi, s)).or_insert(0) += 1;
        }
        for (eta, x, t) in &self.type2 {
            *dims.entry(self.type2_degree(*eta, *x, t)).or_insert(0) += 1;
        }
        dims
    }

    pub fn poincare(&self) -> Poincare {
        Poincare::from_dims(&self.dims())
    }

    pub fn total_dim(&self) -> usize {
        self.type1.len() + self.type2.len()
    }

    fn multiset_label(&self, ms: &[usize]) -> String {
        format!(
            "{{{}}}",
            ms.iter()
                .map(|&i| self.s_space.label(i).to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }

    /// One line per basis element: `degree | summand | slot labels`.
    pub fn basis_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for (phi, s) in &self.type1 {
            lines.push(format!(
                "{} | 1 | {} ; {}",
                self.type1_degree(*phi, s),
                self.phi_space.label(*phi),
                self.multiset_label(s)
            ));
        }
        for (eta, x, t) in &self.type2 {
            lines.push(format!(
                "{} | 2 | {} ; {} ; {}",
                self.type2_degree(*eta, *x, t),
                self.eta_space.label(*eta),
                self.x_space.label(*x),
                self.multiset_label(t)
            ));
        }
        lines
    }
}

/// Ext between two twisted tautological objects, as a labeled `PSpace`.
pub fn ext_taut_taut(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    fm: &str,
    m: &str,
    n: usize,
) -> Result<PSpace, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    let phi_space = ctx.ext(el, fm)?.clone();
    let eta_space = ctx.ext(el, m)?.clone();
    let x_space = ctx.ext(l, fm)?.clone();
    let s_space = ctx.ext(l, m)?.clone();

    let sym1 = sym_power(&s_space, n - 1);
    let sym2 = sym_power(&s_space, n - 2);

    let mut type1 = Vec::new();
    for phi in 0..phi_space.dim() {
        for ms in sym1.basis() {
            type1.push((phi, ms.clone()));
        }
    }
    let mut type2 = Vec::new();
    for eta in 0..eta_space.dim() {
        for x in 0..x_space.dim() {
            for ms in sym2.basis() {
                type2.push((eta, x, ms.clone()));
            }
        }
    }
    Ok(PSpace {
        n,
        el: el.to_string(),
        l: l.to_string(),
        fm: fm.to_string(),
        m: m.to_string(),
        phi_space,
        eta_space,
        x_space,
        s_space,
        type1,
        type2,
    })
}

/// Poincaré polynomial of `ext_taut_taut` by pure polynomial arithmetic.
pub fn ext_taut_taut_poincare(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    fm: &str,
    m: &str,
    n: usize,
) -> Result<Poincare, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    let s = ctx.ext(l, m)?;
    let first = ctx
        .ext(el, fm)?
        .poincare()
        .mul(&sym_power_poincare(s, n - 1));
    let second = ctx
        .ext(el, m)?
        .poincare()
        .mul(&ctx.ext(l, fm)?.poincare())
        .mul(&sym_power_poincare(s, n - 2));
    Ok(first.add(&second))
}

fn tensor_with_sym(head: &GradedSpace, sym: &SymPowerSpace) -> GradedSpace {
    let mut basis = Vec::new();
    for (label, degree) in head.basis() {
        for ms in sym.basis() {
            basis.push((
                format!("{label}⊗{}", sym.label_of(ms)),
                degree + sym.degree_of(ms),
            ));
        }
    }
    GradedSpace::new(basis).expect("composite labels are distinct")
}

/// Ext from a twisted tautological object to a determinant line bundle:
/// `ext(EL,M) ⊗ S^{n-1} ext(L,M)`.
pub fn ext_taut_det(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    m: &str,
    n: usize,
) -> Result<GradedSpace, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    let head = ctx.ext(el, m)?;
    let sym = sym_power(ctx.ext(l, m)?, n - 1);
    Ok(tensor_with_sym(head, &sym))
}

pub fn ext_taut_det_poincare(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    m: &str,
    n: usize,
) -> Result<Poincare, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    Ok(ctx
        .ext(el, m)?
        .poincare()
        .mul(&sym_power_poincare(ctx.ext(l, m)?, n - 1)))
}

/// Ext from a determinant line bundle to a twisted tautological object:
/// `ext(L,FM) ⊗ S^{n-1} ext(L,M)`.
pub fn ext_det_taut(
    ctx: &SurfaceContext,
    l: &str,
    fm: &str,
    m: &str,
    n: usize,
) -> Result<GradedSpace, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    let head = ctx.ext(l, fm)?;
    let sym = sym_power(ctx.ext(l, m)?, n - 1);
    Ok(tensor_with_sym(head, &sym))
}

pub fn ext_det_taut_poincare(
    ctx: &SurfaceContext,
    l: &str,
    fm: &str,
    m: &str,
    n: usize,
) -> Result<Poincare, CalcError> {
    if n < 2 {
        return Err(CalcError::NTooSmall { n, min: 2 });
    }
    Ok(ctx
        .ext(l, fm)?
        .poincare()
        .mul(&sym_power_poincare(ctx.ext(l, m)?, n - 1)))
}

/// Ext between two determinant line bundles: `S^n ext(L,M)`.
pub fn ext_det_det(
    ctx: &SurfaceContext,
    l: &str,
    m: &str,
    n: usize,
) -> Result<GradedSpace, CalcError> {
    if n < 1 {
        return Err(CalcError::NTooSmall { n, min: 1 });
    }
    let sym = sym_power(ctx.ext(l, m)?, n);
    let basis = sym
        .basis()
        .iter()
        .map(|ms| (sym.label_of(ms), sym.degree_of(ms)))
        .collect();
    Ok(GradedSpace::new(basis).expect("multiset labels are distinct"))
}

pub fn ext_det_det_poincare(
    ctx: &SurfaceContext,
    l: &str,
    m: &str,
    n: usize,
) -> Result<Poincare, CalcError> {
    if n < 1 {
        return Err(CalcError::NTooSmall { n, min: 1 });
    }
    Ok(sym_power_poincare(ctx.ext(l, m)?, n))
}

/// Cohomology of a twisted tautological object,
/// `H*(EL) ⊗ S^{n-1} H*(L)` with `H*(A) = ext(O, A)` for the declared
/// structure-sheaf symbol `o`.
pub fn cohomology_taut(
    ctx: &SurfaceContext,
    o: &str,
    el: &str,
    l: &str,
    n: usize,
) -> Result<GradedSpace, CalcError> {
    ext_det_taut(ctx, o, el, l, n)
}

pub fn cohomology_taut_poincare(
    ctx: &SurfaceContext,
    o: &str,
    el: &str,
    l: &str,
    n: usize,
) -> Result<Poincare, CalcError> {
    ext_det_taut_poincare(ctx, o, el, l, n)
}

/// Target of the degree-zero homomorphism formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomTarget {
    /// The structure sheaf of the Hilbert scheme.
    Structure,
    /// A tautological sheaf induced by the named surface object.
    Taut(String),
}

/// Name of the composite symbol `⊗_{i in set} factors[i]`; the empty set
/// is the structure-sheaf symbol. Composites of two or more factors join
/// the factor names with `*` in index order and must be declared in the
/// context by the caller.
pub fn composite_symbol(factors: &[&str], set: &[usize], o: &str) -> String {
    match set.len() {
        0 => o.to_string(),
        1 => factors[set[0]].to_string(),
        _ => set
            .iter()
            .map(|&i| factors[i])
            .collect::<Vec<_>>()
            .join("*"),
    }
}

/// All set partitions of `items`.
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let rest = &items[1..];
    let mut out = Vec::new();
    for mut partition in set_partitions(rest) {
        for b in 0..partition.len() {
            let mut with = partition.clone();
            with[b].insert(0, first);
            out.push(with);
        }
        partition.insert(0, vec![first]);
        out.push(partition);
    }
    out
}

fn degree_zero_dim(space: &GradedSpace) -> usize {
    space.dim_in_degree(0)
}

fn degree_zero_labels(space: &GradedSpace) -> Vec<String> {
    space
        .basis()
        .iter()
        .filter(|(_, d)| *d == 0)
        .map(|(l, _)| l.clone())
        .collect()
}

/// Degree-zero homomorphisms out of a tensor product of tautological
/// bundles, as a partition sum with labeled basis. The context must
/// declare degree-zero Hom data for every needed composite symbol:
/// `ext(composite, o)` for the duals, `ext(composite, F)` for a
/// tautological target, and `ext(o, o)` for the symmetric-power factor.
/// For a tautological target the marked subset may be empty, in which case
/// its head factor is `ext(o, F)`.
pub fn hom_tensor_taut(
    ctx: &SurfaceContext,
    o: &str,
    factors: &[&str],
    target: &HomTarget,
    n: usize,
) -> Result<GradedSpace, CalcError> {
    if factors.is_empty() {
        return Err(CalcError::NoFactors);
    }
    if n < 1 {
        return Err(CalcError::NTooSmall { n, min: 1 });
    }
    let k = factors.len();
    let h0_o = GradedSpace::new(
        degree_zero_labels(ctx.ext(o, o)?)
            .into_iter()
            .map(|l| (l, 0))
            .collect(),
    )
    .expect("sub-basis labels distinct");
    let mut basis: Vec<(String, i64)> = Vec::new();

    let mut push_term = |tag: String,
                         blocks: &[Vec<usize>],
                         head_labels: &[String],
                         sym_budget: usize|
     -> Result<(), CalcError> {
        let mut block_label_sets: Vec<Vec<String>> = Vec::new();
        for block in blocks {
            let sym = composite_symbol(factors, block, o);
            block_label_sets.push(degree_zero_labels(ctx.ext(&sym, o)?));
        }
        let sym_space = sym_power(&h0_o, sym_budget);
        let mut combos: Vec<Vec<String>> = vec![Vec::new()];
        for set in &block_label_sets {
            let mut next = Vec::new();
            for combo in &combos {
                for label in set {
                    let mut c = combo.clone();
                    c.push(label.clone());
                    next.push(c);
                }
            }
            combos = next;
        }
        for head in head_labels {
            for combo in &combos {
                for ms in sym_space.basis() {
                    let mut parts = Vec::new();
                    if !head.is_empty() {
                        parts.push(head.clone());
                    }
                    parts.extend(combo.iter().cloned());
                    parts.push(sym_space.label_of(ms));
                    basis.push((format!("{tag}:{}", parts.join("⊗")), 0));
                }
            }
        }
        Ok(())
    };

    let items: Vec<usize> = (0..k).collect();
    match target {
        HomTarget::Structure => {
            for partition in set_partitions(&items) {
                let ell = partition.len();
                if ell > n {
                    continue;
                }
                let tag = partition_tag(None, &partition);
                push_term(tag, &partition, &[String::new()], n - ell)?;
            }
        }
        HomTarget::Taut(f) => {
            for marked in subsets_of(&items) {
                let complement: Vec<usize> = items
                    .iter()
                    .copied()
                    .filter(|i| !marked.contains(i))
                    .collect();
                for partition in set_partitions(&complement) {
                    let ell = partition.len();
                    if ell + 1 > n {
                        continue;
                    }
                    let head_sym = composite_symbol(factors, &marked, o);
                    let heads = degree_zero_labels(ctx.ext(&head_sym, f)?);
                    let tag = partition_tag(Some(&marked), &partition);
                    push_term(tag, &partition, &heads, n - ell - 1)?;
                }
            }
        }
    }
    Ok(GradedSpace::new(basis).expect("tags make labels distinct"))
}

fn subsets_of(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &i in items {
        let mut next = Vec::new();
        for s in &out {
            next.push(s.clone());
            let mut with = s.clone();
            with.push(i);
            next.push(with);
        }
        out = next;
    }
    out
}

fn partition_tag(marked: Option<&[usize]>, blocks: &[Vec<usize>]) -> String {
    let mut blocks: Vec<String> = blocks
        .iter()
        .map(|b| {
            b.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join("")
        })
        .collect();
    blocks.sort();
    let body = blocks.iter().map(|b| format!("({b})")).collect::<String>();
    match marked {
        Some(m) => {
            let mstr = m
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join("");
            format!("M({mstr}){body}")
        }
        None => body,
    }
}

/// Dimension-only route of `hom_tensor_taut` (partition sum over products
/// of degree-zero dimensions).
pub fn hom_tensor_taut_dim(
    ctx: &SurfaceContext,
    o: &str,
    factors: &[&str],
    target: &HomTarget,
    n: usize,
) -> Result<usize, CalcError> {
    if factors.is_empty() {
        return Err(CalcError::NoFactors);
    }
    if n < 1 {
        return Err(CalcError::NTooSmall { n, min: 1 });
    }
    let k = factors.len();
    let h0o = degree_zero_dim(ctx.ext(o, o)?);
    // dim S^b of a space concentrated in degree zero
    let sym_dim = |budget: usize| crate::linalg::binomial(h0o + budget.saturating_sub(1), budget);
    let items: Vec<usize> = (0..k).collect();
    let mut total = 0usize;
    match target {
        HomTarget::Structure => {
            for partition in set_partitions(&items) {
                let ell = partition.len();
                if ell > n {
                    continue;
                }
                let mut product = 1usize;
                for block in &partition {
                    product *= degree_zero_dim(ctx.ext(&composite_symbol(factors, block, o), o)?);
                }
                total += product * sym_dim(n - ell);
            }
        }
        HomTarget::Taut(f) => {
            for marked in subsets_of(&items) {
                let complement: Vec<usize> = items
                    .iter()
                    .copied()
                    .filter(|i| !marked.contains(i))
                    .collect();
                for partition in set_partitions(&complement) {
                    let ell = partition.len();
                    if ell + 1 > n {
                        continue;
                    }
                    let mut product =
                        degree_zero_dim(ctx.ext(&composite_symbol(factors, &marked, o), f)?);
                    for block in &partition {
                        product *=
                            degree_zero_dim(ctx.ext(&composite_symbol(factors, block, o), o)?);
                    }
                    total += product * sym_dim(n - ell - 1);
                }
            }
        }
    }
    Ok(total)
}

/// Declared hypotheses under which the self-extension pattern report is a
/// guarantee: trivial-canonical cohomology of the structure sheaf and
/// nonvanishing boundary self-exts. These are assertions by the caller,
/// not derivable from dimension data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SerreFlags {
    /// h^0(O) = h^2(O) = 1 holds on the surface.
    pub structure_h0_h2_one: bool,
    /// Ext^0 and Ext^2 of the twisted object with itself are nonzero.
    pub self_ext_0_2_nonzero: bool,
}

impl SerreFlags {
    pub fn all(&self) -> bool {
        self.structure_h0_h2_one && self.self_ext_0_2_nonzero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfExtPattern {
    Spherical,
    ProjectiveSpace,
    Neither,
}

impl std::fmt::Display for SelfExtPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelfExtPattern::Spherical => write!(f, "spherical pattern"),
            SelfExtPattern::ProjectiveSpace => write!(f, "projective-space pattern"),
            SelfExtPattern::Neither => write!(f, "neither"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SphericalReport {
    pub n: usize,
    pub dims: BTreeMap<i64, usize>,
    pub pattern: SelfExtPattern,
    /// Degrees among {2, 4, 2n-2} where the dimension is at least 2.
    pub witnesses: Vec<i64>,
    pub flags: SerreFlags,
    /// The verdict is backed by the declared hypotheses.
    pub guaranteed: bool,
    pub note: Option<String>,
}

/// Computes the self-extension dimensions of a twisted tautological object
/// and classifies them against the sphere and projective-space patterns.
pub fn spherical_report(
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    n: usize,
    flags: SerreFlags,
) -> Result<SphericalReport, CalcError> {
    let p = ext_taut_taut(ctx, el, l, el, l, n)?;
    let dims = p.dims();
    let top = 2 * n as i64;
    let is_spherical = dims == [(0, 1), (top, 1)].into_iter().collect();
    let is_pn = dims == (0..=n as i64).map(|i| (2 * i, 1)).collect();
    let pattern = if is_spherical {
        SelfExtPattern::Spherical
    } else if is_pn {
        SelfExtPattern::ProjectiveSpace
    } else {
        SelfExtPattern::Neither
    };
    let mut witness_degrees: Vec<i64> = vec![2, 4, top - 2];
    witness_degrees.sort_unstable();
    witness_degrees.dedup();
    let witnesses: Vec<i64> = witness_degrees
        .into_iter()
        .filter(|d| dims.get(d).copied().unwrap_or(0) >= 2)
        .collect();
    let note = if pattern != SelfExtPattern::Neither && flags.all() {
        Some(
            "a sphere or projective-space pattern cannot arise while the declared \
             hypotheses hold; the input data is inconsistent with them"
                .to_string(),
        )
    } else {
        None
    };
    Ok(SphericalReport {
        n,
        dims,
        pattern,
        witnesses,
        guaranteed: flags.all(),
        flags,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::tensor_power_invariants_dims;

    fn space(prefix: &str, degrees: &[i64]) -> GradedSpace {
        GradedSpace::with_degrees(prefix, degrees)
    }

    fn ctx_with(pairs: &[(&str, &str, &[i64])]) -> SurfaceContext {
        let mut ctx = SurfaceContext::new();
        for (i, (a, b, degs)) in pairs.iter().enumerate() {
            ctx.set_ext(a, b, space(&format!("q{i}_"), degs));
        }
        ctx.validate().unwrap();
        ctx
    }

    #[test]
    fn taut_taut_trivial_dims() {
        // all four ext spaces one-dimensional in degree 0, n = 2
        let ctx = ctx_with(&[
            ("E", "F", &[0]),
            ("E", "M", &[0]),
            ("L", "F", &[0]),
            ("L", "M", &[0]),
        ]);
        let p = ext_taut_taut(&ctx, "E", "L", "F", "M", 2).unwrap();
        assert_eq!(p.dims(), [(0, 2)].into_iter().collect());
        assert_eq!(
            p.poincare(),
            ext_taut_taut_poincare(&ctx, "E", "L", "F", "M", 2).unwrap()
        );
        assert!(ext_taut_taut(&ctx, "E", "L", "F", "M", 1).is_err());
    }

    #[test]
    fn taut_taut_zero_line_hom_kills_everything() {
        // ext(L,M) = 0 forces both summands to vanish for n = 3
        let ctx = ctx_with(&[
            ("E", "F", &[0]),
            ("E", "M", &[0]),
            ("L", "F", &[0]),
            ("L", "M", &[]),
        ]);
        let p = ext_taut_taut(&ctx, "E", "L", "F", "M", 3).unwrap();
        assert_eq!(p.total_dim(), 0);
        assert!(p.dims().is_empty());
    }

    #[test]
    fn taut_taut_graded_example() {
        let ctx = ctx_with(&[
            ("E", "F", &[0, 2]),
            ("E", "M", &[0, 2]),
            ("L", "F", &[0, 2]),
            ("L", "M", &[0, 2]),
        ]);
        let p = ext_taut_taut(&ctx, "E", "L", "F", "M", 2).unwrap();
        assert_eq!(p.dims(), [(0, 2), (2, 4), (4, 2)].into_iter().collect());
        assert_eq!(
            ext_taut_taut_poincare(&ctx, "E", "L", "F", "M", 2)
                .unwrap()
                .dims(),
            p.dims()
        );
    }

    #[test]
    fn missing_pair_is_reported() {
        let ctx = ctx_with(&[("E", "F", &[0]), ("E", "M", &[0]), ("L", "F", &[0])]);
        match ext_taut_taut(&ctx, "E", "L", "F", "M", 2) {
            Err(CalcError::Context(ContextError::MissingExt { a, b })) => {
                assert_eq!((a.as_str(), b.as_str()), ("L", "M"));
            }
            other => panic!("expected missing ext(L,M), got {other:?}"),
        }
    }

    #[test]
    fn taut_det_examples() {
        let ctx = ctx_with(&[("E", "M", &[0]), ("L", "M", &[0])]);
        let s = ext_taut_det(&ctx, "E", "L", "M", 4).unwrap();
        assert_eq!(s.dims(), [(0, 1)].into_iter().collect());

        let ctx = ctx_with(&[("E", "M", &[]), ("L", "M", &[0])]);
        let s = ext_taut_det(&ctx, "E", "L", "M", 3).unwrap();
        assert_eq!(s.dim(), 0);

        // odd head with odd line classes: S^2 drops the repeated odd label
        let ctx = ctx_with(&[("E", "M", &[1]), ("L", "M", &[0, 1])]);
        let s = ext_taut_det(&ctx, "E", "L", "M", 3).unwrap();
        assert_eq!(s.dims(), [(1, 1), (2, 1)].into_iter().collect());
        assert_eq!(
            ext_taut_det_poincare(&ctx, "E", "L", "M", 3)
                .unwrap()
                .dims(),
            s.dims()
        );
    }

    #[test]
    fn det_det_examples() {
        let ctx = ctx_with(&[("L", "M", &[0])]);
        for n in 1..=5 {
            assert_eq!(
                ext_det_det(&ctx, "L", "M", n).unwrap().dims(),
                [(0, 1)].into_iter().collect()
            );
        }
        let ctx = ctx_with(&[("L", "M", &[0, 2])]);
        assert_eq!(
            ext_det_det(&ctx, "L", "M", 2).unwrap().dims(),
            [(0, 1), (2, 1), (4, 1)].into_iter().collect()
        );
        // two odd generators: only the mixed monomial survives
        let ctx = ctx_with(&[("L", "M", &[1, 1])]);
        assert_eq!(
            ext_det_det(&ctx, "L", "M", 2).unwrap().dims(),
            [(2, 1)].into_iter().collect()
        );
        // cross-check against the signed-projector oracle
        let s = ctx.ext("L", "M").unwrap();
        assert_eq!(
            ext_det_det(&ctx, "L", "M", 2).unwrap().dims(),
            tensor_power_invariants_dims(s, 2)
        );
    }

    #[test]
    fn negative_degrees_from_duals_are_supported() {
        // a dualized space has negated degrees; the formulas accept them
        let v = GradedSpace::with_degrees("v", &[0, 1, 2]).dual();
        let mut ctx = SurfaceContext::new();
        ctx.set_ext("L", "M", v.clone());
        ctx.validate().unwrap();
        let s = ext_det_det(&ctx, "L", "M", 2).unwrap();
        assert_eq!(s.dims(), tensor_power_invariants_dims(&v, 2));
        assert_eq!(
            ext_det_det_poincare(&ctx, "L", "M", 2).unwrap().dims(),
            s.dims()
        );
        assert_eq!(*s.dims().keys().min().unwrap(), -4);
    }

    #[test]
    fn cohomology_examples() {
        let ctx = ctx_with(&[("O", "EL", &[0, 0]), ("O", "L", &[0])]);
        let s = cohomology_taut(&ctx, "O", "EL", "L", 5).unwrap();
        assert_eq!(s.dims(), [(0, 2)].into_iter().collect());

        // K3-like line data, n = 2: (1 + t^2) * S^1(1 + t^2)
        let ctx = ctx_with(&[("O", "EL", &[0, 2]), ("O", "L", &[0, 2])]);
        let s = cohomology_taut(&ctx, "O", "EL", "L", 2).unwrap();
        assert_eq!(s.dims(), [(0, 1), (2, 2), (4, 1)].into_iter().collect());
        assert_eq!(
            cohomology_taut_poincare(&ctx, "O", "EL", "L", 2)
                .unwrap()
                .dims(),
            s.dims()
        );

        // H*(L) = 0 kills everything for n >= 2
        let ctx = ctx_with(&[("O", "EL", &[0, 2]), ("O", "L", &[])]);
        let s = cohomology_taut(&ctx, "O", "EL", "L", 2).unwrap();
        assert_eq!(s.dim(), 0);
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        for (k, bell) in [(0usize, 1usize), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let items: Vec<usize> = (0..k).collect();
            assert_eq!(set_partitions(&items).len(), bell);
        }
    }

    #[test]
    fn hom_tensor_single_factor_matches_taut_det_degree_zero() {
        let ctx = ctx_with(&[("E1", "O", &[0]), ("O", "O", &[0])]);
        let s = hom_tensor_taut(&ctx, "O", &["E1"], &HomTarget::Structure, 3).unwrap();
        // H0(E1 dual) * dim S^{n-1} H0(O) = 1
        assert_eq!(s.dims(), [(0, 1)].into_iter().collect());
        assert_eq!(
            hom_tensor_taut_dim(&ctx, "O", &["E1"], &HomTarget::Structure, 3).unwrap(),
            1
        );
    }

    #[test]
    fn hom_tensor_structure_target_two_factors() {
        // k=2, n=2, all supplied H0's one-dimensional: partitions {{1,2}}
        // and {{1},{2}} contribute 1 + 1 = 2
        let ctx = ctx_with(&[
            ("E1", "O", &[0]),
            ("E2", "O", &[0]),
            ("E1*E2", "O", &[0]),
            ("O", "O", &[0]),
        ]);
        assert_eq!(
            hom_tensor_taut_dim(&ctx, "O", &["E1", "E2"], &HomTarget::Structure, 2).unwrap(),
            2
        );
        let s = hom_tensor_taut(&ctx, "O", &["E1", "E2"], &HomTarget::Structure, 2).unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn hom_tensor_taut_target_two_factors() {
        // k=2, n=2, every degree-zero space one-dimensional. Admissible
        // combos: M={1,2} (ell=0), M={1} I={{2}}, M={2} I={{1}}, and
        // M=∅ I={{1,2}} (single block, ell=1 <= n-1). Total 4.
        let ctx = ctx_with(&[
            ("E1", "O", &[0]),
            ("E2", "O", &[0]),
            ("E1*E2", "O", &[0]),
            ("E1", "F", &[0]),
            ("E2", "F", &[0]),
            ("E1*E2", "F", &[0]),
            ("O", "F", &[0]),
            ("O", "O", &[0]),
        ]);
        let target = HomTarget::Taut("F".into());
        assert_eq!(
            hom_tensor_taut_dim(&ctx, "O", &["E1", "E2"], &target, 2).unwrap(),
            4
        );
        let s = hom_tensor_taut(&ctx, "O", &["E1", "E2"], &target, 2).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(s.dims().keys().all(|&d| d == 0));
    }

    #[test]
    fn hom_tensor_k1_taut_target_matches_main_formula_degree_zero() {
        // degree-0 part of ext_taut_taut(E1, O, F, O) equals the k=1
        // partition sum with a tautological target
        let ctx = ctx_with(&[
            ("E1", "F", &[0, 0]),
            ("E1", "O", &[0, 1]),
            ("O", "F", &[0, 2]),
            ("O", "O", &[0]),
        ]);
        for n in 2..=4usize {
            let p = ext_taut_taut(&ctx, "E1", "O", "F", "O", n).unwrap();
            let direct = p.dims().get(&0).copied().unwrap_or(0);
            let via_partitions =
                hom_tensor_taut_dim(&ctx, "O", &["E1"], &HomTarget::Taut("F".into()), n).unwrap();
            assert_eq!(direct, via_partitions, "n={n}");
        }
    }

    #[test]
    fn untwisted_specialization_matches_symbolwise() {
        // with both lines set to a structure-sheaf symbol whose self-ext
        // is one-dimensional in degree zero, the two summands specialize
        // to ext(E,F) ⊗ S^{n-1} H*(O) and H*(E-dual-ish) ⊗ H*(F) ⊗ S^{n-2} H*(O)
        let ctx = ctx_with(&[
            ("E", "F", &[0, 1, 2]),
            ("E", "O", &[0, 2]),
            ("O", "F", &[1]),
            ("O", "O", &[0]),
        ]);
        for n in 2..=4usize {
            let p = ext_taut_taut(&ctx, "E", "O", "F", "O", n).unwrap();
            let first = ctx
                .ext("E", "F")
                .unwrap()
                .poincare()
                .mul(&sym_power_poincare(ctx.ext("O", "O").unwrap(), n - 1));
            let second = ctx
                .ext("E", "O")
                .unwrap()
                .poincare()
                .mul(&ctx.ext("O", "F").unwrap().poincare())
                .mul(&sym_power_poincare(ctx.ext("O", "O").unwrap(), n - 2));
            assert_eq!(p.poincare(), first.add(&second), "n={n}");
            // type-1 basis entries count the first summand exactly
            assert_eq!(
                p.type1.len(),
                ctx.ext("E", "F").unwrap().dim()
                    * sym_power(ctx.ext("O", "O").unwrap(), n - 1).dim()
            );
            assert_eq!(
                p.type2.len(),
                ctx.ext("E", "O").unwrap().dim()
                    * ctx.ext("O", "F").unwrap().dim()
                    * sym_power(ctx.ext("O", "O").unwrap(), n - 2).dim()
            );
        }
    }

    #[test]
    fn spherical_report_k3_like() {
        let ctx = ctx_with(&[
            ("E", "E", &[0, 2]),
            ("E", "L", &[0, 2]),
            ("L", "E", &[0, 2]),
            ("L", "L", &[0, 2]),
        ]);
        let flags = SerreFlags {
            structure_h0_h2_one: true,
            self_ext_0_2_nonzero: true,
        };
        let r = spherical_report(&ctx, "E", "L", 2, flags).unwrap();
        assert_eq!(r.dims, [(0, 2), (2, 4), (4, 2)].into_iter().collect());
        assert_eq!(r.pattern, SelfExtPattern::Neither);
        assert!(r.witnesses.contains(&2));
        assert!(r.guaranteed);
        assert!(r.note.is_none());
    }

    #[test]
    fn spherical_pattern_is_flagged_with_note() {
        // artificial data matching the sphere pattern: dims (1, 0, .., 0, 1)
        let ctx = ctx_with(&[
            ("E", "E", &[0, 4]),
            ("E", "L", &[]),
            ("L", "E", &[]),
            ("L", "L", &[0]),
        ]);
        let flags = SerreFlags {
            structure_h0_h2_one: true,
            self_ext_0_2_nonzero: true,
        };
        let r = spherical_report(&ctx, "E", "L", 2, flags).unwrap();
        assert_eq!(r.pattern, SelfExtPattern::Spherical);
        assert!(r.note.is_some());

        // without the hypotheses the verdict is computed but not guaranteed
        let r2 = spherical_report(&ctx, "E", "L", 2, SerreFlags::default()).unwrap();
        assert_eq!(r2.pattern, SelfExtPattern::Spherical);
        assert!(!r2.guaranteed);
        assert!(r2.note.is_none());
    }
}
