//! Exact matrix representations of symmetric groups: the standard, natural,
//! and alternating representations, their sums, tensor and wedge powers,
//! invariant dimensions by Reynolds averaging (cross-checked by characters),
//! and modules permuted over a finite index set with their projection
//! isomorphism onto a single summand.

use crate::linalg::{self, rat, rati, Matrix, Rat};
use crate::signs::Permutation;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Elements realized inside `invariants_dim` are a full sum over the group;
/// the factorial of this bound caps the cost.
pub const DEFAULT_AVERAGING_CAP: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RepError {
    #[error("the standard representation needs ell >= 2, got {ell}")]
    EllTooSmall { ell: usize },
    #[error("wedge power {p} out of range for dimension {dim}")]
    WedgeOutOfRange { p: usize, dim: usize },
    #[error("group parameters differ: {a} vs {b}")]
    EllMismatch { a: usize, b: usize },
    #[error("averaging over S_{ell} exceeds the cap {cap}")]
    AveragingCapExceeded { ell: usize, cap: usize },
    #[error("generator relation violated: {0}")]
    RelationViolation(String),
    #[error("diagonal induction needs k >= 2 and 0 <= p <= k-2, got k={k}, p={p}")]
    DiagInductionRange { k: usize, p: usize },
    #[error("the group does not act transitively on the index set; orbits: {orbits:?}")]
    NotTransitive { orbits: Vec<Vec<usize>> },
    #[error("malformed permuted module: {0}")]
    Malformed(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// How group elements are realized as matrices.
#[derive(Debug, Clone)]
enum Realize {
    /// Multiply stored generator matrices along a word.
    Word,
    /// Realize in the base representation, then take the compound matrix.
    Wedge { base: Box<SnRep>, p: usize },
}

/// A representation of S_ell by exact rational matrices, stored through the
/// images of the adjacent transpositions `(i, i+1)`.
#[derive(Debug, Clone)]
pub struct SnRep {
    ell: usize,
    dim: usize,
    generators: Vec<Matrix>,
    realize: Realize,
}

impl SnRep {
    /// Builds a representation from generator images (adjacent
    /// transpositions in order). `ell = 1` is the trivial group with no
    /// generators.
    pub fn from_generators(
        ell: usize,
        dim: usize,
        generators: Vec<Matrix>,
    ) -> Result<Self, RepError> {
        if ell == 0 {
            return Err(RepError::EllTooSmall { ell });
        }
        if generators.len() != ell - 1 {
            return Err(RepError::Malformed(format!(
                "S_{ell} needs {} generators, got {}",
                ell - 1,
                generators.len()
            )));
        }
        for g in &generators {
            if g.rows() != dim || g.cols() != dim {
                return Err(RepError::Malformed(format!(
                    "generator is {}x{}, expected {dim}x{dim}",
                    g.rows(),
                    g.cols()
                )));
            }
        }
        let rep = SnRep {
            ell,
            dim,
            generators,
            realize: Realize::Word,
        };
        rep.verify_relations()?;
        Ok(rep)
    }

    pub fn trivial(ell: usize) -> Self {
        SnRep {
            ell,
            dim: 1,
            generators: vec![Matrix::identity(1); ell.saturating_sub(1)],
            realize: Realize::Word,
        }
    }

    pub fn alternating(ell: usize) -> Self {
        let mut neg = Matrix::identity(1);
        neg.set(0, 0, rati(-1));
        SnRep {
            ell,
            dim: 1,
            generators: vec![neg; ell.saturating_sub(1)],
            realize: Realize::Word,
        }
    }

    /// Permutation matrices on basis vectors e_1 .. e_ell.
    pub fn natural(ell: usize) -> Self {
        let generators = (1..ell)
            .map(|k| {
                let mut m = Matrix::zeros(ell, ell);
                for i in 1..=ell {
                    let img = if i == k {
                        k + 1
                    } else if i == k + 1 {
                        k
                    } else {
                        i
                    };
                    m.set(img - 1, i - 1, rati(1));
                }
                m
            })
            .collect();
        SnRep {
            ell,
            dim: ell,
            generators,
            realize: Realize::Word,
        }
    }

    /// The (ell-1)-dimensional standard representation in the basis
    /// `f_j = e_j - e_{j+1}`.
    pub fn standard(ell: usize) -> Result<Self, RepError> {
        if ell < 2 {
            return Err(RepError::EllTooSmall { ell });
        }
        let dim = ell - 1;
        let generators = (1..ell)
            .map(|k| {
                let mut m = Matrix::identity(dim);
                // (k, k+1): f_{k-1} -> f_{k-1}+f_k, f_k -> -f_k, f_{k+1} -> f_k+f_{k+1}
                m.set(k - 1, k - 1, rati(-1));
                if k >= 2 {
                    m.set(k - 1, k - 2, rati(1));
                }
                if k < dim {
                    m.set(k - 1, k, rati(1));
                }
                m
            })
            .collect();
        Ok(SnRep {
            ell,
            dim,
            generators,
            realize: Realize::Word,
        })
    }

    /// Standard representation allowing ell = 1 as the zero-dimensional
    /// space (used by wedge constructions that shrink the group).
    fn standard_allow_small(ell: usize) -> SnRep {
        if ell >= 2 {
            SnRep::standard(ell).expect("ell >= 2")
        } else {
            SnRep {
                ell: 1,
                dim: 0,
                generators: Vec::new(),
                realize: Realize::Word,
            }
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn direct_sum(&self, other: &SnRep) -> Result<SnRep, RepError> {
        if self.ell != other.ell {
            return Err(RepError::EllMismatch {
                a: self.ell,
                b: other.ell,
            });
        }
        let generators = self
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        Ok(SnRep {
            ell: self.ell,
            dim: self.dim + other.dim,
            generators,
            realize: Realize::Word,
        })
    }

    pub fn tensor(&self, other: &SnRep) -> Result<SnRep, RepError> {
        if self.ell != other.ell {
            return Err(RepError::EllMismatch {
                a: self.ell,
                b: other.ell,
            });
        }
        let generators = self
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| a.kron(b))
            .collect();
        Ok(SnRep {
            ell: self.ell,
            dim: self.dim * other.dim,
            generators,
            realize: Realize::Word,
        })
    }

    /// Wedge power with the induced generator matrices. Elements are
    /// realized through minors of the base representation.
    pub fn wedge_power(&self, p: usize) -> Result<SnRep, RepError> {
        if p > self.dim {
            return Err(RepError::WedgeOutOfRange { p, dim: self.dim });
        }
        let generators = self.generators.iter().map(|g| g.wedge(p)).collect();
        Ok(SnRep {
            ell: self.ell,
            dim: linalg::binomial(self.dim, p),
            generators,
            realize: Realize::Wedge {
                base: Box::new(self.clone()),
                p,
            },
        })
    }

    /// Involution, braid, and distant-commutation relations of the stored
    /// generator matrices.
    pub fn verify_relations(&self) -> Result<(), RepError> {
        let g = &self.generators;
        for (i, gi) in g.iter().enumerate() {
            if !gi.mul(gi).is_identity() {
                return Err(RepError::RelationViolation(format!(
                    "generator {i} squared != id"
                )));
            }
        }
        for i in 0..g.len().saturating_sub(1) {
            let lhs = g[i].mul(&g[i + 1]).mul(&g[i]);
            let rhs = g[i + 1].mul(&g[i]).mul(&g[i + 1]);
            if lhs != rhs {
                return Err(RepError::RelationViolation(format!("braid at {i}")));
            }
        }
        for i in 0..g.len() {
            for j in i + 2..g.len() {
                if g[i].mul(&g[j]) != g[j].mul(&g[i]) {
                    return Err(RepError::RelationViolation(format!("commutation {i},{j}")));
                }
            }
        }
        Ok(())
    }

    /// Matrix of an arbitrary permutation, through a fixed factorization
    /// into adjacent transpositions.
    pub fn matrix_of(&self, sigma: &Permutation) -> Matrix {
        assert_eq!(sigma.n(), self.ell, "permutation group mismatch");
        match &self.realize {
            Realize::Word => {
                let mut m = Matrix::identity(self.dim);
                for g in sigma.adjacent_word() {
                    m = m.mul(&self.generators[g - 1]);
                }
                m
            }
            Realize::Wedge { base, p } => base.matrix_of(sigma).wedge(*p),
        }
    }

    pub fn character(&self, sigma: &Permutation) -> Rat {
        self.matrix_of(sigma).trace()
    }

    /// Dimension of the invariant subspace: the rank of the Reynolds
    /// projector `(1/ell!) Σ_g R(g)`, summed over the whole group.
    pub fn invariants_dim(&self) -> Result<usize, RepError> {
        self.invariants_dim_with_cap(DEFAULT_AVERAGING_CAP)
    }

    pub fn invariants_dim_with_cap(&self, cap: usize) -> Result<usize, RepError> {
        if self.ell > cap {
            return Err(RepError::AveragingCapExceeded { ell: self.ell, cap });
        }
        let order: usize = (1..=self.ell).product();
        let averaged = match &self.realize {
            Realize::Word => self.sum_over_group_word(),
            Realize::Wedge { base, p } => base.sum_of_wedges_over_group(*p).pop().unwrap(),
        };
        Ok(averaged.scaled(&rat(1, order as i64)).rank())
    }

    /// Streaming sum Σ_g R(g) through the plain-changes walk (one generator
    /// multiplication per group element).
    fn sum_over_group_word(&self) -> Matrix {
        match gens_as_i64(&self.generators) {
            Some(int_gens) => {
                let mut cur = int_identity(self.dim);
                let mut sum = vec![0i64; self.dim * self.dim];
                for (_, step) in Permutation::plain_changes(self.ell) {
                    if let Some(g) = step {
                        cur = int_mul(&cur, &int_gens[g - 1], self.dim);
                    }
                    for (s, c) in sum.iter_mut().zip(&cur) {
                        *s += *c;
                    }
                }
                int_to_matrix(&sum, self.dim, self.dim)
            }
            None => {
                let mut cur = Matrix::identity(self.dim);
                let mut sum = Matrix::zeros(self.dim, self.dim);
                for (_, step) in Permutation::plain_changes(self.ell) {
                    if let Some(g) = step {
                        cur = cur.mul(&self.generators[g - 1]);
                    }
                    sum = sum.add(&cur);
                }
                sum
            }
        }
    }

    /// Sums Σ_g wedge^k(R(g)) for every k in `0..=p` in one pass over the
    /// group; the base element is realized once per element and all minor
    /// levels are read off of it.
    fn sum_of_wedges_over_group(&self, p: usize) -> Vec<Matrix> {
        let dims: Vec<usize> = (0..=p).map(|k| linalg::binomial(self.dim, k)).collect();
        match gens_as_i64(&self.generators) {
            Some(int_gens) => {
                let plan = linalg::WedgePlan::new(self.dim, p);
                let mut cur = int_identity(self.dim);
                let mut sums: Vec<Vec<i64>> = dims.iter().map(|&d| vec![0i64; d * d]).collect();
                for (_, step) in Permutation::plain_changes(self.ell) {
                    if let Some(g) = step {
                        cur = int_mul(&cur, &int_gens[g - 1], self.dim);
                    }
                    let levels = plan.run_i64(&cur);
                    for (sum, level) in sums.iter_mut().zip(levels) {
                        for (s, c) in sum.iter_mut().zip(level) {
                            *s += c;
                        }
                    }
                }
                sums.into_iter()
                    .zip(&dims)
                    .map(|(s, &d)| int_to_matrix(&s, d, d))
                    .collect()
            }
            None => {
                let mut cur = Matrix::identity(self.dim);
                let mut sums: Vec<Matrix> = dims.iter().map(|&d| Matrix::zeros(d, d)).collect();
                for (_, step) in Permutation::plain_changes(self.ell) {
                    if let Some(g) = step {
                        cur = cur.mul(&self.generators[g - 1]);
                    }
                    for (k, sum) in sums.iter_mut().enumerate() {
                        *sum = sum.add(&cur.wedge(k));
                    }
                }
                sums
            }
        }
    }

    /// Invariant dimension by the character inner product with the trivial
    /// character, evaluated on one representative per conjugacy class.
    /// Independent route from the Reynolds averaging.
    pub fn invariants_dim_by_character(&self) -> Result<usize, RepError> {
        let order: i64 = (1..=self.ell as i64).product();
        let mut acc = Rat::zero();
        for lambda in partitions(self.ell) {
            let rep = class_representative(self.ell, &lambda);
            let size = class_size(self.ell, &lambda);
            acc += self.character(&rep) * rati(size as i64);
        }
        acc /= rati(order);
        if !acc.is_integer() {
            return Err(RepError::Internal(format!(
                "character sum {acc} not integral"
            )));
        }
        acc.to_integer()
            .to_usize()
            .ok_or_else(|| RepError::Internal("negative invariant dimension".into()))
    }

    /// Basis of the invariant subspace (joint fixed space of the
    /// generators), as coordinate vectors.
    pub fn invariants_basis(&self) -> Vec<Vec<Rat>> {
        if self.generators.is_empty() {
            return standard_basis(self.dim);
        }
        let stacked: Vec<Matrix> = self
            .generators
            .iter()
            .map(|g| g.sub(&Matrix::identity(self.dim)))
            .collect();
        Matrix::vstack(&stacked).kernel_basis()
    }
}

fn gens_as_i64(gens: &[Matrix]) -> Option<Vec<Vec<i64>>> {
    gens.iter().map(Matrix::try_as_i64).collect()
}

fn int_identity(dim: usize) -> Vec<i64> {
    let mut m = vec![0i64; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1;
    }
    m
}

fn int_mul(a: &[i64], b: &[i64], dim: usize) -> Vec<i64> {
    let mut out = vec![0i64; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let v = a[i * dim + k];
            if v == 0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += v * b[k * dim + j];
            }
        }
    }
    out
}

fn int_to_matrix(data: &[i64], rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| rati(data[i * cols + j]))
}

fn standard_basis(dim: usize) -> Vec<Vec<Rat>> {
    (0..dim)
        .map(|i| {
            let mut v = vec![Rat::zero(); dim];
            v[i] = rati(1);
            v
        })
        .collect()
}

/// Partitions of n, parts descending.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(n)).rev() {
            cur.push(part);
            rec(n - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// A permutation with the given cycle type, cycles laid out consecutively.
pub fn class_representative(n: usize, lambda: &[usize]) -> Permutation {
    let mut images: Vec<usize> = (1..=n).collect();
    let mut start = 1;
    for &part in lambda {
        for i in 0..part {
            images[start + i - 1] = start + (i + 1) % part;
        }
        start += part;
    }
    Permutation::from_images(images).expect("cycle layout is a bijection")
}

/// Conjugacy class size n!/z_lambda.
pub fn class_size(n: usize, lambda: &[usize]) -> usize {
    let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in lambda {
        *mult.entry(p).or_insert(0) += 1;
    }
    let mut z: u128 = 1;
    for (&part, &m) in &mult {
        for _ in 0..m {
            z *= part as u128;
        }
        for i in 1..=m {
            z *= i as u128;
        }
    }
    let fact: u128 = (1..=n as u128).product();
    (fact / z) as usize
}

/// Whether the top wedge of `d` copies of the standard representation of
/// S_ell carries the trivial or the alternating action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopWedgeAction {
    Trivial,
    Alternating,
}

impl std::fmt::Display for TopWedgeAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopWedgeAction::Trivial => write!(f, "trivial"),
            TopWedgeAction::Alternating => write!(f, "alternating"),
        }
    }
}

pub fn top_wedge_action(ell: usize, d: usize) -> Result<TopWedgeAction, RepError> {
    if ell < 2 || d == 0 {
        return Err(RepError::EllTooSmall { ell: ell.min(1) });
    }
    let std = SnRep::standard(ell)?;
    let mut sum = std.clone();
    for _ in 1..d {
        sum = sum.direct_sum(&std)?;
    }
    let top = sum.wedge_power(d * (ell - 1))?;
    debug_assert_eq!(top.dim(), 1);
    let values: Vec<Rat> = top
        .generators()
        .iter()
        .map(|g| g.at(0, 0).clone())
        .collect();
    if values.iter().all(|v| *v == rati(1)) {
        Ok(TopWedgeAction::Trivial)
    } else if values.iter().all(|v| *v == rati(-1)) {
        Ok(TopWedgeAction::Alternating)
    } else {
        Err(RepError::Internal(
            "mixed generator determinants on a character".into(),
        ))
    }
}

/// The transfer map on wedge-power invariants induced by the inclusion of
/// the doubled standard representation of S_{k-1} into that of S_k, summed
/// over the cycle representatives `(l, l+1, .., k)`.
#[derive(Debug, Clone)]
pub struct DiagInduction {
    /// 1x1 matrix of the restricted map between the invariant lines.
    pub matrix: Matrix,
    pub bijective: bool,
    /// Image of the source invariant vector in the target wedge space.
    pub image: Vec<Rat>,
}

pub fn diag_induction(k: usize, p: usize) -> Result<DiagInduction, RepError> {
    if k < 2 || p + 2 > k {
        return Err(RepError::DiagInductionRange { k, p });
    }
    let small = SnRep::standard_allow_small(k - 1);
    let small2 = small.direct_sum(&small)?;
    let big = SnRep::standard(k)?;
    let big2 = big.direct_sum(&big)?;

    // Inclusion f_j -> f_j on each summand.
    let incl_single = Matrix::from_fn(k - 1, k - 2, |i, j| if i == j { rati(1) } else { rati(0) });
    let incl = incl_single.direct_sum(&incl_single);
    let t = incl.wedge(2 * p);

    let wedge_small = small2.wedge_power(2 * p)?;
    let wedge_big = big2.wedge_power(2 * p)?;

    let mut t_big = Matrix::zeros(t.rows(), t.cols());
    for l in 1..=k {
        let cycle: Vec<usize> = (l..=k).collect();
        let sigma = Permutation::cycle(k, &cycle);
        t_big = t_big.add(&wedge_big.matrix_of(&sigma).mul(&t));
    }

    let src_inv = wedge_small.invariants_basis();
    let tgt_inv = wedge_big.invariants_basis();
    if src_inv.len() != 1 || tgt_inv.len() != 1 {
        return Err(RepError::Internal(format!(
            "invariant lines have dimensions {} and {}",
            src_inv.len(),
            tgt_inv.len()
        )));
    }
    let image = t_big.apply(&src_inv[0]);
    let tgt = Matrix::column(&tgt_inv[0]);
    let coeff = tgt
        .solve(&image)
        .ok_or_else(|| RepError::Internal("image not in the invariant line".into()))?;
    let c = coeff[0].clone();
    let bijective = !c.is_zero();
    let mut m = Matrix::zeros(1, 1);
    m.set(0, 0, c);
    Ok(DiagInduction {
        matrix: m,
        bijective,
        image,
    })
}

/// A module `M = ⊕_{i in I} M_i` with an S_ell action permuting the
/// summands: each group element maps `M_i` isomorphically onto `M_{g(i)}`.
#[derive(Debug, Clone)]
pub struct PermutedModule {
    ell: usize,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    /// Per generator: the index permutation (0-based).
    gen_index: Vec<Vec<usize>>,
    /// Per generator: the assembled matrix on the whole module.
    gen_big: Vec<Matrix>,
}

impl PermutedModule {
    /// `gen_blocks[g][i]` is the map `M_i -> M_{gen_index[g][i]}`.
    pub fn new(
        ell: usize,
        dims: Vec<usize>,
        gen_index: Vec<Vec<usize>>,
        gen_blocks: Vec<Vec<Matrix>>,
    ) -> Result<Self, RepError> {
        let size = dims.len();
        if ell == 0 || gen_index.len() != ell - 1 || gen_blocks.len() != ell - 1 {
            return Err(RepError::Malformed(format!(
                "expected {} generators, got {}/{}",
                ell.saturating_sub(1),
                gen_index.len(),
                gen_blocks.len()
            )));
        }
        let offsets: Vec<usize> = dims
            .iter()
            .scan(0usize, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let total: usize = dims.iter().sum();
        let mut gen_big = Vec::new();
        for (gi, (idx, blocks)) in gen_index.iter().zip(&gen_blocks).enumerate() {
            let mut seen = vec![false; size];
            for &t in idx {
                if t >= size || seen[t] {
                    return Err(RepError::Malformed(format!(
                        "generator {gi}: bad index map"
                    )));
                }
                seen[t] = true;
            }
            if blocks.len() != size {
                return Err(RepError::Malformed(format!(
                    "generator {gi}: missing blocks"
                )));
            }
            let mut big = Matrix::zeros(total, total);
            for (i, b) in blocks.iter().enumerate() {
                let j = idx[i];
                if b.rows() != dims[j] || b.cols() != dims[i] {
                    return Err(RepError::Malformed(format!(
                        "generator {gi}: block {i} is {}x{}, expected {}x{}",
                        b.rows(),
                        b.cols(),
                        dims[j],
                        dims[i]
                    )));
                }
                for r in 0..b.rows() {
                    for c in 0..b.cols() {
                        big.set(offsets[j] + r, offsets[i] + c, b.at(r, c).clone());
                    }
                }
            }
            gen_big.push(big);
        }
        let module = PermutedModule {
            ell,
            dims,
            offsets,
            gen_index,
            gen_big,
        };
        module.verify_relations()?;
        Ok(module)
    }

    fn verify_relations(&self) -> Result<(), RepError> {
        for (i, g) in self.gen_big.iter().enumerate() {
            if !g.mul(g).is_identity() {
                return Err(RepError::RelationViolation(format!(
                    "module generator {i} squared"
                )));
            }
        }
        for i in 0..self.gen_big.len().saturating_sub(1) {
            let a = &self.gen_big[i];
            let b = &self.gen_big[i + 1];
            if a.mul(b).mul(a) != b.mul(a).mul(b) {
                return Err(RepError::RelationViolation(format!("module braid at {i}")));
            }
        }
        for i in 0..self.gen_big.len() {
            for j in i + 2..self.gen_big.len() {
                if self.gen_big[i].mul(&self.gen_big[j]) != self.gen_big[j].mul(&self.gen_big[i]) {
                    return Err(RepError::RelationViolation(format!(
                        "module commutation {i},{j}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn index_size(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn index_image(&self, sigma: &Permutation, i: usize) -> usize {
        let mut cur = i;
        for g in sigma.adjacent_word().into_iter().rev() {
            cur = self.gen_index[g - 1][cur];
        }
        cur
    }

    pub fn big_matrix_of(&self, sigma: &Permutation) -> Matrix {
        let mut m = Matrix::identity(self.total_dim());
        for g in sigma.adjacent_word() {
            m = m.mul(&self.gen_big[g - 1]);
        }
        m
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let size = self.index_size();
        let mut seen = vec![false; size];
        let mut orbits = Vec::new();
        for start in 0..size {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut queue = vec![start];
            while let Some(i) = queue.pop() {
                for idx in &self.gen_index {
                    let j = idx[i];
                    if !seen[j] {
                        seen[j] = true;
                        orbit.push(j);
                        queue.push(j);
                    }
                }
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    pub fn stabilizer(&self, i: usize) -> Vec<Permutation> {
        Permutation::all(self.ell)
            .into_iter()
            .filter(|s| self.index_image(s, i) == i)
            .collect()
    }

    /// Basis of the G-invariants of the whole module.
    pub fn invariants_basis(&self) -> Vec<Vec<Rat>> {
        if self.gen_big.is_empty() {
            return standard_basis(self.total_dim());
        }
        let stacked: Vec<Matrix> = self
            .gen_big
            .iter()
            .map(|g| g.sub(&Matrix::identity(self.total_dim())))
            .collect();
        Matrix::vstack(&stacked).kernel_basis()
    }

    /// Basis of `M_i^{Stab(i)}`, in the coordinates of the summand.
    pub fn summand_invariants_basis(&self, i: usize) -> Vec<Vec<Rat>> {
        let blocks: Vec<Matrix> = self
            .stabilizer(i)
            .iter()
            .filter(|s| !s.is_identity())
            .map(|s| {
                self.block_of(&self.big_matrix_of(s), i, i)
                    .sub(&Matrix::identity(self.dims[i]))
            })
            .collect();
        if blocks.is_empty() {
            return standard_basis(self.dims[i]);
        }
        Matrix::vstack(&blocks).kernel_basis()
    }

    fn block_of(&self, big: &Matrix, row_block: usize, col_block: usize) -> Matrix {
        Matrix::from_fn(self.dims[row_block], self.dims[col_block], |r, c| {
            big.at(self.offsets[row_block] + r, self.offsets[col_block] + c)
                .clone()
        })
    }

    fn embed(&self, i: usize, v: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.total_dim()];
        out[self.offsets[i]..self.offsets[i] + self.dims[i]].clone_from_slice(v);
        out
    }

    fn slice(&self, i: usize, v: &[Rat]) -> Vec<Rat> {
        v[self.offsets[i]..self.offsets[i] + self.dims[i]].to_vec()
    }

    /// One permutation per orbit point, mapping `i` there; the entry at `i`
    /// is the identity.
    pub fn transversal_from(&self, i: usize) -> BTreeMap<usize, Permutation> {
        let mut reps = BTreeMap::new();
        reps.insert(i, Permutation::identity(self.ell));
        let mut queue = vec![i];
        while let Some(cur) = queue.pop() {
            for (g, idx) in self.gen_index.iter().enumerate() {
                let next = idx[cur];
                if !reps.contains_key(&next) {
                    let t = Permutation::transposition(self.ell, g + 1, g + 2);
                    let rep = t.compose(&reps[&cur]);
                    reps.insert(next, rep);
                    queue.push(next);
                }
            }
        }
        reps
    }

    /// The projection `M^G -> M_i^{Stab(i)}` and its inverse
    /// `m ↦ ⊕_{[g]} g·m`, both as matrices in the computed invariant bases.
    pub fn danila_roundtrip(&self, i: usize) -> Result<DanilaRoundtrip, RepError> {
        let orbits = self.orbits();
        if orbits.len() != 1 {
            return Err(RepError::NotTransitive { orbits });
        }
        let inv_basis = self.invariants_basis();
        let sub_basis = self.summand_invariants_basis(i);
        let sub_matrix = basis_matrix(&sub_basis, self.dims[i]);
        let inv_matrix = basis_matrix(&inv_basis, self.total_dim());

        let mut proj = Matrix::zeros(sub_basis.len(), inv_basis.len());
        for (col, v) in inv_basis.iter().enumerate() {
            let coords = sub_matrix
                .solve(&self.slice(i, v))
                .ok_or_else(|| RepError::Internal("projection left the invariants".into()))?;
            for (row, c) in coords.into_iter().enumerate() {
                proj.set(row, col, c);
            }
        }

        let transversal = self.transversal_from(i);
        let mut inverse = Matrix::zeros(inv_basis.len(), sub_basis.len());
        for (col, m) in sub_basis.iter().enumerate() {
            let mut big = vec![Rat::zero(); self.total_dim()];
            for rep in transversal.values() {
                let moved = self.big_matrix_of(rep).apply(&self.embed(i, m));
                for (b, x) in big.iter_mut().zip(moved) {
                    *b += x;
                }
            }
            let coords = inv_matrix
                .solve(&big)
                .ok_or_else(|| RepError::Internal("inverse image is not invariant".into()))?;
            for (row, c) in coords.into_iter().enumerate() {
                inverse.set(row, col, c);
            }
        }

        Ok(DanilaRoundtrip {
            projection: proj,
            inverse,
        })
    }

    /// Reynolds average of an arbitrary linear map into an equivariant one:
    /// `(1/|G|) Σ_σ R_N(σ) φ R_M(σ)^{-1}`.
    pub fn equivariant_average(&self, target: &PermutedModule, phi: &Matrix) -> Matrix {
        assert_eq!(self.ell, target.ell);
        let mut sum = Matrix::zeros(target.total_dim(), self.total_dim());
        let group = Permutation::all(self.ell);
        for sigma in &group {
            let left = target.big_matrix_of(sigma);
            let right = self.big_matrix_of(&sigma.inverse());
            sum = sum.add(&left.mul(phi).mul(&right));
        }
        sum.scaled(&rat(1, group.len() as i64))
    }

    /// The transported component formula for an equivariant map:
    /// `m ↦ Σ_{[g]} φ(g(i), j)(g·m)`, summed over a transversal of the
    /// cosets of the stabilizer of `i`.
    pub fn transported_hom(
        &self,
        target: &PermutedModule,
        phi: &Matrix,
        i: usize,
        j: usize,
    ) -> Matrix {
        let mut sum = Matrix::zeros(target.dims[j], self.dims[i]);
        for rep in self.transversal_from(i).values() {
            let moved = phi.mul(&self.big_matrix_of(rep));
            // block (j, i) of φ ∘ R(g) is φ(g(i), j) ∘ A_g(i)
            let block = Matrix::from_fn(target.dims[j], self.dims[i], |r, c| {
                moved.at(target.offsets[j] + r, self.offsets[i] + c).clone()
            });
            sum = sum.add(&block);
        }
        sum
    }
}

#[derive(Debug, Clone)]
pub struct DanilaRoundtrip {
    /// Matrix of `M^G -> M_i^{Stab(i)}` in the computed bases.
    pub projection: Matrix,
    /// Matrix of the inverse `m ↦ ⊕_{[g]} g·m`.
    pub inverse: Matrix,
}

impl DanilaRoundtrip {
    pub fn is_isomorphism(&self) -> bool {
        self.projection.mul(&self.inverse).is_identity()
            && self.inverse.mul(&self.projection).is_identity()
    }
}

fn basis_matrix(basis: &[Vec<Rat>], rows: usize) -> Matrix {
    Matrix::from_fn(rows, basis.len(), |i, j| basis[j][i].clone())
}

/// Dimensions of `(∧^p (ρ ⊕ ρ))^{S_ell}` for every `p` in `0..=pmax`,
/// computed by the full Reynolds sum with one pass over the group.
pub fn doubled_standard_wedge_invariants(ell: usize, pmax: usize) -> Result<Vec<usize>, RepError> {
    if ell < 2 {
        return Err(RepError::EllTooSmall { ell });
    }
    if ell > DEFAULT_AVERAGING_CAP {
        return Err(RepError::AveragingCapExceeded {
            ell,
            cap: DEFAULT_AVERAGING_CAP,
        });
    }
    let std = SnRep::standard(ell)?;
    let doubled = std.direct_sum(&std)?;
    let order: i64 = (1..=ell as i64).product();
    let capped = pmax.min(doubled.dim());
    let sums = doubled.sum_of_wedges_over_group(capped);
    let mut out: Vec<usize> = sums
        .into_iter()
        .map(|s| s.scaled(&rat(1, order)).rank())
        .collect();
    out.resize(pmax + 1, 0);
    Ok(out)
}
