//! Randomized generators and the runnable verification suites: the
//! representation-theoretic dimension tables, the complex sign identities,
//! the two-engine product comparison, and the graded symmetric-power
//! oracles. The command-line `verify` subcommand drives these; the
//! acceptance tests call the same entry points with pinned parameters.

use crate::complex;
use crate::context::{ComposeTable, SurfaceContext};
use crate::equivariant::{self, EqModel, Side};
use crate::graded::{
    sym_power, sym_power_poincare, tensor_power_invariants_dims, Element, GradedSpace,
};
use crate::hilbert;
use crate::linalg::{rat, rati, Matrix, Rat};
use crate::reps::{
    diag_induction, doubled_standard_wedge_invariants, top_wedge_action, PermutedModule, SnRep,
    TopWedgeAction,
};
use crate::signs::{Permutation, Subset};
use crate::yoneda::{self, PClass};
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::fmt::Write as _;

/// One pass/fail line of a verification suite.
#[derive(Debug, Clone)]
pub struct SuiteLine {
    pub pass: bool,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub lines: Vec<SuiteLine>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            lines: Vec::new(),
        }
    }

    fn check(&mut self, pass: bool, label: impl Into<String>) {
        self.lines.push(SuiteLine {
            pass,
            label: label.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let tag = if line.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag}  {}", line.label);
        }
        let _ = writeln!(
            out,
            "suite {}: {}/{} checks passed",
            self.suite,
            self.lines.iter().filter(|l| l.pass).count(),
            self.lines.len()
        );
        out
    }
}

fn rng_from_seed(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn small_rat(rng: &mut StdRng) -> Rat {
    // nonzero small rationals with occasional halves and thirds
    let numer = *[1i64, -1, 2, -2, 3].get(rng.random_range(0..5)).unwrap();
    let denom = *[1i64, 1, 1, 2, 3].get(rng.random_range(0..5)).unwrap();
    rat(numer, denom)
}

fn random_space(rng: &mut StdRng, prefix: &str, max_dim: usize, max_deg: i64) -> GradedSpace {
    let dim = rng.random_range(0..=max_dim);
    let degrees: Vec<i64> = (0..dim).map(|_| rng.random_range(0..=max_deg)).collect();
    GradedSpace::with_degrees(prefix, &degrees)
}

/// Fills one composition table with random degree-additive constants.
fn random_table(
    rng: &mut StdRng,
    src: &GradedSpace,
    mid: &GradedSpace,
    dst: &GradedSpace,
) -> ComposeTable {
    let mut table = ComposeTable::new();
    for (g, dg) in mid.basis() {
        for (f, df) in src.basis() {
            let mut elem = Element::zero();
            for (label, dd) in dst.basis() {
                if *dd == dg + df && rng.random_range(0..3) > 0 {
                    elem.add_term(label, small_rat(rng));
                }
            }
            table.insert(g, f, elem);
        }
    }
    table
}

/// Random context carrying the twelve ext spaces and eight composition
/// tables needed to compose classes through the middle pair.
pub fn random_yoneda_context(rng: &mut StdRng, max_dim: usize, max_deg: i64) -> SurfaceContext {
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
    for (i, (a, b)) in pairs.iter().enumerate() {
        // bias towards nonzero spaces; empty spaces are legal inputs
        let dim_cap = if rng.random_range(0..10) == 0 {
            max_dim
        } else {
            max_dim.max(1)
        };
        let space = random_space(
            rng,
            &format!("{}{}_", a.to_lowercase(), b.to_lowercase()),
            dim_cap,
            max_deg,
        );
        let _ = i;
        ctx.set_ext(a, b, space);
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
        let src = ctx.ext(a, b).unwrap().clone();
        let mid = ctx.ext(b, c).unwrap().clone();
        let dst = ctx.ext(a, c).unwrap().clone();
        ctx.set_table(a, b, c, random_table(rng, &src, &mid, &dst));
    }
    ctx.validate()
        .expect("randomly generated context is structurally valid");
    ctx
}

/// Random class in `P(el, l, fm, m)` with a handful of decomposable terms.
pub fn random_pclass(
    rng: &mut StdRng,
    ctx: &SurfaceContext,
    el: &str,
    l: &str,
    fm: &str,
    m: &str,
    n: usize,
) -> PClass {
    let mut class = PClass::zero(el, l, fm, m, n);
    let phi_space = ctx.ext(el, fm).unwrap().clone();
    let eta_space = ctx.ext(el, m).unwrap().clone();
    let x_space = ctx.ext(l, fm).unwrap().clone();
    let s_space = ctx.ext(l, m).unwrap().clone();
    let pick = |rng: &mut StdRng, space: &GradedSpace| -> Option<String> {
        if space.dim() == 0 {
            None
        } else {
            Some(space.label(rng.random_range(0..space.dim())).to_string())
        }
    };
    for _ in 0..2 {
        if let Some(phi) = pick(rng, &phi_space) {
            let s: Option<Vec<String>> = (0..n - 1).map(|_| pick(rng, &s_space)).collect();
            if let Some(s) = s {
                let refs: Vec<&str> = s.iter().map(String::as_str).collect();
                let _ = class.add_type1(ctx, &phi, &refs, small_rat(rng));
            }
        }
        if let (Some(eta), Some(x)) = (pick(rng, &eta_space), pick(rng, &x_space)) {
            let t: Option<Vec<String>> = (0..n - 2).map(|_| pick(rng, &s_space)).collect();
            if let Some(t) = t {
                let refs: Vec<&str> = t.iter().map(String::as_str).collect();
                let _ = class.add_type2(ctx, &eta, &x, &refs, small_rat(rng));
            }
        }
    }
    class
}

/// Exterior-algebra context: every ordered pair of the given objects
/// carries the same algebra on `gens` odd degree-one generators, with
/// wedge multiplication for every triple and the unit declared as the
/// identity of every object. Associative by construction.
pub fn exterior_context(objects: &[&str], gens: usize) -> SurfaceContext {
    assert!(gens <= 8, "keep the algebra small");
    let subsets: Vec<Vec<usize>> = {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for g in 0..gens {
            let mut next = Vec::new();
            for s in &out {
                next.push(s.clone());
                let mut w = s.clone();
                w.push(g);
                next.push(w);
            }
            out = next;
        }
        out.sort_by_key(|s| (s.len(), s.clone()));
        out
    };
    let label_of = |s: &[usize]| -> String {
        if s.is_empty() {
            "e".to_string()
        } else {
            format!(
                "w{}",
                s.iter().map(|g| (g + 1).to_string()).collect::<String>()
            )
        }
    };
    let space = GradedSpace::new(
        subsets
            .iter()
            .map(|s| (label_of(s), s.len() as i64))
            .collect(),
    )
    .unwrap();

    // wedge product with the merge sign; disjointness required
    let wedge = |left: &[usize], right: &[usize]| -> Option<(Vec<usize>, i64)> {
        let mut merged: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
        let mut sign = 1i64;
        for i in 1..merged.len() {
            let mut j = i;
            while j > 0 && merged[j - 1] > merged[j] {
                merged.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        for w in merged.windows(2) {
            if w[0] == w[1] {
                return None;
            }
        }
        Some((merged, sign))
    };

    let mut table = ComposeTable::new();
    for g in &subsets {
        for f in &subsets {
            match wedge(g, f) {
                Some((merged, sign)) => {
                    table.insert(
                        &label_of(g),
                        &label_of(f),
                        Element::single(&label_of(&merged), rati(sign)),
                    );
                }
                None => table.insert(&label_of(g), &label_of(f), Element::zero()),
            }
        }
    }

    let mut ctx = SurfaceContext::new();
    for a in objects {
        for b in objects {
            ctx.set_ext(a, b, space.clone());
        }
    }
    for a in objects {
        ctx.set_identity(a, "e");
    }
    for a in objects {
        for b in objects {
            for c in objects {
                ctx.set_table(a, b, c, table.clone());
            }
        }
    }
    ctx.validate()
        .expect("exterior context is associative and unital");
    ctx
}

/// Random module permuted over one of three index families (points, pairs,
/// subsets), twisted by random base changes of the summands.
pub fn random_permuted_module(rng: &mut StdRng, ell: usize) -> PermutedModule {
    // index family with its generator actions
    let (size, gen_index): (usize, Vec<Vec<usize>>) = match rng.random_range(0..3) {
        0 => {
            // natural action on [ell]
            let gi = (0..ell - 1)
                .map(|g| {
                    (0..ell)
                        .map(|i| {
                            if i == g {
                                g + 1
                            } else if i == g + 1 {
                                g
                            } else {
                                i
                            }
                        })
                        .collect()
                })
                .collect();
            (ell, gi)
        }
        1 => {
            // ordered distinct pairs
            let pairs: Vec<(usize, usize)> = (1..=ell)
                .flat_map(|i| (1..=ell).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect();
            let gi = (0..ell - 1)
                .map(|g| {
                    let t = Permutation::transposition(ell, g + 1, g + 2);
                    pairs
                        .iter()
                        .map(|&(i, j)| {
                            let image = (t.apply(i), t.apply(j));
                            pairs.iter().position(|p| *p == image).unwrap()
                        })
                        .collect()
                })
                .collect();
            (pairs.len(), gi)
        }
        _ => {
            // k-subsets for a genuinely transitive k
            let k = rng.random_range(1..ell.max(2));
            let subsets = Subset::all_of_size(ell, k);
            let gi = (0..ell - 1)
                .map(|g| {
                    let t = Permutation::transposition(ell, g + 1, g + 2);
                    subsets
                        .iter()
                        .map(|s| {
                            let image = s.image_under(&t);
                            subsets.iter().position(|x| *x == image).unwrap()
                        })
                        .collect()
                })
                .collect();
            (subsets.len(), gi)
        }
    };

    // base representation acting inside each summand
    let base = match rng.random_range(0..4) {
        0 => SnRep::trivial(ell),
        1 => SnRep::alternating(ell),
        2 => SnRep::trivial(ell)
            .direct_sum(&SnRep::alternating(ell))
            .unwrap(),
        _ => {
            if ell <= 4 {
                SnRep::standard(ell).unwrap()
            } else {
                SnRep::trivial(ell)
            }
        }
    };
    let dim = base.dim();

    // random unimodular twist per summand
    let random_twist = |rng: &mut StdRng| -> Matrix {
        let mut m = Matrix::identity(dim);
        for _ in 0..4 {
            let i = rng.random_range(0..dim);
            let j = rng.random_range(0..dim);
            if i == j {
                continue;
            }
            // row_i += c * row_j
            let c = rati(rng.random_range(-2..=2i64));
            let mut e = Matrix::identity(dim);
            e.set(i, j, c);
            m = e.mul(&m);
        }
        m
    };
    let twists: Vec<Matrix> = (0..size).map(|_| random_twist(rng)).collect();
    let inverses: Vec<Matrix> = twists.iter().map(|t| t.inverse().unwrap()).collect();

    let gen_blocks: Vec<Vec<Matrix>> = (0..ell - 1)
        .map(|g| {
            let rep_matrix = base.generators()[g].clone();
            (0..size)
                .map(|i| {
                    let target = gen_index[g][i];
                    twists[target].mul(&rep_matrix).mul(&inverses[i])
                })
                .collect()
        })
        .collect();

    PermutedModule::new(ell, vec![dim; size], gen_index, gen_blocks)
        .expect("cocycle construction yields a valid module")
}

/// Representation suite: wedge-invariant tables, top-wedge characters,
/// the diagonal-induction transfer, and randomized permuted modules.
pub fn run_reps_suite(max_ell: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("reps");
    let max_ell = max_ell.clamp(2, 6);

    for ell in 2..=max_ell {
        match doubled_standard_wedge_invariants(ell, 2 * ell) {
            Ok(dims) => {
                let expected: Vec<usize> = (0..=2 * ell)
                    .map(|p| {
                        if p % 2 == 0 && p <= 2 * (ell - 1) {
                            1
                        } else {
                            0
                        }
                    })
                    .collect();
                report.check(
                    dims == expected,
                    format!("wedge invariants of the doubled standard rep, ell={ell}: {dims:?}"),
                );
            }
            Err(e) => report.check(false, format!("ell={ell}: {e}")),
        }
        // independent character route on a sample of wedge degrees
        let std = SnRep::standard(ell).unwrap();
        let doubled = std.direct_sum(&std).unwrap();
        let mut chars_ok = true;
        for p in (0..=2 * (ell - 1)).step_by(2) {
            let w = doubled.wedge_power(p).unwrap();
            if w.invariants_dim_by_character().unwrap() != 1 {
                chars_ok = false;
            }
        }
        report.check(chars_ok, format!("character route agrees, ell={ell}"));
    }

    for ell in 2..=max_ell {
        let even = top_wedge_action(ell, 2);
        let odd = top_wedge_action(ell, 1);
        report.check(
            even == Ok(TopWedgeAction::Trivial) && odd == Ok(TopWedgeAction::Alternating),
            format!("top wedge action trivial for d=2, alternating for d=1, ell={ell}"),
        );
    }

    for k in 2..=5usize {
        for p in 0..=k - 2 {
            match diag_induction(k, p) {
                Ok(d) => report.check(
                    d.bijective,
                    format!("diagonal induction bijective, k={k} p={p}"),
                ),
                Err(e) => report.check(false, format!("diagonal induction k={k} p={p}: {e}")),
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut danila_ok = true;
    let mut morphism_ok = true;
    let modules = 20;
    for _ in 0..modules {
        let ell = rng.random_range(2..=4usize);
        let m = random_permuted_module(&mut rng, ell);
        let i = rng.random_range(0..m.index_size());
        if !m.is_transitive() {
            continue;
        }
        match m.danila_roundtrip(i) {
            Ok(rt) => {
                if !rt.is_isomorphism() {
                    danila_ok = false;
                }
                if m.invariants_basis().len() != m.summand_invariants_basis(i).len() {
                    danila_ok = false;
                }
            }
            Err(_) => danila_ok = false,
        }
        // transported morphism formula against the two projections
        let other = random_permuted_module(&mut rng, ell);
        if other.is_transitive() {
            let raw = Matrix::from_fn(other.total_dim(), m.total_dim(), |_, _| {
                rati(rng.random_range(-2..=2i64))
            });
            let phi = m.equivariant_average(&other, &raw);
            let j = rng.random_range(0..other.index_size());
            if !check_transported_hom(&m, &other, &phi, i, j) {
                morphism_ok = false;
            }
        }
    }
    report.check(
        danila_ok,
        format!("projection round trips on {modules} random modules"),
    );
    report.check(
        morphism_ok,
        "transported morphism components match the projections",
    );

    report
}

/// Route-by-route comparison of the transported component formula against
/// projecting the equivariant map through both summand isomorphisms.
pub fn check_transported_hom(
    m: &PermutedModule,
    target: &PermutedModule,
    phi: &Matrix,
    i: usize,
    j: usize,
) -> bool {
    let Ok(rt_m) = m.danila_roundtrip(i) else {
        return false;
    };
    let transported = m.transported_hom(target, phi, i, j);
    // route: summand invariants -> M^G -> (phi) -> slice at j
    let sub_basis = m.summand_invariants_basis(i);
    let inv_basis = m.invariants_basis();
    for (col, v) in sub_basis.iter().enumerate() {
        // coordinates of the inverse image in the invariant basis
        let mut big = vec![Rat::zero(); m.total_dim()];
        for (row, basis_vec) in inv_basis.iter().enumerate() {
            let c = rt_m.inverse.at(row, col);
            for (b, x) in big.iter_mut().zip(basis_vec) {
                *b += c * x;
            }
        }
        let mapped = phi.apply(&big);
        let offset: usize = target.dims()[..j].iter().sum();
        let slice = &mapped[offset..offset + target.dims()[j]];
        let direct = transported.apply(v);
        if slice != direct.as_slice() {
            return false;
        }
    }
    true
}

/// Complex suite: differential squares to zero and commutes with the
/// linearization, exhaustively for small n and on random permutations for
/// larger n.
pub fn run_complex_suite(max_n: usize, seed: u64, samples: usize) -> SuiteReport {
    let mut report = SuiteReport::new("complex");
    let mut rng = rng_from_seed(seed);
    for n in 2..=max_n {
        match complex::check_d_squared(n) {
            Ok(r) => report.check(
                r.passed(),
                format!("d∘d = 0, n={n} ({} identities)", r.checked),
            ),
            Err(e) => report.check(false, format!("n={n}: {e}")),
        }
        if n <= 5 {
            let mut ok = true;
            let mut checked = 0usize;
            for sigma in Permutation::all(n) {
                let r = complex::check_equivariance(n, &sigma).unwrap();
                ok &= r.passed();
                checked += r.checked;
            }
            report.check(
                ok,
                format!("linearization commutes with d, n={n}, all σ ({checked} identities)"),
            );
        } else {
            let mut ok = true;
            for _ in 0..samples {
                let sigma = random_permutation(&mut rng, n);
                ok &= complex::check_equivariance(n, &sigma).unwrap().passed();
            }
            report.check(
                ok,
                format!("linearization commutes with d, n={n}, {samples} random σ"),
            );
        }
    }
    report.check(
        (2..=max_n).all(|n| complex::euler_characteristic_of_index(n) == 1),
        "alternating sum of term counts is 1",
    );
    report
}

pub fn random_permutation(rng: &mut StdRng, n: usize) -> Permutation {
    let mut images: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        images.swap(i, j);
    }
    Permutation::from_images(images).unwrap()
}

/// Yoneda suite: closed-formula and component-model products agree on
/// randomized contexts; bilinearity and degree additivity hold; the
/// component engine is associative over an associative context.
pub fn run_yoneda_suite(max_n: usize, seed: u64, cases: usize) -> SuiteReport {
    let mut report = SuiteReport::new("yoneda");
    let mut rng = rng_from_seed(seed);
    let max_n = max_n.clamp(2, yoneda::DEFAULT_ORACLE_CAP);

    let mut equal = 0usize;
    let mut total = 0usize;
    let mut mismatch: Option<String> = None;
    for case in 0..cases {
        let n = rng.random_range(2..=max_n);
        let ctx = random_yoneda_context(&mut rng, 2, 2);
        let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
        let b = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
        let closed = yoneda::yoneda_closed(&ctx, &a, &b).unwrap();
        let oracle = yoneda::yoneda_oracle(&ctx, &a, &b).unwrap();
        total += 1;
        if closed == oracle {
            equal += 1;
        } else if mismatch.is_none() {
            mismatch = Some(format!("case {case} (n={n})"));
        }
    }
    report.check(
        equal == total,
        match &mismatch {
            None => format!("closed formula equals component engine on {total} random cases"),
            Some(m) => format!("closed/component mismatch at {m} ({equal}/{total} equal)"),
        },
    );

    // bilinearity: a ∘ (b1 + λ b2) = a ∘ b1 + λ (a ∘ b2)
    {
        let n = 2;
        let ctx = random_yoneda_context(&mut rng, 2, 2);
        let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
        let b1 = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
        let b2 = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
        let lambda = rat(5, 3);
        let combined = b1.add(&b2.scaled(&lambda));
        let lhs = yoneda::yoneda_closed(&ctx, &a, &combined).unwrap();
        let rhs = yoneda::yoneda_closed(&ctx, &a, &b1).unwrap().add(
            &yoneda::yoneda_closed(&ctx, &a, &b2)
                .unwrap()
                .scaled(&lambda),
        );
        report.check(lhs == rhs, "closed product is bilinear");
        let lhs_o = yoneda::yoneda_oracle(&ctx, &a, &combined).unwrap();
        let rhs_o = yoneda::yoneda_oracle(&ctx, &a, &b1).unwrap().add(
            &yoneda::yoneda_oracle(&ctx, &a, &b2)
                .unwrap()
                .scaled(&lambda),
        );
        report.check(lhs_o == rhs_o, "component product is bilinear");
    }

    // degree additivity on decomposable classes
    {
        let mut ok = true;
        for _ in 0..10 {
            let n = rng.random_range(2..=max_n.min(3));
            let ctx = random_yoneda_context(&mut rng, 2, 2);
            let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
            let b = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
            for (ka, ca) in &a.terms {
                if ca.is_zero() {
                    continue;
                }
                let mut a1 = PClass::zero("F", "M", "G", "N", n);
                a1.terms.insert(ka.clone(), ca.clone());
                let da = a1.term_degree(&ctx, ka).unwrap();
                for (kb, cb) in &b.terms {
                    let mut b1 = PClass::zero("E", "L", "F", "M", n);
                    b1.terms.insert(kb.clone(), cb.clone());
                    let db = b1.term_degree(&ctx, kb).unwrap();
                    let product = yoneda::yoneda_closed(&ctx, &a1, &b1).unwrap();
                    for key in product.terms.keys() {
                        if product.term_degree(&ctx, key).unwrap() != da + db {
                            ok = false;
                        }
                    }
                    // the lifted composite is homogeneous of the same degree
                    let lifted = crate::equivariant::compose(
                        &ctx,
                        &yoneda::lift_pclass(&ctx, &a1).unwrap(),
                        &yoneda::lift_pclass(&ctx, &b1).unwrap(),
                    )
                    .unwrap();
                    if !lifted.is_zero() && lifted.degree(&ctx).unwrap() != Some(da + db) {
                        ok = false;
                    }
                }
            }
        }
        report.check(ok, "product terms add degrees");
    }

    // well-definedness: permuting letters inside an input multiset (with
    // the sorting sign) does not change either engine's output
    {
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 2);
        let n = 3;
        let mut b_sorted = PClass::zero("E", "L", "F", "M", n);
        b_sorted
            .add_type1(&ctx, "e", &["w1", "w2"], rati(1))
            .unwrap();
        let mut b_swapped = PClass::zero("E", "L", "F", "M", n);
        // swapping two odd letters flips the sign
        b_swapped
            .add_type1(&ctx, "e", &["w2", "w1"], rati(-1))
            .unwrap();
        report.check(
            b_sorted == b_swapped,
            "multiset reordering with its sign is absorbed",
        );
        let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
        let lhs = yoneda::yoneda_closed(&ctx, &a, &b_sorted).unwrap();
        let rhs = yoneda::yoneda_closed(&ctx, &a, &b_swapped).unwrap();
        report.check(lhs == rhs, "engines see reordered inputs identically");
    }

    // associativity of the component engine over an associative context
    {
        let ctx = exterior_context(&["D", "P", "E", "L", "F", "M", "G", "N"], 2);
        let n = 2;
        let mut ok = true;
        for _ in 0..5 {
            let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
            let b = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
            let c = random_pclass(&mut rng, &ctx, "D", "P", "E", "L", n);
            let ab = yoneda::yoneda_oracle(&ctx, &a, &b).unwrap();
            let bc = yoneda::yoneda_oracle(&ctx, &b, &c).unwrap();
            let left = yoneda::yoneda_oracle(&ctx, &ab, &c).unwrap();
            let right = yoneda::yoneda_oracle(&ctx, &a, &bc).unwrap();
            if left != right {
                ok = false;
            }
        }
        report.check(
            ok,
            "component engine is associative over an associative context",
        );
    }

    report
}

/// Graded suite: symmetric-power dimensions against the signed projector
/// and the generating function, and the sign homomorphism property.
pub fn run_graded_suite(max_n: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("graded");
    let mut rng = rng_from_seed(seed);
    let max_n = max_n.clamp(1, 4);

    // exhaustive small spaces: total dim <= 3, degrees in 0..=3
    let mut all_ok = true;
    let mut cases = 0usize;
    let mut degree_tuples: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..3 {
        let mut next = degree_tuples.clone();
        for t in &degree_tuples {
            for d in 0..=3i64 {
                // nondecreasing tuples are enough: basis order is immaterial
                if t.last().is_none_or(|&last| d >= last) {
                    let mut t2 = t.clone();
                    t2.push(d);
                    next.push(t2);
                }
            }
        }
        degree_tuples = next;
        degree_tuples.sort();
        degree_tuples.dedup();
    }
    for degs in &degree_tuples {
        let v = GradedSpace::with_degrees("v", degs);
        for n in 0..=max_n {
            let sym = sym_power(&v, n);
            let oracle = tensor_power_invariants_dims(&v, n);
            let gf = sym_power_poincare(&v, n);
            if sym.dims() != oracle || sym.poincare() != gf {
                all_ok = false;
            }
            cases += 1;
        }
    }
    report.check(all_ok, format!("symmetric power dims match projector ranks and the generating function ({cases} spaces)"));

    // sign homomorphism: exhaustive over all σ, τ and degree parities
    // for k <= 6 (bitmask route), spot-checked against the direct route
    let mut hom_ok = (2..=6usize).all(koszul_homomorphism_exhaustive);
    for k in [5usize, 6] {
        for _ in 0..200 {
            let s = random_permutation(&mut rng, k);
            let t = random_permutation(&mut rng, k);
            let degs: Vec<i64> = (0..k).map(|_| rng.random_range(0..=3i64)).collect();
            if !koszul_homomorphism_holds(&s, &t, &degs) {
                hom_ok = false;
            }
        }
    }
    report.check(
        hom_ok,
        "sign of a permuted tensor is a homomorphism over the slot action",
    );

    report
}

/// Exhaustive homomorphism check of the permutation sign over all degree
/// vectors in {0,1}^k and all pairs of permutations, using bitmask
/// parity: the sign of σ on a degree mask is the parity of the inversion
/// pairs of σ supported on odd slots.
pub fn koszul_homomorphism_exhaustive(k: usize) -> bool {
    assert!(k <= 6, "pair masks are stored in u32");
    let perms = Permutation::all(k);
    let npairs = k * (k - 1) / 2;
    let pair_index = |i: usize, j: usize| -> usize {
        // i < j, 0-based
        (0..i).map(|a| k - 1 - a).sum::<usize>() + (j - i - 1)
    };
    // inversion mask per permutation
    let inv_mask: Vec<u32> = perms
        .iter()
        .map(|p| {
            let mut m = 0u32;
            for i in 0..k {
                for j in i + 1..k {
                    if p.apply(i + 1) > p.apply(j + 1) {
                        m |= 1 << pair_index(i, j);
                    }
                }
            }
            m
        })
        .collect();
    // composition table (index of s∘t)
    let index_of: std::collections::HashMap<Vec<usize>, usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.images().to_vec(), i))
        .collect();
    let compose_table: Vec<Vec<usize>> = perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| index_of[s.compose(t).images()])
                .collect()
        })
        .collect();
    // per degree mask: the pair mask of odd-odd slots
    let pair_mask = |degs: u32| -> u32 {
        let mut m = 0u32;
        for i in 0..k {
            for j in i + 1..k {
                if degs & (1 << i) != 0 && degs & (1 << j) != 0 {
                    m |= 1 << pair_index(i, j);
                }
            }
        }
        m
    };
    // permuted degree mask: slot i of p∘t^{-1}-degrees is degs[t^{-1}(i)]
    let sign = |p: usize, pm: u32| -> bool { (inv_mask[p] & pm).count_ones() % 2 == 1 };
    let _ = npairs;
    for (ti, t) in perms.iter().enumerate() {
        let t_inv = t.inverse();
        for degs in 0..(1u32 << k) {
            let moved: u32 = {
                let mut m = 0u32;
                for slot in 1..=k {
                    if degs & (1 << (t_inv.apply(slot) - 1)) != 0 {
                        m |= 1 << (slot - 1);
                    }
                }
                m
            };
            let pm = pair_mask(degs);
            let pm_moved = pair_mask(moved);
            for (si, row) in compose_table.iter().enumerate() {
                let st = row[ti];
                let lhs = sign(st, pm);
                let rhs = sign(si, pm_moved) ^ sign(ti, pm);
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

pub fn koszul_homomorphism_holds(s: &Permutation, t: &Permutation, degs: &[i64]) -> bool {
    let st = s.compose(t);
    let t_inv = t.inverse();
    let permuted: Vec<i64> = (1..=degs.len()).map(|i| degs[t_inv.apply(i) - 1]).collect();
    crate::graded::koszul_sign(&st, degs).unwrap()
        == crate::graded::koszul_sign(s, &permuted).unwrap()
            * crate::graded::koszul_sign(t, degs).unwrap()
}

/// Random context for the dimension-formula comparison: four ext spaces of
/// one pairing with bounded dimensions and degrees.
pub fn random_formula_context(rng: &mut StdRng, max_dim: usize, max_deg: i64) -> SurfaceContext {
    let mut ctx = SurfaceContext::new();
    for (a, b) in [("E", "F"), ("E", "M"), ("L", "F"), ("L", "M")] {
        let space = random_space(
            rng,
            &format!("{}{}_", a.to_lowercase(), b.to_lowercase()),
            max_dim,
            max_deg,
        );
        ctx.set_ext(a, b, space);
    }
    ctx.validate().unwrap();
    ctx
}

/// Checks the three dimension routes of the main formulas on one context:
/// labeled basis, polynomial arithmetic, and the component-model
/// invariant count.
pub fn formula_routes_agree(ctx: &SurfaceContext, n: usize) -> Result<bool, String> {
    let p = hilbert::ext_taut_taut(ctx, "E", "L", "F", "M", n).map_err(|e| e.to_string())?;
    let poly =
        hilbert::ext_taut_taut_poincare(ctx, "E", "L", "F", "M", n).map_err(|e| e.to_string())?;
    if p.dims() != poly.dims() {
        return Ok(false);
    }
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
    let counted = equivariant::invariant_dims_by_degree(ctx, &model).map_err(|e| e.to_string())?;
    if p.dims() != counted {
        return Ok(false);
    }

    // taut -> det route (head ext(E,M), line ext(L,M))
    let td = hilbert::ext_taut_det(ctx, "E", "L", "M", n).map_err(|e| e.to_string())?;
    let td_poly =
        hilbert::ext_taut_det_poincare(ctx, "E", "L", "M", n).map_err(|e| e.to_string())?;
    if td.dims() != td_poly.dims() {
        return Ok(false);
    }
    let td_model = EqModel::new(
        n,
        Side::Taut {
            obj: "E".into(),
            line: "L".into(),
        },
        Side::Det { line: "M".into() },
    );
    let td_counted =
        equivariant::invariant_dims_by_degree(ctx, &td_model).map_err(|e| e.to_string())?;
    if td.dims() != td_counted {
        return Ok(false);
    }

    // det -> taut route (head ext(L,F), line ext(L,M))
    let dt = hilbert::ext_det_taut(ctx, "L", "F", "M", n).map_err(|e| e.to_string())?;
    let dt_poly =
        hilbert::ext_det_taut_poincare(ctx, "L", "F", "M", n).map_err(|e| e.to_string())?;
    if dt.dims() != dt_poly.dims() {
        return Ok(false);
    }
    let dt_model = EqModel::new(
        n,
        Side::Det { line: "L".into() },
        Side::Taut {
            obj: "F".into(),
            line: "M".into(),
        },
    );
    let dt_counted =
        equivariant::invariant_dims_by_degree(ctx, &dt_model).map_err(|e| e.to_string())?;
    if dt.dims() != dt_counted {
        return Ok(false);
    }

    // det -> det route
    let dd = hilbert::ext_det_det(ctx, "L", "M", n).map_err(|e| e.to_string())?;
    let dd_poly = hilbert::ext_det_det_poincare(ctx, "L", "M", n).map_err(|e| e.to_string())?;
    if dd.dims() != dd_poly.dims() {
        return Ok(false);
    }
    let dd_model = EqModel::new(
        n,
        Side::Det { line: "L".into() },
        Side::Det { line: "M".into() },
    );
    let dd_counted =
        equivariant::invariant_dims_by_degree(ctx, &dd_model).map_err(|e| e.to_string())?;
    Ok(dd.dims() == dd_counted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_small_sizes() {
        let reps = run_reps_suite(3, 11);
        assert!(reps.passed(), "{}", reps.render());
        let complex = run_complex_suite(4, 11, 5);
        assert!(complex.passed(), "{}", complex.render());
        let graded = run_graded_suite(3, 11);
        assert!(graded.passed(), "{}", graded.render());
    }

    #[test]
    fn yoneda_suite_small() {
        let r = run_yoneda_suite(3, 7, 25);
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn formula_routes_on_random_contexts() {
        let mut rng = rng_from_seed(3);
        for _ in 0..15 {
            let ctx = random_formula_context(&mut rng, 2, 2);
            let n = rng.random_range(2..=3usize);
            assert!(formula_routes_agree(&ctx, n).unwrap());
        }
    }

    #[test]
    fn random_modules_are_valid_and_roundtrip() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let ell = rng.random_range(2..=4usize);
            let m = random_permuted_module(&mut rng, ell);
            if m.is_transitive() {
                let rt = m.danila_roundtrip(0).unwrap();
                assert!(rt.is_isomorphism());
            }
        }
    }

    #[test]
    fn exterior_context_is_usable_for_products() {
        let ctx = exterior_context(&["E", "L", "F", "M", "G", "N"], 2);
        let mut a = PClass::zero("F", "M", "G", "N", 2);
        a.add_type1(&ctx, "w1", &["w2"], rati(1)).unwrap();
        let mut b = PClass::zero("E", "L", "F", "M", 2);
        b.add_type1(&ctx, "e", &["w1"], rati(1)).unwrap();
        let closed = yoneda::yoneda_closed(&ctx, &a, &b).unwrap();
        let oracle = yoneda::yoneda_oracle(&ctx, &a, &b).unwrap();
        assert_eq!(closed, oracle);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = run_yoneda_suite(3, 42, 5).render();
        let b = run_yoneda_suite(3, 42, 5).render();
        assert_eq!(a, b);
    }
}
