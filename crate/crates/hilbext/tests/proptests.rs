//! Property tests driving the randomized generators through proptest.

use hilbext::context::SurfaceContext;
use hilbext::graded::{
    koszul_sign, sym_power, sym_power_poincare, tensor_power_invariants_dims, GradedSpace,
    SymElement, TensorSpace,
};
use hilbext::linalg::rati;
use hilbext::signs::{eps_sigma_m, Permutation, Subset};
use hilbext::verify::{
    koszul_homomorphism_holds, random_formula_context, random_pclass, random_permutation,
    random_yoneda_context,
};
use hilbext::yoneda::{yoneda_closed, yoneda_oracle};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just(n).prop_perturb(move |n, mut rng| {
        let mut images: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            images.swap(i, j);
        }
        Permutation::from_images(images).unwrap()
    })
}

proptest! {
    #[test]
    fn koszul_sign_homomorphism(
        seed in any::<u64>(),
        k in 1usize..=7,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_permutation(&mut rng, k);
        let t = random_permutation(&mut rng, k);
        let degs: Vec<i64> = (0..k).map(|_| rng.random_range(-2..=3i64)).collect();
        prop_assert!(koszul_homomorphism_holds(&s, &t, &degs));
    }

    #[test]
    fn restricted_sign_cocycle(
        s in perm_strategy(5),
        t in perm_strategy(5),
        mask in 0u32..32,
    ) {
        let members = (1..=5usize).filter(|i| mask & (1 << (i - 1)) != 0);
        let m = Subset::new(5, members).unwrap();
        let st = s.compose(&t);
        prop_assert_eq!(
            eps_sigma_m(&st, &m).unwrap(),
            eps_sigma_m(&s, &m.image_under(&t)).unwrap() * eps_sigma_m(&t, &m).unwrap()
        );
    }

    #[test]
    fn symmetrization_section_roundtrip(
        seed in any::<u64>(),
        n in 1usize..=4,
    ) {
        // expansion is a section of symmetrization on every monomial, and
        // lands in the signed-invariant subspace
        let mut rng = StdRng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3usize);
        let degs: Vec<i64> = (0..dim).map(|_| rng.random_range(0..=3i64)).collect();
        let v = GradedSpace::with_degrees("v", &degs);
        let sym = sym_power(&v, n);
        let ts = TensorSpace::power(&v, n);
        for monomial in sym.basis().iter().take(6) {
            let mut elem = SymElement::zero();
            elem.add_term(monomial.clone(), rati(1));
            let tensor = sym.expand(&elem);
            let back = ts.symmetrize(&tensor).unwrap();
            prop_assert_eq!(back.coeff(monomial), rati(1));
            prop_assert_eq!(back.terms().count(), 1);
            if n >= 2 {
                let swap = Permutation::transposition(n, 1, 2);
                prop_assert_eq!(ts.permute(&tensor, &swap), tensor);
            }
        }
    }

    #[test]
    fn sym_dims_match_projector_and_generating_function(
        seed in any::<u64>(),
        n in 0usize..=4,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dim = rng.random_range(0..=3usize);
        let degs: Vec<i64> = (0..dim).map(|_| rng.random_range(0..=3i64)).collect();
        let v = GradedSpace::with_degrees("v", &degs);
        let s = sym_power(&v, n);
        prop_assert_eq!(s.dims(), tensor_power_invariants_dims(&v, n));
        prop_assert_eq!(s.poincare(), sym_power_poincare(&v, n));
    }

    #[test]
    fn context_json_roundtrip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let ctx = random_formula_context(&mut rng, 3, 3);
        let json = ctx.to_json_string();
        let back = SurfaceContext::from_json_str(&json).unwrap();
        prop_assert_eq!(&back, &ctx);
        prop_assert_eq!(back.to_json_string(), json);
    }

    #[test]
    fn product_engines_agree_on_seeds(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.random_range(2..=3usize);
        let ctx = random_yoneda_context(&mut rng, 2, 2);
        let a = random_pclass(&mut rng, &ctx, "F", "M", "G", "N", n);
        let b = random_pclass(&mut rng, &ctx, "E", "L", "F", "M", n);
        let closed = yoneda_closed(&ctx, &a, &b).unwrap();
        let oracle = yoneda_oracle(&ctx, &a, &b).unwrap();
        prop_assert_eq!(closed, oracle);
    }

    #[test]
    fn koszul_identity_is_positive(k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let degs: Vec<i64> = (0..k).map(|_| rng.random_range(0..=3i64)).collect();
        prop_assert_eq!(koszul_sign(&Permutation::identity(k), &degs).unwrap(), 1);
    }
}
