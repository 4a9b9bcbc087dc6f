//! Property tests: randomized laws for the exact arithmetic and the
//! combinatorial kernels that everything else leans on.

use std::path::Path;

use num_traits::{One, Zero};
use proptest::prelude::*;

use moret::group::chain_factorize;
use moret::quiver::{load_instance_str, Instance};
use moret::rational::rat;
use moret::{CycNumber, Matrix};

fn load_d10() -> Instance {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/d10.json");
    load_instance_str(&std::fs::read_to_string(path).expect("fixture file"))
        .expect("fixture validates")
}

const CONDUCTORS: [u64; 7] = [1, 2, 3, 4, 5, 8, 12];

fn conductors() -> impl Strategy<Value = u64> {
    prop::sample::select(CONDUCTORS.to_vec())
}

/// A small element of ℚ(ζ_n): a rational combination of a few powers of ζ_n.
fn cyc_in(n: u64) -> impl Strategy<Value = CycNumber> {
    prop::collection::vec((0..n.max(1), -4i64..=4, 1i64..=4), 0..3).prop_map(move |parts| {
        let mut out = CycNumber::zero();
        for (k, num, den) in parts {
            out = out
                + CycNumber::root_of_unity(n, k as i64) * CycNumber::from_rational(rat(num, den));
        }
        out
    })
}

/// A conductor together with three scalars from its field.
fn field_triple() -> impl Strategy<Value = (u64, CycNumber, CycNumber, CycNumber)> {
    conductors().prop_flat_map(|n| {
        (Just(n), cyc_in(n), cyc_in(n), cyc_in(n))
    })
}

proptest! {
    #[test]
    fn field_axioms((_, a, b, c) in field_triple()) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!(
            a.clone() * (b.clone() + c.clone()),
            a.clone() * b.clone() + a.clone() * c.clone()
        );
        prop_assert_eq!(a.clone() + CycNumber::zero(), a.clone());
        prop_assert_eq!(a.clone() * CycNumber::one(), a.clone());
        prop_assert_eq!(a.clone() - a.clone(), CycNumber::zero());
    }

    #[test]
    fn nonzero_scalars_invert((_, a, _, _) in field_triple()) {
        prop_assume!(!a.is_zero());
        let inv = a.inv().expect("nonzero scalars are invertible");
        prop_assert_eq!(a * inv, CycNumber::one());
    }

    /// ζ_n has multiplicative order exactly n.
    #[test]
    fn roots_of_unity_have_exact_order(n in conductors()) {
        let zeta = CycNumber::root_of_unity(n, 1);
        prop_assert_eq!(zeta.pow(n as i64).expect("power"), CycNumber::one());
        for d in 1..n {
            if n % d == 0 {
                prop_assert_ne!(zeta.pow(d as i64).expect("power"), CycNumber::one());
            }
        }
    }

    /// Embedding ℚ(ζ_n) into ℚ(ζ_m) for n | m respects the field operations
    /// and equality.
    #[test]
    fn embedding_is_a_field_homomorphism(
        (n, a, b, _) in field_triple(),
        mult in 1u64..=4,
    ) {
        let m = n * mult;
        let ea = a.embed(m).expect("embeds");
        let eb = b.embed(m).expect("embeds");
        prop_assert_eq!((a.clone() + b.clone()).embed(m).expect("embeds"), ea.clone() + eb.clone());
        prop_assert_eq!((a.clone() * b.clone()).embed(m).expect("embeds"), ea.clone() * eb.clone());
        prop_assert_eq!(a.is_zero(), ea.is_zero());
    }

    /// rank A + dim ker A = number of columns, over the cyclotomic field.
    #[test]
    fn rank_nullity(
        n in conductors(),
        rows in 1usize..=4,
        cols in 1usize..=4,
        seed in prop::collection::vec((0u64..12, -3i64..=3, 1i64..=3), 16),
    ) {
        let a = Matrix::from_fn(rows, cols, |r, c| {
            let (k, num, den) = seed[(r * cols + c) % seed.len()];
            CycNumber::root_of_unity(n, (k % n.max(1)) as i64)
                * CycNumber::from_rational(rat(num, den))
        });
        let kernel = a.kernel_basis();
        prop_assert_eq!(a.rank() + kernel.len(), cols);
        for v in kernel {
            prop_assert!(a.mul(&v).is_zero());
        }
    }

    /// Solving A·x = A·x₀ yields a vector that remultiplies to the same
    /// right-hand side.
    #[test]
    fn solve_remultiplies(
        n in conductors(),
        rows in 1usize..=4,
        cols in 1usize..=4,
        seed in prop::collection::vec((0u64..12, -3i64..=3, 1i64..=3), 20),
    ) {
        let entry = |i: usize| {
            let (k, num, den) = seed[i % seed.len()];
            CycNumber::root_of_unity(n, (k % n.max(1)) as i64)
                * CycNumber::from_rational(rat(num, den))
        };
        let a = Matrix::from_fn(rows, cols, |r, c| entry(r * cols + c));
        let x0 = Matrix::from_fn(cols, 1, |r, _| entry(16 + r));
        let b = a.mul(&x0);
        let x = a.solve(&b).expect("a constructed right-hand side is solvable");
        prop_assert_eq!(a.mul(&x), b);
    }

    /// The chain factorization of a representative sequence lands its
    /// leftovers in the stabilizer and reassembles to the inverse of the
    /// full product.
    #[test]
    fn chain_factorization_round_trips(yseq in prop::collection::vec(0usize..10, 1..=5)) {
        let inst = load_d10();
        let group = &inst.group;
        let orbits = &inst.orbits;
        let stab = inst.stabilizer(0);
        let orbit_path = vec![0usize; yseq.len() + 1];
        let (xs, h0) = chain_factorize(group, orbits, &orbit_path, &yseq);
        prop_assert!(stab.contains(h0));
        for &x in &xs {
            prop_assert!(stab.coset_reps.contains(&x));
        }
        let mut xs_rev = xs;
        xs_rev.reverse();
        let reassembled = group.mul(group.product(&xs_rev), h0);
        prop_assert_eq!(reassembled, group.inv(group.product(&yseq)));
    }
}
