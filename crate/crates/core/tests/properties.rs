//! Property tests over randomly generated inputs.

use minmod_core::num::{rat, Rat};
use minmod_core::qforms::{hilbert, Place};
use minmod_core::sing::{cyclic_dx2, hj_det, hj_expand};
use num::Zero;
use proptest::prelude::*;

fn string_strategy() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(2u64..=9, 1..=6)
}

fn place_strategy() -> impl Strategy<Value = Place> {
    prop_oneof![
        Just(Place::Real),
        Just(Place::Prime(2)),
        Just(Place::Prime(3)),
        Just(Place::Prime(5)),
        Just(Place::Prime(7)),
        Just(Place::Prime(11)),
    ]
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| rat(n) / rat(d))
}

proptest! {
    /// Expanding the determinant pair of a string recovers the string.
    #[test]
    fn hj_expand_inverts_hj_det(string in string_strategy()) {
        let (q, q1) = hj_det(&string).unwrap();
        prop_assert_eq!(hj_expand(&q, &q1).unwrap(), string);
    }

    /// Reading a chain backwards flips (q, q1) to (q, q1^{-1} mod q) but
    /// leaves D_x^2 alone.
    #[test]
    fn chain_reversal_duality(string in string_strategy()) {
        let mut reversed = string.clone();
        reversed.reverse();
        let (q, q1) = hj_det(&string).unwrap();
        let (q_rev, q1_rev) = hj_det(&reversed).unwrap();
        prop_assert_eq!(&q, &q_rev);
        prop_assert_eq!((q1 * q1_rev) % q, num::BigInt::from(1));
        prop_assert_eq!(cyclic_dx2(&string).unwrap(), cyclic_dx2(&reversed).unwrap());
    }

    /// The Hilbert symbol is symmetric and square-class invariant.
    #[test]
    fn hilbert_symmetry_and_square_invariance(
        a in nonzero_rat(),
        b in nonzero_rat(),
        c in 1i64..=9,
        place in place_strategy(),
    ) {
        let ab = hilbert(&a, &b, place).unwrap();
        prop_assert_eq!(ab, hilbert(&b, &a, place).unwrap());
        let scaled = &a * rat(c * c);
        prop_assert!(!scaled.is_zero());
        prop_assert_eq!(ab, hilbert(&scaled, &b, place).unwrap());
    }
}
