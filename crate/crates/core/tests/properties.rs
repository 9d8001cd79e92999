use persym_core::closedform::{full_rank_poly, ClosedFormFamily};
use persym_core::enumeration::{enumerate_exact, enumerate_range, merge, seeded_tuples};
use persym_core::persym::{build_stacked, index_bits, index_from_tuple, tuple_from_index};
use persym_core::polysys::{exponential_sum_direct, exponential_sum_from_rank};
use persym_core::{BigInt, FamilyId, RangePolicy, SequenceTuple};
use proptest::prelude::*;

fn tuple() -> impl Strategy<Value = SequenceTuple> {
    (1usize..=4, 1usize..=8)
        .prop_flat_map(|(n, k)| proptest::collection::vec(0u64..(1 << (k + 1)), n).prop_map(move |s| (k, s)))
        .prop_map(|(k, seqs)| SequenceTuple::new(k, seqs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expsum_equals_power_of_rank(t in tuple()) {
        let r = build_stacked(&t).rank();
        prop_assert_eq!(exponential_sum_direct(&t).unwrap(), exponential_sum_from_rank(t.n(), t.k(), r));
    }

    #[test]
    fn block_order_does_not_change_rank(t in tuple(), rot in 0usize..4) {
        let n = t.n();
        let order: Vec<usize> = (0..n).map(|j| (j + rot) % n).rev().collect();
        prop_assert_eq!(build_stacked(&t.permuted(&order)).rank(), build_stacked(&t).rank());
    }

    #[test]
    fn index_round_trip(t in tuple()) {
        let idx = index_from_tuple(&t);
        prop_assert!(idx < 1u128 << index_bits(t.n(), t.k()));
        prop_assert_eq!(tuple_from_index(idx, t.n(), t.k()).unwrap(), t);
    }

    #[test]
    fn any_split_merges_to_the_full_sweep(n in 1usize..=3, k in 1usize..=4, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let end = 1u64 << index_bits(n, k);
        let (lo, hi) = {
            let (x, y) = ((a * end as f64) as u64, (b * end as f64) as u64);
            (x.min(y), x.max(y))
        };
        let parts = [
            enumerate_range(n, k, 0..lo).unwrap(),
            enumerate_range(n, k, lo..hi).unwrap(),
            enumerate_range(n, k, hi..end).unwrap(),
        ];
        prop_assert_eq!(merge(&parts).unwrap(), enumerate_exact(n, k, 1).unwrap());
    }

    #[test]
    fn closed_forms_are_integral_in_range(i in 0usize..=12, k in 12u32..40) {
        let n6 = ClosedFormFamily::new(FamilyId::N6).unwrap();
        let v = n6.gamma(i, k, RangePolicy::Enforce).unwrap();
        prop_assert!(v > BigInt::from(0));
    }
}

#[test]
fn seeded_tuples_are_reproducible() {
    let a = seeded_tuples(3, 6, 50, 7).unwrap();
    assert_eq!(a, seeded_tuples(3, 6, 50, 7).unwrap());
    assert_ne!(a, seeded_tuples(3, 6, 50, 8).unwrap());
    assert!(a.iter().all(|t| t.n() == 3 && t.k() == 6));
}

#[test]
fn top_rank_of_the_table_is_the_product_formula() {
    let n6 = ClosedFormFamily::new(FamilyId::N6).unwrap();
    assert_eq!(n6.poly(12).unwrap(), &full_rank_poly(6));
}
