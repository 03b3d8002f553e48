use proptest::prelude::*;
use rsc_core::metrics::{max_matching_brute, max_matching_hungarian};
use rsc_core::{ami, ari, misclassification_rate, ConfusionTable, Membership};

fn membership(labels: Vec<usize>, k: usize) -> Membership {
    Membership::new(labels, k).unwrap()
}

/// Labels over `k` communities plus a relabeling permutation of `0..k`.
fn labels_and_perm() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>, usize)> {
    (1usize..=8).prop_flat_map(|k| {
        (
            proptest::collection::vec(0..k, 1..80),
            proptest::collection::vec(0..k, 80),
            Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
            Just(k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rate_properties((a, b, perm, k) in labels_and_perm()) {
        let n = a.len();
        let a = membership(a, k);
        let b = membership(b[..n].to_vec(), k);
        let relabeled = membership(a.labels().iter().map(|&g| perm[g]).collect(), k);

        let r = misclassification_rate(&a, &b).unwrap();
        prop_assert!((0.0..=2.0).contains(&r));
        prop_assert_eq!(r, misclassification_rate(&b, &a).unwrap());
        prop_assert_eq!(r, misclassification_rate(&relabeled, &b).unwrap());
        prop_assert_eq!(misclassification_rate(&a, &relabeled).unwrap(), 0.0);
        if r == 0.0 {
            prop_assert_eq!(ari(&a, &b).unwrap(), 1.0);
        }
    }

    #[test]
    fn ari_and_ami_ignore_label_names((a, b, perm, k) in labels_and_perm()) {
        let n = a.len();
        let a = membership(a, k);
        let b = membership(b[..n].to_vec(), k);
        let ra = membership(a.labels().iter().map(|&g| perm[g]).collect(), k);
        let rb = membership(b.labels().iter().map(|&g| perm[g]).collect(), k);
        let (x, y) = (ari(&a, &b).unwrap(), ari(&ra, &rb).unwrap());
        prop_assert!((x - y).abs() < 1e-12);
        let (x, y) = (ami(&a, &b).unwrap(), ami(&ra, &b).unwrap());
        prop_assert!((x - y).abs() < 1e-12);
        prop_assert!((ari(&a, &ra).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((ami(&a, &ra).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hungarian_matches_brute_force((a, b, _perm, k) in labels_and_perm()) {
        let n = a.len();
        let table = ConfusionTable::new(&membership(a, k), &membership(b[..n].to_vec(), k)).unwrap();
        prop_assert_eq!(max_matching_brute(&table.counts), max_matching_hungarian(&table.counts));
    }
}

#[test]
fn rate_is_zero_only_for_equivalent_partitions() {
    let a = membership(vec![0, 0, 1, 1, 2, 2], 3);
    let b = membership(vec![2, 2, 0, 0, 1, 1], 3);
    assert_eq!(misclassification_rate(&a, &b).unwrap(), 0.0);
    let c = membership(vec![2, 2, 0, 1, 1, 1], 3);
    assert!(misclassification_rate(&a, &c).unwrap() > 0.0);
}
