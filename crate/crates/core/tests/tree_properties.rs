use lexichron_core::{
    clades, parse_newick, random_reference_tree, simulate_distance_matrix, time_matrix, to_newick, upgma,
    DistanceMatrix, Square, PUBLISHED_PROFILE,
};
use proptest::prelude::*;

fn permuted(d: &DistanceMatrix, order: &[usize]) -> DistanceMatrix {
    let n = order.len();
    let mut values = Square::filled(n, 0.0);
    for i in 0..n {
        for j in 0..n {
            values.set(i, j, d.get(order[i], order[j]).unwrap());
        }
    }
    let labels = order.iter().map(|&i| d.languages()[i].clone()).collect();
    DistanceMatrix::from_values(labels, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn newick_parse_back(leaves in 2usize..25, seed in any::<u64>()) {
        let t = random_reference_tree(leaves, 100.0, 8000.0, seed).unwrap().0;
        let text = to_newick(&t);
        let back = parse_newick(&text).unwrap();
        prop_assert!(back.is_ultrametric());
        prop_assert_eq!(clades(&back), clades(&t));
        let (h1, h2) = (t.clade_heights(), back.clade_heights());
        for (c, h) in &h1 {
            prop_assert!((h2[c] - h).abs() < 1e-9, "{:?}: {} vs {}", c, h, h2[c]);
        }
    }

    #[test]
    fn upgma_ignores_input_order(leaves in 3usize..20, seed in any::<u64>(), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let reference = random_reference_tree(leaves, 100.0, 8000.0, seed).unwrap();
        let d = simulate_distance_matrix(&reference, &PUBLISHED_PROFILE).unwrap();
        let mut order: Vec<usize> = (0..leaves).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        let a = upgma(&time_matrix(&d, &PUBLISHED_PROFILE).unwrap()).unwrap();
        let b = upgma(&time_matrix(&permuted(&d, &order), &PUBLISHED_PROFILE).unwrap()).unwrap();
        prop_assert!(a.is_ultrametric() && b.is_ultrametric());
        prop_assert_eq!(to_newick(&a), to_newick(&b));
    }

    #[test]
    fn ultrametric_input_reproduced(leaves in 2usize..30, seed in any::<u64>()) {
        let reference = random_reference_tree(leaves, 100.0, 8000.0, seed).unwrap();
        let labels = reference.0.leaf_labels();
        let coph = reference.0.cophenetic(&labels).unwrap();
        let n = labels.len();
        let mut values = Square::filled(n, 0.0);
        for i in 0..n {
            for j in 0..n {
                values.set(i, j, coph[i][j] / 20000.0);
            }
        }
        let d = DistanceMatrix::from_values(labels.clone(), values).unwrap();
        let t = upgma(&d).unwrap();
        prop_assert!(t.is_ultrametric());
        let back = t.cophenetic(&labels).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(back[i][j], coph[i][j] / 20000.0);
            }
        }
    }
}
