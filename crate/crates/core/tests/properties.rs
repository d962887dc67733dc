use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttns::entropy::{majorizes, renyi_entropy};
use ttns::network::{contract, exact_decompose};
use ttns::state::schmidt_decompose;
use ttns::targets::{entropy_profile, make_named, NamedState};
use ttns::truncation::{edge_spectra, min_bond_dims, truncate_lazy, truncate_projector, verify_sandwich};
use ttns::{Budget, TreeGraph, TruncationPlan};

fn tree_strategy(max_sites: usize) -> impl Strategy<Value = TreeGraph> {
    (1..=max_sites, any::<u64>(), prop::collection::vec(1usize..=3, max_sites)).prop_map(|(n, seed, dims)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TreeGraph::random(&dims[..n], &mut rng).unwrap()
    })
}

/// Random edge list over shuffled labels, plus dims.
fn edge_list_strategy() -> impl Strategy<Value = (Vec<(usize, usize)>, Vec<usize>)> {
    (2usize..=9)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (2..=n).map(|k| 1..k).collect();
            (Just(n), parents, Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
        })
        .prop_map(|(n, parents, perm)| {
            let edges = parents.iter().enumerate().map(|(k, &p)| (perm[k + 1], perm[p - 1])).collect();
            let dims = (1..=n).map(|v| 1 + v % 3).collect();
            (edges, dims)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalization_is_idempotent((edges, dims) in edge_list_strategy(), hint in prop::option::of(1usize..=9)) {
        let hint = hint.filter(|&h| h <= dims.len());
        let (t, map) = TreeGraph::from_edge_list(&edges, &dims, hint).unwrap();
        let (again, map2) = t.canonicalize();
        prop_assert_eq!(&again, &t);
        prop_assert!(map2.is_identity());
        // relabeling is a bijection carrying dims along
        let mut seen = map.old_to_new.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (1..=dims.len()).collect::<Vec<_>>());
        for (old, &d) in dims.iter().enumerate() {
            prop_assert_eq!(t.dim(map.new_label(old + 1)), d);
        }
        prop_assert_eq!(t.root(), t.n());
        for v in 1..=t.n() {
            for w in 1..=t.n() {
                if t.depth(v) > t.depth(w) {
                    prop_assert!(v < w);
                }
            }
        }
    }

    #[test]
    fn branches_nest_or_are_disjoint(tree in tree_strategy(10)) {
        for i in tree.edges() {
            let l = tree.branch(i).unwrap();
            let r = tree.remainder(i).unwrap();
            prop_assert_eq!(l.len() + r.len(), tree.n());
            prop_assert!(l.iter().all(|v| !r.contains(v)));
            for &j in &l {
                if j != tree.root() {
                    let lj = tree.branch(j).unwrap();
                    prop_assert!(lj.iter().all(|v| l.contains(v)));
                }
            }
        }
    }

    #[test]
    fn relabeled_state_has_same_profile((edges, dims) in edge_list_strategy(), seed in any::<u64>()) {
        let (tree, map) = TreeGraph::from_edge_list(&edges, &dims, None).unwrap();
        let original = make_named(NamedState::Random, &dims, Some(seed)).unwrap();
        let moved = original.relabel(&map).unwrap();
        prop_assert!(moved.unrelabel(&map).unwrap().max_abs_diff(&original).unwrap() == 0.0);
        let alphas = [0.5, 1.0, 2.0];
        let prof = entropy_profile(&moved, &tree, &alphas).unwrap();
        // same cuts evaluated in original labels
        let back = map.new_to_old();
        for e in &prof.edges {
            let part: Vec<usize> = tree.branch(e.edge).unwrap().iter().map(|&v| back[v - 1]).collect();
            let sp = schmidt_decompose(&original, &part).unwrap().spectrum;
            for (k, &a) in alphas.iter().enumerate() {
                let s = renyi_entropy(&sp.weights(), a).unwrap();
                prop_assert!((s - e.entropies[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn schmidt_spectrum_is_swap_invariant(n in 2usize..=7, cut in 1usize..7, seed in any::<u64>()) {
        let cut = cut.min(n - 1);
        let dims: Vec<usize> = (0..n).map(|k| 2 + k % 2).collect();
        let s = make_named(NamedState::Random, &dims, Some(seed)).unwrap();
        let a: Vec<usize> = (1..=cut).collect();
        let b: Vec<usize> = (cut + 1..=n).collect();
        let la = schmidt_decompose(&s, &a).unwrap().spectrum.coefficients;
        let lb = schmidt_decompose(&s, &b).unwrap().spectrum.coefficients;
        for (x, y) in la.iter().zip(&lb) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let total: f64 = la.iter().map(|l| l * l).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_reconstructs(tree in tree_strategy(9), seed in any::<u64>()) {
        let s = make_named(NamedState::Random, tree.dims(), Some(seed)).unwrap();
        let t = exact_decompose(&s, &tree).unwrap();
        prop_assert!(contract(&t).unwrap().max_abs_diff(&s).unwrap() < 1e-10);
    }

    #[test]
    fn truncation_orderings(tree in tree_strategy(8), seed in any::<u64>(), cap in 1usize..4) {
        prop_assume!(tree.n() >= 2);
        let s = make_named(NamedState::Random, tree.dims(), Some(seed)).unwrap();
        let exact = exact_decompose(&s, &tree).unwrap();
        let plan = TruncationPlan::uniform(tree.n() - 1, cap);
        let p = truncate_projector(&exact, &plan).unwrap();
        prop_assert!(verify_sandwich(&p).passed());
        let l = truncate_lazy(&s, &tree, &plan).unwrap();
        let eps_prime = l.eps_prime.clone().unwrap();
        prop_assert!((l.delta - eps_prime.iter().sum::<f64>()).abs() < 1e-12);
        prop_assert!(l.delta >= eps_prime.iter().copied().fold(0.0, f64::max) - 1e-12);

        // larger caps never raise any eps_i
        let wider = truncate_projector(&exact, &TruncationPlan::uniform(tree.n() - 1, cap + 1)).unwrap();
        for (a, b) in wider.eps.iter().zip(&p.eps) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn min_bond_dims_meet_budget(tree in tree_strategy(8), seed in any::<u64>(), eps in 0.001f64..0.9) {
        prop_assume!(tree.n() >= 2);
        let s = make_named(NamedState::Random, tree.dims(), Some(seed)).unwrap();
        let spectra = edge_spectra(&s, &tree).unwrap();
        let m = min_bond_dims(&spectra, Budget::PerEdge(eps));
        for (sp, &mi) in spectra.iter().zip(&m) {
            prop_assert!(ttns::state::truncation_error(sp, mi) <= eps);
            prop_assert!(mi == 1 || ttns::state::truncation_error(sp, mi - 1) > eps);
        }
    }

    #[test]
    fn renyi_is_nonincreasing_and_schur_concave(raw in prop::collection::vec(0.0f64..1.0, 2..12)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        let grid = [0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0];
        let s: Vec<f64> = grid.iter().map(|&a| renyi_entropy(&p, a).unwrap()).collect();
        for w in s.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        // moving weight from the tail to the head gives a majorizing distribution
        let mut q = p.clone();
        let k = q.len() - 1;
        let moved = q[k] / 2.0;
        q[k] -= moved;
        q[0] += moved;
        prop_assert!(majorizes(&q, &p));
        for &a in &grid {
            prop_assert!(renyi_entropy(&q, a).unwrap() <= renyi_entropy(&p, a).unwrap() + 1e-12);
        }
    }
}
