use delayed_opinions::discrete::augment_weights;
use delayed_opinions::fixtures::{layered_example, w_m, w_t, w_tm};
use delayed_opinions::graph::{
    compressed_arcs, is_structurally_balanced, period, scc_decompose, Partition, Periodicity,
};
use delayed_opinions::lemmas::{check_lemmas, random_signed_graph, verify_lemmas};
use delayed_opinions::SignedWeightMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `reach[a][b]`: a directed path of length >= 0 from `a` to `b`, with
/// arcs `j -> i` whenever `w[i][j] != 0`.
fn warshall(w: &SignedWeightMatrix) -> Vec<Vec<bool>> {
    let n = w.n();
    let mut r: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| a == b || w.get(b, a) != 0.0).collect())
        .collect();
    for k in 0..n {
        for a in 0..n {
            if r[a][k] {
                let via = r[k].clone();
                for (dst, &hop) in r[a].iter_mut().zip(&via) {
                    *dst |= hop;
                }
            }
        }
    }
    r
}

/// Components as sorted node sets plus closedness, from the transitive closure.
fn oracle_components(w: &SignedWeightMatrix) -> Vec<(Vec<usize>, bool)> {
    let n = w.n();
    let r = warshall(w);
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&b| r[a][b] && r[b][a]).collect();
        for &b in &comp {
            seen[b] = true;
        }
        let closed = (0..n).all(|x| comp.contains(&x) || !r[x][a]);
        out.push((comp, closed));
    }
    out
}

/// Balance by trying every 2-colouring.
fn brute_force_balanced(w: &SignedWeightMatrix) -> bool {
    let n = w.n();
    (0u32..1 << n).any(|mask| {
        (0..n).all(|i| {
            (0..n).all(|j| {
                let v = w.get(i, j);
                let same = (mask >> i & 1) == (mask >> j & 1);
                v == 0.0 || (same && v > 0.0) || (!same && v < 0.0)
            })
        })
    })
}

/// gcd of the lengths `k <= n` that admit a closed walk.
fn closed_walk_period(w: &SignedWeightMatrix) -> Periodicity {
    let n = w.n();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| w.get(i, j) != 0.0).collect())
        .collect();
    let mut power = adj.clone();
    let mut g = 0u64;
    for k in 1..=n as u64 {
        if (0..n).any(|i| power[i][i]) {
            g = gcd(g, k);
        }
        power = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).any(|m| power[i][m] && adj[m][j]))
                    .collect()
            })
            .collect();
    }
    if g == 0 {
        Periodicity::Acyclic
    } else {
        Periodicity::Period(g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn signed_graph() -> impl Strategy<Value = SignedWeightMatrix> {
    (1usize..=8, any::<u64>(), 0.05f64..0.6).prop_map(|(n, seed, density)| {
        random_signed_graph(n, density, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

#[test]
fn reference_networks_have_expected_structure() {
    for w in [w_tm(), w_t(), w_m()] {
        let s = scc_decompose(&w);
        assert_eq!(s.components, vec![vec![0, 1, 3, 4], vec![2]]);
        assert_eq!(s.closed, vec![true, false]);
    }
    assert!(!is_structurally_balanced(&w_tm()).balanced);
    assert!(is_structurally_balanced(&w_t()).balanced);
}

#[test]
fn layered_example_keeps_one_closed_and_one_open_component() {
    let w = layered_example();
    for tau in 0..4 {
        let a = augment_weights(&w, tau);
        let s = scc_decompose(&a);
        assert_eq!((s.closed_count(), s.open_count()), (1, 1), "tau {tau}");
    }
}

#[test]
fn lemma_harness_passes_on_many_trials() {
    let checks = verify_lemmas(8, 4, 300, 2024).unwrap();
    assert!(checks.iter().all(|c| c.passed()));
    // The draw covers both balanced and unbalanced graphs.
    assert!(checks.iter().any(|c| c.balanced_w));
    assert!(checks.iter().any(|c| !c.balanced_w));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scc_matches_transitive_closure(w in signed_graph()) {
        let s = scc_decompose(&w);
        let mut ours: Vec<(Vec<usize>, bool)> =
            s.components.iter().cloned().zip(s.closed.iter().copied()).collect();
        let mut oracle = oracle_components(&w);
        ours.sort();
        oracle.sort();
        prop_assert_eq!(ours, oracle);
    }

    #[test]
    fn scc_invariant_under_relabelling(w in signed_graph(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = w.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = w.permuted(&perm);
        let a = scc_decompose(&w);
        let b = scc_decompose(&p);
        prop_assert_eq!(a.len(), b.len());
        prop_assert_eq!(a.closed_count(), b.closed_count());
        let mut sa: Vec<usize> = a.components.iter().map(Vec::len).collect();
        let mut sb: Vec<usize> = b.components.iter().map(Vec::len).collect();
        sa.sort();
        sb.sort();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn balance_matches_brute_force(w in signed_graph()) {
        let r = is_structurally_balanced(&w);
        prop_assert_eq!(r.balanced, brute_force_balanced(&w));
        if r.balanced {
            prop_assert!(r.witness_holds(&w));
        }
    }

    #[test]
    fn period_matches_closed_walks(w in signed_graph()) {
        // The walk oracle is global, so compare on strongly connected graphs.
        prop_assume!(scc_decompose(&w).len() == 1);
        prop_assert_eq!(period(&w), closed_walk_period(&w));
    }

    #[test]
    fn augmented_arcs_compress_to_original(w in signed_graph(), tau in 0usize..=4) {
        let n = w.n();
        let c = compressed_arcs(&augment_weights(&w, tau), &Partition::layers(n, tau)).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    prop_assert_eq!(c.get(i, j) != 0.0, w.get(i, j) != 0.0);
                }
            }
        }
    }

    #[test]
    fn augmentation_preserves_closed_components_and_balance(w in signed_graph(), tau in 0usize..=4) {
        let c = check_lemmas(&w, tau).unwrap();
        prop_assert!(c.cscc_count_equal(), "{:?}", c);
        prop_assert!(c.balance_equivalent(), "{:?}", c);
    }
}
