mod common;

use common::{graph_from_mask, naive_has_alternating_cycle, naive_has_short_loop, naive_modularity};
use modbisect::bisection::load_balance_check;
use modbisect::bounds::spectral_gap;
use modbisect::io::{parse_partition, read_graph, write_edge_list, write_partition};
use modbisect::matching::{greedy_matching_with, verify_no_short_loops};
use modbisect::modularity::{
    brute_force_qstar, merge_delta, nearly_bisection_lower_bound, remainder_terms, score, two_part_score,
};
use modbisect::pipeline::five_term_decomposition;
use modbisect::{BandwidthMatching, Graph, MatchingOptions, Partition, Rational, Relabeling, VertexSet};
use proptest::prelude::*;

fn arb_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n, 0.15f64..0.7).prop_flat_map(|(n, p)| {
        let len = (n * (n - 1) / 2).max(1);
        prop::collection::vec(prop::bool::weighted(p), len).prop_map(move |mask| graph_from_mask(n, &mask))
    })
}

/// Graph with at least one edge plus per-vertex labels below `k`.
fn arb_labelled(max_n: usize, k: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    arb_graph(2, max_n)
        .prop_filter("needs an edge", |g| g.m() > 0)
        .prop_flat_map(move |g| {
            let n = g.n();
            (Just(g), prop::collection::vec(0..k, n))
        })
}

fn sets_from_labels(n: usize, labels: &[usize], k: usize) -> Vec<VertexSet> {
    (0..k)
        .map(|j| VertexSet::from_indices(n, (0..n).filter(|&v| labels[v] == j)).unwrap())
        .collect()
}

fn zero() -> Rational {
    Rational::from_integer(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn score_matches_pairwise_definition((g, labels) in arb_labelled(12, 5)) {
        let p = Partition::from_labels(&labels);
        let exact = score::<Rational>(&g, &p).unwrap();
        prop_assert_eq!(exact.q, naive_modularity(&g, &p));
        prop_assert_eq!(exact.q, exact.coverage - exact.degree_tax);
        let approx = score::<f64>(&g, &p).unwrap().q;
        prop_assert!((-0.5..=1.0).contains(&approx));
        let e = *exact.q.numer() as f64 / *exact.q.denom() as f64;
        prop_assert!((approx - e).abs() < 1e-12);
    }

    #[test]
    fn single_part_scores_zero((g, _) in arb_labelled(12, 1)) {
        prop_assert_eq!(score::<Rational>(&g, &Partition::single(g.n())).unwrap().q, zero());
    }

    #[test]
    fn two_part_score_is_exact((g, labels) in arb_labelled(12, 2)) {
        let a = sets_from_labels(g.n(), &labels, 2).remove(0);
        prop_assume!(!a.is_empty() && a.len() < g.n());
        let p = Partition::from_labels(&labels);
        prop_assert_eq!(two_part_score::<Rational>(&g, &a).unwrap(), score::<Rational>(&g, &p).unwrap().q);
    }

    #[test]
    fn five_terms_sum_to_two_part_score((g, labels) in arb_labelled(12, 4)) {
        let s = sets_from_labels(g.n(), &labels, 4);
        let terms = five_term_decomposition::<Rational>(&g, &s[0], &s[1], &s[2], &s[3]).unwrap();
        let side_a = s[0].union(&s[2]);
        prop_assume!(!side_a.is_empty() && side_a.len() < g.n());
        prop_assert_eq!(terms.sum(), two_part_score::<Rational>(&g, &side_a).unwrap());
    }

    #[test]
    fn nearly_bisection_bound_and_remainder_identity((g, labels) in arb_labelled(12, 3)) {
        let s = sets_from_labels(g.n(), &labels, 3);
        prop_assume!(3 * g.volume(&s[2]) <= 2 * g.m());
        let nb = nearly_bisection_lower_bound::<Rational>(&g, &s[0], &s[1], &s[2]).unwrap();
        prop_assert!(nb.lower_bound <= nb.actual_q);
        prop_assert!(nb.lower_bound <= nb.stated_bound);
        if s[2].is_empty() {
            prop_assert_eq!(nb.lower_bound, nb.stated_bound);
        }
        let rt = remainder_terms::<Rational>(&g, &s[0], &s[1], &s[2]).unwrap();
        prop_assert_eq!(rt.coverage - rt.degree_tax, nb.actual_q);
    }

    #[test]
    fn merge_delta_is_exact((g, labels) in arb_labelled(12, 4)) {
        let p = Partition::from_labels(&labels);
        prop_assume!(p.k() >= 2);
        let merged: Vec<usize> = p.part_of().iter().map(|&c| if c == 1 { 0 } else { c }).collect();
        let before = score::<Rational>(&g, &p).unwrap().q;
        let after = score::<Rational>(&g, &Partition::from_labels(&merged)).unwrap().q;
        prop_assert_eq!(after - before, merge_delta::<Rational>(&g, &p, 0, 1).unwrap());
    }

    #[test]
    fn load_balancing_holds(
        mut f in prop::collection::vec(-50.0f64..50.0, 2..200),
        bandwidth in 1usize..12,
        picks in prop::collection::vec((0usize..1000, 0usize..1000, any::<bool>()), 0..100),
    ) {
        f.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = f.len();
        let mut used = vec![false; n];
        let mut pairs = Vec::new();
        for (i, off, flip) in picks {
            let i = i % n;
            let j = i + 1 + off % bandwidth;
            if j < n && !used[i] && !used[j] {
                used[i] = true;
                used[j] = true;
                pairs.push(if flip { (j, i) } else { (i, j) });
            }
        }
        prop_assert!(load_balance_check(&f, &pairs, bandwidth).unwrap().holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn short_loop_verifier_matches_naive_search(
        g in arb_graph(2, 9),
        order in Just(()).prop_perturb(|_, mut rng| {
            let mut v: Vec<usize> = (0..9).collect();
            for i in (1..9).rev() {
                v.swap(i, rng.random_range(0..=i));
            }
            v
        }),
        pair_count in 1usize..=4,
    ) {
        let n = g.n();
        let vs: Vec<usize> = order.into_iter().filter(|&v| v < n).collect();
        let pairs: Vec<(usize, usize)> = vs.chunks_exact(2).take(pair_count).map(|c| (c[0], c[1])).collect();
        prop_assume!(!pairs.is_empty());
        let m = BandwidthMatching::from_pairs(n, &pairs, n).unwrap();
        let report = verify_no_short_loops(&g, &m).unwrap();
        prop_assert_eq!(report.definition_ok, !naive_has_short_loop(&g, m.pairs()));
        prop_assert_eq!(report.condition2_ok, !naive_has_alternating_cycle(&g, m.pairs()));
    }

    #[test]
    fn permissive_matching_has_no_short_loops(g in arb_graph(2, 10)) {
        let opts = MatchingOptions { depth: Some(3), ..MatchingOptions::permissive() };
        let m = greedy_matching_with(&g, &opts).unwrap().matching;
        prop_assert!(m.bandwidth_observed() <= m.delta9_budget());
        prop_assert!(!naive_has_short_loop(&g, m.pairs()));
        prop_assert!(!naive_has_alternating_cycle(&g, m.pairs()));
        prop_assert!(verify_no_short_loops(&g, &m).unwrap().passed());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn qstar_dominates_and_respects_spectral_cap((g, labels) in arb_labelled(9, 4)) {
        let qs = brute_force_qstar(&g).unwrap();
        prop_assert!(qs.value >= score::<Rational>(&g, &Partition::from_labels(&labels)).unwrap().q);
        prop_assert_eq!(score::<Rational>(&g, &qs.partition).unwrap().q, qs.value);
        if g.min_degree() > 0 {
            let gap = spectral_gap(&g).unwrap();
            prop_assert!(qs.value_f64() <= gap.lambda_bar + 1e-9);
        }
    }

    #[test]
    fn relabelling_preserves_scores(
        (g, labels) in arb_labelled(9, 3),
        seed in any::<u64>(),
    ) {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let relabel = Relabeling::from_new_to_old(n, perm.clone()).unwrap();
        let h = g.permuted(&relabel).unwrap();
        let moved: Vec<usize> = (0..n).map(|new| labels[perm[new]]).collect();
        prop_assert_eq!(
            score::<Rational>(&g, &Partition::from_labels(&labels)).unwrap().q,
            score::<Rational>(&h, &Partition::from_labels(&moved)).unwrap().q
        );
        prop_assert_eq!(brute_force_qstar(&g).unwrap().value, brute_force_qstar(&h).unwrap().value);
    }

    #[test]
    fn io_roundtrips((g, labels) in arb_labelled(12, 4)) {
        let text = write_edge_list(&g, &["roundtrip".to_string()]);
        prop_assert_eq!(read_graph(&text, false).unwrap(), g.clone());
        let p = Partition::from_labels(&labels);
        prop_assert_eq!(parse_partition(&write_partition(&p), g.n()).unwrap(), p);
    }
}

#[test]
fn short_loop_oracle_sweep_sees_both_outcomes() {
    use rand::{Rng, SeedableRng, seq::SliceRandom};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (mut loops, mut clean, mut cycles) = (0, 0, 0);
    for _ in 0..3000 {
        let n = rng.random_range(4..=10);
        let p = rng.random_range(0.1..0.45);
        let mask: Vec<bool> = (0..n * (n - 1) / 2).map(|_| rng.random_bool(p)).collect();
        let g = graph_from_mask(n, &mask);
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(&mut rng);
        let k = rng.random_range(1..=n / 2);
        let pairs: Vec<(usize, usize)> = vs.chunks_exact(2).take(k).map(|c| (c[0], c[1])).collect();
        let m = BandwidthMatching::from_pairs(n, &pairs, n).unwrap();
        let report = verify_no_short_loops(&g, &m).unwrap();
        let naive_loop = naive_has_short_loop(&g, m.pairs());
        let naive_cycle = naive_has_alternating_cycle(&g, m.pairs());
        assert_eq!(report.definition_ok, !naive_loop, "graph {:?} pairs {:?}", g.edges(), pairs);
        assert_eq!(report.condition2_ok, !naive_cycle, "graph {:?} pairs {:?}", g.edges(), pairs);
        if naive_loop { loops += 1 } else { clean += 1 }
        if naive_cycle { cycles += 1 }
    }
    println!("loops {loops} clean {clean} cycles {cycles}");
    assert!(loops > 100 && clean > 100 && cycles > 100, "loops {loops} clean {clean} cycles {cycles}");
}
