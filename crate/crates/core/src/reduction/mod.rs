//! Approximate answer counting through a homomorphism decision oracle.
//!
//! Answers of (φ,D) are the edges of an ℓ-partite ℓ-uniform hypergraph
//! G(φ,D) that is never materialised. Emptiness of its induced
//! subhypergraphs is decided by colour coding: for random two-colourings of
//! the domain, one per disequality, a homomorphism Â(φ) → B̂ witnesses an
//! answer whose disequal variables received different colours.

mod count;
mod hat;
mod oracle;

pub use count::{
    approx_count_answers, approx_count_answers_with, count_edges_exact_oracle, estimate_edges,
    exact_call_bound, median_groups, single_walk_estimate, ApproxConfig, ApproxCount,
    EdgeEstimate, EstimatorConfig, ExactCount,
};
pub use hat::{
    build_hat_a, build_hat_b, colour_symbols, layer_symbol, ColouringFamily, HatBase,
    ImplicitAnswerHypergraph, PartiteSubset,
};
pub use oracle::{
    colouring_repetitions, edgefree_bruteforce, edgefree_general, edgefree_restricted,
    BruteForceEdgeFree, BruteForceHom, ColourCodingEdgeFree, EdgeFreeOracle, HomBackend,
    HomOracle, OracleStats, TdDpHom,
};

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::homsolver::{
        build_a, count_answers_bruteforce, find_homomorphism, is_solution, structure_size,
    };
    use crate::qmodel::{gen_hampath, gen_random, parse_query, query_size, Database, Graph, RandomParams};

    fn k4() -> Graph {
        Graph::from_edges(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]).unwrap()
    }

    fn tiny_params(seed: u64) -> RandomParams {
        let mut p = RandomParams::new(4, 3, 3, 0.3, 0.3, seed);
        p.max_negated = 1;
        p.max_disequalities = 2;
        p
    }

    fn random_restricted(rng: &mut ChaCha8Rng, ell: usize, domain: usize) -> PartiteSubset {
        PartiteSubset::restricted(
            (0..ell)
                .map(|_| (0..domain).filter(|_| rng.gen_bool(0.5)).take(3).collect())
                .collect(),
        )
    }

    #[test]
    fn hat_a_shape_and_size() {
        let q = parse_query("phi(x,y) :- E(x,y)").unwrap();
        let a = build_hat_a(&q);
        assert_eq!(a.relations().count(), build_a(&q).relations().count() + 2);

        let q = parse_query("phi(x,y) :- E(x,y), x != y").unwrap();
        let a = build_hat_a(&q);
        let (r, b) = colour_symbols(0, 1);
        assert!(a.relation(&r).unwrap().contains(&[0]));
        assert!(a.relation(&b).unwrap().contains(&[1]));

        for seed in 0..200 {
            let (q, _) = gen_random(&tiny_params(seed)).unwrap();
            let a = build_hat_a(&q);
            let size = query_size(&q);
            assert!(structure_size(&a) <= 5 * size * size);
            let unary = a.relations().count() - build_a(&q).relations().count();
            assert_eq!(unary, q.num_vars() + 2 * q.disequalities().len());
            assert!(unary <= 2 * q.num_vars() * q.num_vars());
        }
    }

    #[test]
    fn hat_b_colour_relations_partition_universe() {
        let (q, d) = gen_hampath(&k4(), 4).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let deq = q.disequalities().len();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ColouringFamily::random(deq, d.domain_size(), &mut rng);
        let b = build_hat_b(&ih, &ih.full_subset(), &f).unwrap();
        for &(i, j) in q.disequalities() {
            let (r, bl) = colour_symbols(i, j);
            let red = &b.relation(&r).unwrap().tuples;
            let blue = &b.relation(&bl).unwrap().tuples;
            assert!(red.is_disjoint(blue));
            assert_eq!(red.len() + blue.len(), b.universe_size());
        }
        let all_red = ColouringFamily {
            colours: vec![vec![true; d.domain_size()]; deq],
        };
        let b = build_hat_b(&ih, &ih.full_subset(), &all_red).unwrap();
        let (_, bl) = colour_symbols(0, 1);
        assert!(b.relation(&bl).unwrap().is_empty());
        assert!(find_homomorphism(ih.hat_a(), &b).unwrap().is_none());
    }

    #[test]
    fn edgefree_bruteforce_cases() {
        let (q, d) = gen_hampath(&k4(), 4).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        assert!(!edgefree_bruteforce(&ih, &ih.full_subset()).unwrap());
        let mut parts = vec![(0..4).collect::<BTreeSet<_>>(); 4];
        parts[2].clear();
        assert!(edgefree_bruteforce(&ih, &PartiteSubset::restricted(parts)).unwrap());
        let single = |v: &[usize]| PartiteSubset::restricted(v.iter().map(|&x| [x].into()).collect());
        assert!(!edgefree_bruteforce(&ih, &single(&[0, 1, 2, 3])).unwrap());
        assert!(edgefree_bruteforce(&ih, &single(&[0, 0, 2, 3])).unwrap());
    }

    #[test]
    fn colour_coding_equivalence_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..25 {
            let (q, d) = gen_random(&tiny_params(seed)).unwrap();
            let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
            let deq = q.disequalities().len();
            let families = 1u64 << (deq * d.domain_size());
            for _ in 0..10 {
                let vs = random_restricted(&mut rng, ih.ell(), d.domain_size());
                let truth = !edgefree_bruteforce(&ih, &vs).unwrap();
                let values = vs.restricted_values().unwrap();
                let exists_f = values.iter().all(|v| !v.is_empty()) && {
                    let base = HatBase::new(&ih, &values).unwrap();
                    (0..families).any(|i| {
                        let f = ColouringFamily::nth(deq, d.domain_size(), i);
                        find_homomorphism(ih.hat_a(), &base.with_colouring(&f)).unwrap().is_some()
                    })
                };
                assert_eq!(exists_f, truth, "seed {seed}");
            }
        }
    }

    #[test]
    fn repetition_count() {
        assert_eq!(colouring_repetitions(0.01, 1).unwrap(), 20);
        assert_eq!(colouring_repetitions(0.5, 0).unwrap(), 1);
        assert!(colouring_repetitions(1.0, 0).is_err());
    }

    #[test]
    fn restricted_is_exact_without_disequalities() {
        let q = parse_query("phi(x) :- E(x,y)").unwrap();
        let d = Database::from_json(r#"{"domain":[1,2,3],"relations":{"E":{"arity":2,"tuples":[[1,2]]}}}"#)
            .unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut stats = OracleStats::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hom = BruteForceHom;
        for v in 0..3 {
            let vs = PartiteSubset::restricted(vec![[v].into()]);
            let got = edgefree_restricted(&ih, &vs, &mut hom, 0.5, &mut rng, &mut stats).unwrap();
            assert_eq!(got, v != 0);
        }
        assert_eq!(stats.colourings_sampled, 0);
    }

    #[test]
    fn general_agrees_with_bruteforce_and_is_one_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..30 {
            let (q, d) = gen_random(&tiny_params(seed)).unwrap();
            let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
            let vertices: Vec<(usize, usize)> = (0..ih.ell())
                .flat_map(|l| (0..d.domain_size()).map(move |v| (v, l)))
                .collect();
            for _ in 0..5 {
                let mut parts = vec![BTreeSet::new(); ih.ell()];
                for &v in &vertices {
                    if rng.gen_bool(0.6) {
                        parts[rng.gen_range(0..ih.ell())].insert(v);
                    }
                }
                let ws = PartiteSubset::general(parts).unwrap();
                let truth = edgefree_bruteforce(&ih, &ws).unwrap();
                let mut stats = OracleStats::default();
                for backend in [HomBackend::Bruteforce, HomBackend::TdDp] {
                    let mut hom = backend.oracle();
                    let got = edgefree_general(&ih, &ws, hom.as_mut(), 1e-6, &mut rng, &mut stats).unwrap();
                    // never a false edge; misses are possible but very unlikely at this δ′
                    assert!(!truth || got);
                    assert_eq!(got, truth, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn found_homomorphisms_are_answers() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for seed in 0..30 {
            let (q, d) = gen_random(&tiny_params(seed)).unwrap();
            let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
            let deq = q.disequalities().len();
            let vs = random_restricted(&mut rng, ih.ell(), d.domain_size());
            let values = vs.restricted_values().unwrap();
            if values.iter().any(BTreeSet::is_empty) {
                continue;
            }
            let base = HatBase::new(&ih, &values).unwrap();
            for _ in 0..20 {
                let f = ColouringFamily::random(deq, d.domain_size(), &mut rng);
                let b = base.with_colouring(&f);
                if let Some(h) = find_homomorphism(ih.hat_a(), &b).unwrap() {
                    // decode (value, layer) labels back to an assignment
                    let full: Vec<usize> = h
                        .iter()
                        .map(|&e| {
                            let label = &b.universe()[e];
                            let inner = &label[1..label.rfind(',').unwrap()];
                            d.value_index(&inner.parse::<i64>().unwrap().into()).unwrap()
                        })
                        .collect();
                    assert!(is_solution(&q, &d, &full));
                    assert!(vs.contains_edge(&full[..ih.ell()]));
                }
            }
        }
    }

    #[test]
    fn exact_counter_cases() {
        let p4 = Graph::from_edges(&[(1, 2), (2, 3), (3, 4)]).unwrap();
        let (q, d) = gen_hampath(&p4, 4).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        let c = count_edges_exact_oracle(&ih, &mut oracle, None).unwrap();
        assert_eq!(c.edges, 2);
        assert!(c.calls as u128 <= exact_call_bound(2, 4, 4));

        let empty = Graph::from_edges(&[]).unwrap();
        let (q, d) = gen_hampath(&empty, 3).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        assert_eq!(
            count_edges_exact_oracle(&ih, &mut oracle, None).unwrap(),
            ExactCount { edges: 0, calls: 1 }
        );

        let q = parse_query("phi(x) :- E(x,y)").unwrap();
        let d = Database::from_json(r#"{"domain":[1,2,3],"relations":{"E":{"arity":2,"tuples":[[2,3]]}}}"#)
            .unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        assert_eq!(count_edges_exact_oracle(&ih, &mut oracle, None).unwrap().edges, 1);
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        assert!(matches!(
            count_edges_exact_oracle(&ih, &mut oracle, Some(2)),
            Err(crate::Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn exact_counter_matches_bruteforce_on_corpus() {
        for seed in 0..40 {
            let (q, d) = gen_random(&tiny_params(seed)).unwrap();
            let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
            let truth = count_answers_bruteforce(&q, &d).unwrap();
            let mut oracle = ColourCodingEdgeFree::new(&ih, HomBackend::TdDp, 1e-9, seed);
            let c = count_edges_exact_oracle(&ih, &mut oracle, None).unwrap();
            assert_eq!(c.edges, truth, "seed {seed}");
            assert!(c.calls as u128 <= exact_call_bound(truth, ih.ell(), d.domain_size()));
        }
    }

    #[test]
    fn walks_are_unbiased() {
        let (q, d) = gen_hampath(&k4(), 4).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 4000;
        let sum: u128 = (0..n)
            .map(|_| single_walk_estimate(&ih, &mut oracle, &mut rng).unwrap())
            .sum();
        let mean = sum as f64 / n as f64;
        assert!((mean - 24.0).abs() < 0.05 * 24.0, "mean {mean}");
    }

    #[test]
    fn estimator_zero_and_deterministic_cases() {
        let (q, d) = gen_hampath(&Graph::from_edges(&[]).unwrap(), 3).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = EstimatorConfig::default();
        assert_eq!(estimate_edges(&ih, &mut oracle, 0.2, 0.1, &mut rng, &cfg).unwrap().estimate, 0);

        // every leaf is an edge: φ(x,y) :- U(x), U(y) over a full relation
        let q = parse_query("phi(x,y) :- U(x), U(y)").unwrap();
        let mut d = Database::with_int_domain(4);
        d.add_relation("U", 1).unwrap();
        for v in 0..4 {
            d.insert_indices("U", vec![v]).unwrap();
        }
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        for _ in 0..10 {
            assert_eq!(single_walk_estimate(&ih, &mut oracle, &mut rng).unwrap(), 16);
        }
    }

    #[test]
    fn approx_pipeline_small_cases() {
        let q = parse_query("phi(x) :- E(x,y), !E(x,y)").unwrap();
        let d = Database::from_json(r#"{"domain":[1,2],"relations":{"E":{"arity":2,"tuples":[[1,2]]}}}"#)
            .unwrap();
        let r = approx_count_answers(&q, &d, 0.25, 0.1, HomBackend::Bruteforce, 1).unwrap();
        assert_eq!(r.estimate, 0);

        let q = parse_query("phi(x,z) :- E(x,y), E(y,z)").unwrap();
        let (_, d) = gen_hampath(&k4(), 4).unwrap();
        let truth = count_answers_bruteforce(&q, &d).unwrap();
        let r = approx_count_answers(&q, &d, 0.25, 0.1, HomBackend::TdDp, 5).unwrap();
        assert!(r.exact_path);
        assert_eq!(r.estimate, truth);

        let star = Graph::from_edges(&[(1, 2), (1, 3)]).unwrap();
        let tri = Graph::from_edges(&[(1, 2), (2, 3), (1, 3)]).unwrap();
        let (q, d) = crate::qmodel::gen_li_hom(&star, &tri).unwrap();
        let a = approx_count_answers(&q, &d, 0.25, 0.1, HomBackend::TdDp, 42).unwrap();
        let b = approx_count_answers(&q, &d, 0.25, 0.1, HomBackend::TdDp, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimate, 6);
    }

    #[test]
    fn boolean_queries_count_zero_or_one() {
        let q = parse_query("q() :- E(x,y), x != y").unwrap();
        let (_, d) = gen_hampath(&k4(), 4).unwrap();
        let ih = ImplicitAnswerHypergraph::new(&q, &d).unwrap();
        let mut oracle = BruteForceEdgeFree::new(&ih).unwrap();
        assert_eq!(
            count_edges_exact_oracle(&ih, &mut oracle, None).unwrap(),
            ExactCount { edges: 1, calls: 1 }
        );
        let r = approx_count_answers(&q, &d, 0.25, 0.1, HomBackend::Bruteforce, 3).unwrap();
        assert_eq!(r.estimate, 1);
    }
}
