use num_traits::{One, Zero};
use proptest::prelude::*;
use stww::bipartize::bipartize_with;
use stww::bounds::{cw_to_sequence, greedy_sequence, random_expression};
use stww::bwmc::solve_bwmc;
use stww::cnf::{parse_dimacs, satisfies, serialize_dimacs, Formula, Lit, WeightFunction};
use stww::generators::{gen_grid, gen_random_ksat, random_bipartite_graph, SignPolicy};
use stww::oracle::{bsat_oracle, bwmc_oracle};
use stww::sequence::{verify, ContractionSequence};
use stww::trigraph::incidence_graph;

fn formula() -> impl Strategy<Value = Formula> {
    (1..=7u32).prop_flat_map(|n| {
        let lit = (1..=n, any::<bool>()).prop_map(|(v, s)| Lit::new(v, s));
        prop::collection::vec(prop::collection::vec(lit, 1..=3), 0..=8)
            .prop_map(move |clauses| Formula::new(n as usize, clauses))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bipartization_adds_at_most_two(a in 1..=10usize, b in 1..=10usize, p in 0.1..0.9f64, seed: u64) {
        let g = random_bipartite_graph(a, b, p, seed);
        let seq = greedy_sequence(&g, false);
        let d = verify(&g, &seq, false).width;
        let r = bipartize_with(&g, &seq, true).unwrap();
        let rep = verify(&g, &r.seq, true);
        prop_assert!(rep.is_valid() && rep.is_bipartite_sequence);
        prop_assert!(rep.width <= d + 2);
        prop_assert!(r.part_degree_violations.is_empty());
    }

    #[test]
    fn cw_sequences_stay_within_twice_the_labels(k in 1..=4u32, leaves in 1..=20usize, seed: u64) {
        let (g, seq) = cw_to_sequence(&random_expression(k, leaves, seed)).unwrap();
        let rep = verify(&g, &seq, false);
        prop_assert!(rep.is_valid());
        prop_assert!(rep.width <= 2 * k as usize);
    }

    #[test]
    fn unit_counts_grow_with_budget(f in formula()) {
        let w = WeightFunction::unit(f.num_vars());
        let counts: Vec<_> = (0..=f.num_vars() as i64).map(|k| bwmc_oracle(&f, &w, k).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|c| c[0] <= c[1]));
    }

    #[test]
    fn bsat_agrees_with_counting(f in formula(), k in 0..=7i64) {
        let count = bwmc_oracle(&f, &WeightFunction::unit(f.num_vars()), k).unwrap();
        match bsat_oracle(&f, k) {
            Some(tau) => {
                prop_assert!(satisfies(&f, &tau) && tau.ones() as i64 <= k);
                prop_assert!(count >= One::one());
            }
            None => prop_assert!(count.is_zero()),
        }
    }

    #[test]
    fn dp_matches_oracle(f in formula(), k in 0..=7i64) {
        let w = WeightFunction::unit(f.num_vars());
        let seq = greedy_sequence(&incidence_graph(&f), true);
        prop_assert_eq!(solve_bwmc(&f, &w, k, &seq).unwrap(), bwmc_oracle(&f, &w, k).unwrap());
    }

    #[test]
    fn text_formats_round_trip(f in formula()) {
        prop_assert_eq!(parse_dimacs(&serialize_dimacs(&f, None)).unwrap().formula, f.clone());
        let seq = greedy_sequence(&incidence_graph(&f), true);
        prop_assert_eq!(ContractionSequence::parse_tws(&seq.to_tws()).unwrap(), seq);
    }

    #[test]
    fn generators_are_deterministic(seed: u64, n in 3..=12usize) {
        prop_assert_eq!(gen_random_ksat(n, 3, n, seed).unwrap(), gen_random_ksat(n, 3, n, seed).unwrap());
        let a = gen_grid(2, 3, SignPolicy::Random(seed)).unwrap();
        let b = gen_grid(2, 3, SignPolicy::Random(seed)).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
        prop_assert_eq!(random_bipartite_graph(4, 5, 0.5, seed).edges(), random_bipartite_graph(4, 5, 0.5, seed).edges());
    }
}
