//! The DP on a 40-variable width-2 formula with small budgets.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stww::bounds::greedy_sequence;
use stww::bwmc::solve_bwmc;
use stww::cnf::{assignment_weight, satisfies, Assignment, Formula, Lit, Weight, WeightFunction};
use stww::sequence::verify;
use stww::trigraph::incidence_graph;

/// Counts over assignments with at most `k` ones by listing them.
fn sparse_count(f: &Formula, w: &WeightFunction, k: usize) -> Weight {
    fn go(f: &Formula, w: &WeightFunction, tau: &mut Assignment, from: u32, left: usize, acc: &mut Weight) {
        if satisfies(f, tau) {
            *acc += assignment_weight(f, w, tau);
        }
        if left == 0 {
            return;
        }
        for v in from..=f.num_vars() as u32 {
            tau.set(v, true);
            go(f, w, tau, v + 1, left - 1, acc);
            tau.set(v, false);
        }
    }
    let mut acc = Weight::default();
    go(f, w, &mut Assignment::all_false(f.num_vars()), 1, k, &mut acc);
    acc
}

#[test]
fn forty_variables_width_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let n = 40u32;
    // a chain of 2-clauses with a few 3-clauses on consecutive variables
    let mut clauses = Vec::new();
    for i in 1..n {
        clauses.push(vec![Lit::new(i, rng.gen_bool(0.5)), Lit::new(i + 1, rng.gen_bool(0.5))]);
        if i + 2 <= n && rng.gen_bool(0.3) {
            clauses.push((i..i + 3).map(|v| Lit::new(v, rng.gen_bool(0.5))).collect());
        }
    }
    let f = Formula::new(n as usize, clauses);
    let pairs = (0..n)
        .map(|_| (BigRational::new(rng.gen_range(1..=5).into(), 3.into()), BigRational::new(rng.gen_range(1..=5).into(), 2.into())))
        .collect();
    let w = WeightFunction::from_pairs(pairs);
    let g = incidence_graph(&f);
    let seq = greedy_sequence(&g, true);
    let width = verify(&g, &seq, true).width;
    assert!(width <= 2, "greedy width {width}");

    let start = Instant::now();
    for k in 0..=2 {
        assert_eq!(solve_bwmc(&f, &w, k, &seq).unwrap(), sparse_count(&f, &w, k as usize), "k = {k}");
    }
    let took = start.elapsed();
    eprintln!("40 variables, width {width}, k <= 2: {took:?}");
    assert!(took < Duration::from_secs(60));
}
