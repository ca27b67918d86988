use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stww::bounds::{greedy_sequence, greedy_sequence_with, TieBreak};
use stww::bwmc::{solve_bwmc, solve_bwmc_with};
use stww::error::BwmcError;
use stww::cnf::{Formula, Lit, Weight, WeightFunction};
use stww::oracle::bwmc_oracle;
use stww::trigraph::incidence_graph;

fn random_instance(rng: &mut ChaCha8Rng) -> (Formula, WeightFunction, i64) {
    let n = rng.gen_range(1..=10u32);
    let m = rng.gen_range(1..=12);
    let clauses: Vec<Vec<Lit>> = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=n.min(4));
            let mut vars: Vec<u32> = (1..=n).collect();
            for i in 0..width as usize {
                let j = rng.gen_range(i..vars.len());
                vars.swap(i, j);
            }
            vars[..width as usize].iter().map(|&v| Lit::new(v, rng.gen_bool(0.5))).collect()
        })
        .collect();
    let f = Formula::new(n as usize, clauses);
    let mut w = || -> Weight { BigRational::new(rng.gen_range(-3..=4).into(), rng.gen_range(1..=3).into()) };
    let pairs = (0..n).map(|_| (w(), w())).collect();
    let k = rng.gen_range(0..=n as i64);
    (f, WeightFunction::from_pairs(pairs), k)
}

#[test]
fn random_formulas_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..60 {
        let (f, w, k) = random_instance(&mut rng);
        let seq = greedy_sequence(&incidence_graph(&f), true);
        let got = solve_bwmc(&f, &w, k, &seq).unwrap_or_else(|e| panic!("round {round}: {e}"));
        assert_eq!(got, bwmc_oracle(&f, &w, k).unwrap(), "round {round}: {f:?} k={k}");
    }
}

fn cycle_formula(rng: &mut ChaCha8Rng) -> (Formula, WeightFunction) {
    let n = rng.gen_range(6..=16u32);
    let mut clauses = Vec::new();
    for i in 1..=n {
        let j = i % n + 1;
        clauses.push(vec![Lit::new(i, rng.gen_bool(0.5)), Lit::new(j, rng.gen_bool(0.5))]);
        if rng.gen_bool(0.2) {
            clauses.push(vec![Lit::new(i, rng.gen_bool(0.5))]);
        }
    }
    let pairs = (0..n)
        .map(|_| {
            (
                BigRational::new(rng.gen_range(-2..=3).into(), 1.into()),
                BigRational::new(rng.gen_range(1..=3).into(), 2.into()),
            )
        })
        .collect();
    (Formula::new(n as usize, clauses), WeightFunction::from_pairs(pairs))
}

// Small region bounds force regions of t + 1 vertices, so the removal
// branch runs; every run that is not refused must be exact.
#[test]
fn small_region_bounds_exercise_removal_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut large = 0;
    for round in 0..120 {
        let (f, w) = cycle_formula(&mut rng);
        let seq = greedy_sequence_with(&incidence_graph(&f), true, TieBreak::Seeded(round));
        for k in 1..=2 {
            let expected = bwmc_oracle(&f, &w, k).unwrap();
            for t in 2..=6 {
                match solve_bwmc_with(&f, &w, k, &seq, Some(t), |_, _| {}) {
                    Ok(o) => {
                        large += o.levels.iter().map(|l| l.large_case_regions).sum::<usize>();
                        assert_eq!(o.value, expected, "round {round} k={k} t={t}");
                    }
                    Err(BwmcError::Internal(m)) => assert!(m.starts_with("removed vertex at red distance"), "{m}"),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
    assert!(large > 100, "removal branch ran only {large} times");
}
