//! Exhaustive reference answers for small formulas.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::cnf::{Assignment, Formula, Weight, WeightFunction};
use crate::error::OracleError;

pub const ORACLE_VAR_LIMIT: usize = 24;

/// Σ w(π) over models π with at most `k` ones, by enumerating all
/// assignments. Negative `k` counts nothing.
pub fn bwmc_oracle(formula: &Formula, weights: &WeightFunction, k: i64) -> Result<Weight, OracleError> {
    let n = formula.num_vars();
    if n > ORACLE_VAR_LIMIT {
        return Err(OracleError::TooManyVariables(n, ORACLE_VAR_LIMIT));
    }
    if k < 0 {
        return Ok(Weight::zero());
    }
    let k = k as u32;
    // occurrences[v] = (clause, literal is positive)
    let mut occurrences: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n + 1];
    for (i, c) in formula.clauses().iter().enumerate() {
        for l in c.lits() {
            occurrences[l.var() as usize].push((i, l.is_positive()));
        }
    }
    let chunk_bits = n.min(10);
    let chunks = 1u64 << (n - chunk_bits);
    let partials: Vec<Weight> = (0..chunks)
        .into_par_iter()
        .map(|hi| {
            let mut mask = hi << chunk_bits;
            // true literals per clause, updated along a Gray code over the low bits
            let mut true_lits: Vec<u32> = formula
                .clauses()
                .iter()
                .map(|c| c.lits().iter().filter(|l| (mask >> (l.var() - 1) & 1 == 1) == l.is_positive()).count() as u32)
                .collect();
            let mut unsat = true_lits.iter().filter(|&&t| t == 0).count();
            let mut sum = Weight::zero();
            for i in 0..1u64 << chunk_bits {
                if i > 0 {
                    let v = i.trailing_zeros() as usize + 1;
                    mask ^= 1 << (v - 1);
                    let now_true = mask >> (v - 1) & 1 == 1;
                    for &(c, positive) in &occurrences[v] {
                        if positive == now_true {
                            true_lits[c] += 1;
                            if true_lits[c] == 1 {
                                unsat -= 1;
                            }
                        } else {
                            true_lits[c] -= 1;
                            if true_lits[c] == 0 {
                                unsat += 1;
                            }
                        }
                    }
                }
                if unsat == 0 && mask.count_ones() <= k {
                    let mut w = Weight::one();
                    for v in 1..=n as u32 {
                        w *= if mask >> (v - 1) & 1 == 1 {
                            weights.positive(v)
                        } else {
                            weights.negative(v)
                        };
                    }
                    sum += w;
                }
            }
            sum
        })
        .collect();
    // fixed chunk order
    let total = partials.into_iter().fold(Weight::zero(), |a, b| a + b);
    Ok(total)
}

/// Some model with at most `k` ones, found by depth-first search with
/// unit-free clause checking on partial assignments.
pub fn bsat_oracle(formula: &Formula, k: i64) -> Option<Assignment> {
    if k < 0 {
        return None;
    }
    let n = formula.num_vars();
    let mut values: Vec<Option<bool>> = vec![None; n + 1];
    fn falsified(formula: &Formula, values: &[Option<bool>]) -> bool {
        formula.clauses().iter().any(|c| {
            c.lits()
                .iter()
                .all(|l| values[l.var() as usize] == Some(!l.is_positive()))
        })
    }
    fn dfs(formula: &Formula, values: &mut Vec<Option<bool>>, v: usize, ones_left: i64) -> bool {
        if falsified(formula, values) {
            return false;
        }
        if v == values.len() {
            return true;
        }
        for bit in [false, true] {
            if bit && ones_left == 0 {
                continue;
            }
            values[v] = Some(bit);
            if dfs(formula, values, v + 1, ones_left - bit as i64) {
                return true;
            }
        }
        values[v] = None;
        false
    }
    dfs(formula, &mut values, 1, k).then(|| Assignment::new(values[1..].iter().map(|b| b.unwrap()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{satisfies, Lit};

    #[test]
    fn counts_small_formulas() {
        let f = Formula::new(2, vec![vec![Lit::pos(1), Lit::pos(2)]]);
        let unit = WeightFunction::unit(2);
        assert_eq!(bwmc_oracle(&f, &unit, 1).unwrap(), Weight::from_integer(2.into()));
        assert_eq!(bwmc_oracle(&f, &unit, 5).unwrap(), Weight::from_integer(3.into()));
        assert_eq!(bwmc_oracle(&f, &unit, -1).unwrap(), Weight::zero());
        let big = Formula::new(25, Vec::<Vec<Lit>>::new());
        assert!(bwmc_oracle(&big, &WeightFunction::unit(25), 1).is_err());
    }

    #[test]
    fn finds_models() {
        let f = Formula::new(3, vec![vec![Lit::pos(1), Lit::pos(2)], vec![Lit::neg(1)], vec![Lit::pos(3)]]);
        let m = bsat_oracle(&f, 2).unwrap();
        assert!(satisfies(&f, &m) && m.ones() <= 2);
        assert!(bsat_oracle(&f, 1).is_none());
    }
}
