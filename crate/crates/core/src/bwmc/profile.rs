use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::cnf::{Formula, Weight};
use crate::trigraph::{Side, SignedTrigraph, VertexId};

/// Profile `(T, P, M, ℓ, Q)` with explicit vertex sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    pub t: Vec<VertexId>,
    pub p: BTreeSet<VertexId>,
    pub m: BTreeSet<VertexId>,
    pub l: usize,
    pub q: BTreeSet<VertexId>,
}

/// Compact profile for a fixed region `T`: bit `i` of each mask refers to
/// the `i`-th smallest vertex of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProfileKey {
    pub p: u64,
    pub m: u64,
    pub l: u32,
    pub q: u64,
}

impl ProfileKey {
    pub fn to_profile(self, t: &[VertexId]) -> Profile {
        let set = |mask: u64| -> BTreeSet<VertexId> {
            t.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        };
        Profile {
            t: t.to_vec(),
            p: set(self.p),
            m: set(self.m),
            l: self.l as usize,
            q: set(self.q),
        }
    }

    pub fn from_profile(profile: &Profile) -> ProfileKey {
        let mask = |s: &BTreeSet<VertexId>| -> u64 {
            profile
                .t
                .iter()
                .enumerate()
                .filter(|(_, v)| s.contains(v))
                .fold(0, |acc, (i, _)| acc | 1 << i)
        };
        ProfileKey {
            p: mask(&profile.p),
            m: mask(&profile.m),
            l: profile.l as u32,
            q: mask(&profile.q),
        }
    }
}

pub type Entries = BTreeMap<ProfileKey, Weight>;

/// Record of one level: every red-connected region `T` with its realizable
/// profiles and their weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    pub level: usize,
    pub regions: BTreeMap<Vec<VertexId>, Entries>,
}

impl Record {
    pub fn num_profiles(&self) -> usize {
        self.regions.values().map(|e| e.len()).sum()
    }

    pub fn get(&self, profile: &Profile) -> Option<&Weight> {
        self.regions.get(&profile.t)?.get(&ProfileKey::from_profile(profile))
    }

    pub fn profiles(&self) -> impl Iterator<Item = (Profile, &Weight)> + '_ {
        self.regions
            .iter()
            .flat_map(|(t, entries)| entries.iter().map(move |(key, w)| (key.to_profile(t), w)))
    }
}

/// Every red-connected vertex set of size at most `max_size`, each once.
pub fn enumerate_red_connected(graph: &SignedTrigraph, max_size: usize) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    for anchor in graph.vertices() {
        red_connected_from(graph, anchor, max_size, true, &mut out);
    }
    out
}

/// Every red-connected set of size at most `max_size` containing `anchor`.
pub fn red_connected_containing(graph: &SignedTrigraph, anchor: VertexId, max_size: usize) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    red_connected_from(graph, anchor, max_size, false, &mut out);
    out
}

fn red_connected_from(
    graph: &SignedTrigraph,
    anchor: VertexId,
    max_size: usize,
    anchor_is_min: bool,
    out: &mut Vec<Vec<VertexId>>,
) {
    if max_size == 0 {
        return;
    }
    let allowed = |u: VertexId| !anchor_is_min || u > anchor;
    let ext: Vec<VertexId> = graph.red_neighbors(anchor).filter(|&u| allowed(u)).collect();
    let mut closed: BTreeSet<VertexId> = graph.red_neighbors(anchor).collect();
    closed.insert(anchor);
    let mut sub = vec![anchor];
    extend(graph, &mut sub, ext, &closed, max_size, &allowed, out);
}

/// Connected-subgraph enumeration by exclusive-neighbourhood extension.
fn extend(
    graph: &SignedTrigraph,
    sub: &mut Vec<VertexId>,
    mut ext: Vec<VertexId>,
    closed: &BTreeSet<VertexId>,
    max_size: usize,
    allowed: &dyn Fn(VertexId) -> bool,
    out: &mut Vec<Vec<VertexId>>,
) {
    let mut sorted = sub.clone();
    sorted.sort_unstable();
    out.push(sorted);
    if sub.len() == max_size {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next_ext = ext.clone();
        let mut next_closed = closed.clone();
        for u in graph.red_neighbors(w) {
            if allowed(u) && !closed.contains(&u) {
                next_ext.push(u);
            }
            next_closed.insert(u);
        }
        sub.push(w);
        extend(graph, sub, next_ext, &next_closed, max_size, allowed, out);
        sub.pop();
    }
}

/// Original variables merged into the var-vertices of `t`.
pub fn region_variables(graph: &SignedTrigraph, t: &[VertexId]) -> Vec<u32> {
    let mut vars: Vec<u32> = t
        .iter()
        .filter(|&&v| graph.side(v) == Some(Side::Var))
        .flat_map(|&v| graph.bag(v).iter().copied())
        .collect();
    vars.sort_unstable();
    vars
}

/// Clause indices (0-based) merged into clause vertex `c`; clause `i` of a
/// formula on `n` variables is vertex `n + 1 + i`.
pub fn clause_indices(graph: &SignedTrigraph, formula: &Formula, c: VertexId) -> Vec<usize> {
    let n = formula.num_vars() as VertexId;
    graph.bag(c).iter().map(|&id| (id - n - 1) as usize).collect()
}

fn clauses_satisfied(graph: &SignedTrigraph, formula: &Formula, c: VertexId, nu: &BTreeMap<u32, bool>) -> bool {
    clause_indices(graph, formula, c).into_iter().all(|i| {
        formula.clauses()[i]
            .lits()
            .iter()
            .any(|lit| nu.get(&lit.var()).is_some_and(|&val| val == lit.is_positive()))
    })
}

/// Reference semantics: does `nu` (an assignment of exactly the variables
/// of `profile.t`) realize `profile` in `graph`?
pub fn realizes(profile: &Profile, nu: &BTreeMap<u32, bool>, graph: &SignedTrigraph, formula: &Formula) -> bool {
    let vars = region_variables(graph, &profile.t);
    if vars.len() != nu.len() || vars.iter().any(|v| !nu.contains_key(v)) {
        return false;
    }
    for &u in &profile.t {
        match graph.side(u) {
            Some(Side::Var) => {
                let bag = graph.bag(u);
                let some_one = bag.iter().any(|v| nu[v]);
                let some_zero = bag.iter().any(|v| !nu[v]);
                let in_p = profile.p.contains(&u);
                let in_m = profile.m.contains(&u);
                // R1, R2, R3 and their converses
                if in_p != some_one || in_m != (in_p && some_zero) {
                    return false;
                }
            }
            Some(Side::Cla) => {
                // R5, R6
                if profile.q.contains(&u) != clauses_satisfied(graph, formula, u, nu) {
                    return false;
                }
            }
            _ => return false,
        }
    }
    // R4
    nu.values().filter(|&&b| b).count() == profile.l
}

/// The unique profile on `t` realized by `nu`.
pub fn profile_realized_by(
    t: &[VertexId],
    nu: &BTreeMap<u32, bool>,
    graph: &SignedTrigraph,
    formula: &Formula,
) -> Profile {
    let mut p = BTreeSet::new();
    let mut m = BTreeSet::new();
    let mut q = BTreeSet::new();
    for &u in t {
        if graph.side(u) == Some(Side::Var) {
            let bag = graph.bag(u);
            if bag.iter().any(|v| nu[v]) {
                p.insert(u);
                if bag.iter().any(|v| !nu[v]) {
                    m.insert(u);
                }
            }
        } else if clauses_satisfied(graph, formula, u, nu) {
            q.insert(u);
        }
    }
    Profile {
        t: t.to_vec(),
        p,
        m,
        l: nu.values().filter(|&&b| b).count(),
        q,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityEstimate {
    pub t: usize,
    /// Bound on the number of profiles of a level with `n` vertices.
    pub s_n: BigUint,
    /// Bound on the number of consistent tuples per profile.
    pub f_kd: BigUint,
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// Closed-form size bounds for budget `k` and width `d` at a level with
/// `n` vertices.
pub fn estimate_bounds(n: usize, k: usize, d: usize) -> ComplexityEstimate {
    let t = k * (d * d + 1);
    let two = BigUint::from(2u32);
    let big_d = BigUint::from(d);
    let exp = (2 * t).saturating_sub(2) as u32;
    let sets = BigUint::from(n) * (big_d.pow(exp) + BigUint::one());
    let s_n = sets * binomial(t, k) * two.pow((k + t) as u32) * BigUint::from(k + 1);
    let f_kd = binomial(t + 1, k) * two.pow((k + t + 1) as u32) * BigUint::from(k + 1).pow((d + 2) as u32);
    ComplexityEstimate { t, s_n, f_kd }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use crate::trigraph::{incidence_graph, EdgeKind};

    fn red_path(n: usize) -> SignedTrigraph {
        let mut g = SignedTrigraph::with_plain_vertices(n);
        for v in 1..n as VertexId {
            g.set_edge(v, v + 1, EdgeKind::Red).unwrap();
        }
        g
    }

    #[test]
    fn red_connected_examples() {
        let mut g = SignedTrigraph::with_plain_vertices(4);
        g.set_edge(1, 2, EdgeKind::Pos).unwrap();
        assert_eq!(enumerate_red_connected(&g, 3).len(), 4);

        let mut e = SignedTrigraph::with_plain_vertices(2);
        e.set_edge(1, 2, EdgeKind::Red).unwrap();
        let mut sets = enumerate_red_connected(&e, 2);
        sets.sort();
        assert_eq!(sets, vec![vec![1], vec![1, 2], vec![2]]);

        let sets = enumerate_red_connected(&red_path(4), 3);
        assert_eq!(sets.len(), 9);
        let distinct: BTreeSet<_> = sets.iter().collect();
        assert_eq!(distinct.len(), 9);
    }

    #[test]
    fn sets_containing_a_vertex() {
        let mut g = red_path(5);
        g.set_edge(1, 5, EdgeKind::Red).unwrap();
        // cycle of 5: sets of size <= 3 containing vertex 3: {3}, two pairs, three triples
        let sets = red_connected_containing(&g, 3, 3);
        assert_eq!(sets.len(), 6);
        assert!(sets.iter().all(|s| s.contains(&3)));
    }

    #[test]
    fn realizes_examples() {
        let f = Formula::new(1, vec![vec![Lit::pos(1)]]);
        let g = incidence_graph(&f);
        let one = BTreeMap::from([(1, true)]);
        let prof = |p: &[VertexId], l| Profile {
            t: vec![1],
            p: p.iter().copied().collect(),
            m: BTreeSet::new(),
            l,
            q: BTreeSet::new(),
        };
        assert!(realizes(&prof(&[1], 1), &one, &g, &f));
        assert!(!realizes(&prof(&[], 0), &one, &g, &f));
        let clause = Profile {
            t: vec![2],
            p: BTreeSet::new(),
            m: BTreeSet::new(),
            l: 0,
            q: BTreeSet::new(),
        };
        assert!(realizes(&clause, &BTreeMap::new(), &g, &f));
        assert_eq!(profile_realized_by(&[1], &one, &g, &f), prof(&[1], 1));
    }

    #[test]
    fn key_round_trip() {
        let p = Profile {
            t: vec![3, 5, 8],
            p: BTreeSet::from([3]),
            m: BTreeSet::from([3]),
            l: 1,
            q: BTreeSet::from([8]),
        };
        assert_eq!(ProfileKey::from_profile(&p).to_profile(&p.t), p);
    }

    #[test]
    fn bounds() {
        assert_eq!(estimate_bounds(10, 1, 1).t, 2);
        assert_eq!(estimate_bounds(10, 2, 2).t, 10);
        let a = estimate_bounds(10, 2, 2).s_n;
        let b = estimate_bounds(11, 2, 2).s_n;
        assert!(a < b);
        // k=1, d=1, t=2: s_n = n * 2 * C(2,1) * 2^3 * 2
        assert_eq!(estimate_bounds(10, 1, 1).s_n, BigUint::from(10u32 * 2 * 2 * 8 * 2));
    }
}
