//! Instance families: grids, subdivided cliques, the two hardness
//! reductions and random formulas.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::check_subdivided_clique;
use crate::cnf::{Formula, Lit};
use crate::error::GenError;
use crate::trigraph::{incidence_graph, EdgeKind, Side, SidePolicy, SignedTrigraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignPolicy {
    AllPositive,
    /// alternates along each axis
    Alternating,
    Random(u64),
}

impl SignPolicy {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(match self {
            SignPolicy::Random(seed) => seed,
            _ => 0,
        })
    }

    fn pick(self, rng: &mut ChaCha8Rng, parity: usize) -> EdgeKind {
        match self {
            SignPolicy::AllPositive => EdgeKind::Pos,
            SignPolicy::Alternating if parity.is_multiple_of(2) => EdgeKind::Pos,
            SignPolicy::Alternating => EdgeKind::Neg,
            SignPolicy::Random(_) if rng.gen_bool(0.5) => EdgeKind::Pos,
            SignPolicy::Random(_) => EdgeKind::Neg,
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, GenError> {
    Err(GenError::Invalid(msg.into()))
}

/// The `dim`-dimensional grid with `side` vertices per axis. Vertices are
/// numbered from 1 in mixed radix; even coordinate sums go on the var side.
pub fn gen_grid(dim: usize, side: usize, signs: SignPolicy) -> Result<SignedTrigraph, GenError> {
    if dim == 0 || side < 2 {
        return invalid(format!("grid needs dimension >= 1 and side >= 2, got {dim} and {side}"));
    }
    let total = side
        .checked_pow(dim as u32)
        .filter(|&t| t < u32::MAX as usize / 2)
        .ok_or_else(|| GenError::Invalid("grid too large".into()))?;
    let coords = |mut i: usize| -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let c = i % side;
                i /= side;
                c
            })
            .collect()
    };
    let mut g = SignedTrigraph::new();
    for i in 0..total {
        let s: usize = coords(i).iter().sum();
        g.add_vertex(i as VertexId + 1, if s.is_multiple_of(2) { Side::Var } else { Side::Cla });
    }
    let mut rng = signs.rng();
    for i in 0..total {
        let c = coords(i);
        let mut stride = 1;
        for axis in 0..dim {
            if c[axis] + 1 < side {
                let kind = signs.pick(&mut rng, c[axis]);
                g.set_edge(i as VertexId + 1, (i + stride) as VertexId + 1, kind)
                    .expect("grid vertices exist");
            }
            stride *= side;
        }
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct SubdividedClique {
    pub graph: SignedTrigraph,
    /// the original clique vertices
    pub branch: BTreeSet<VertexId>,
    pub subdivision: BTreeSet<VertexId>,
}

/// `K_d` with the edge of the `i`-th pair (lexicographic, `(1,2), (1,3), …`)
/// subdivided `counts[i]` times. Branch vertices are `1..=d`.
pub fn gen_subdivided_clique(d: usize, counts: &[usize], signs: SignPolicy) -> Result<SubdividedClique, GenError> {
    if d < 2 {
        return invalid(format!("clique size {d} < 2"));
    }
    let pairs = d * (d - 1) / 2;
    if counts.len() != pairs {
        return invalid(format!("{} subdivision counts for {pairs} edges", counts.len()));
    }
    let mut g = SignedTrigraph::with_plain_vertices(d);
    let mut rng = signs.rng();
    let mut next = d as VertexId + 1;
    let mut subdivision = BTreeSet::new();
    let mut idx = 0;
    for a in 1..=d as VertexId {
        for b in a + 1..=d as VertexId {
            let mut prev = a;
            for step in 0..counts[idx] {
                g.add_vertex(next, Side::Plain);
                subdivision.insert(next);
                g.set_edge(prev, next, signs.pick(&mut rng, step)).unwrap();
                prev = next;
                next += 1;
            }
            g.set_edge(prev, b, signs.pick(&mut rng, counts[idx])).unwrap();
            idx += 1;
        }
    }
    Ok(SubdividedClique {
        graph: g,
        branch: (1..=d as VertexId).collect(),
        subdivision,
    })
}

/// Hitting-set reduction: variables are the elements `1..=universe`,
/// clauses the sets plus the whole universe. The formula has a model with
/// at most `k` ones iff some hitting set has at most `k` elements.
pub fn gen_hitting_set_formula(universe: usize, sets: &[Vec<u32>], k: usize) -> Result<(Formula, usize), GenError> {
    if universe == 0 {
        return invalid("empty universe");
    }
    for (i, s) in sets.iter().enumerate() {
        if s.is_empty() {
            return invalid(format!("set {} is empty", i + 1));
        }
        if let Some(&e) = s.iter().find(|&&e| e == 0 || e as usize > universe) {
            return invalid(format!("set {} has element {e} outside 1..={universe}", i + 1));
        }
    }
    let mut clauses: Vec<Vec<Lit>> = sets.iter().map(|s| s.iter().map(|&e| Lit::pos(e)).collect()).collect();
    clauses.push((1..=universe as u32).map(Lit::pos).collect());
    Ok((Formula::new(universe, clauses), k))
}

/// A `d`-partite graph on vertices `1..=n` with parts of equal size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartiteGraph {
    pub parts: Vec<Vec<u32>>,
    pub edges: BTreeSet<(u32, u32)>,
}

impl PartiteGraph {
    pub fn new(parts: Vec<Vec<u32>>, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, GenError> {
        if parts.len() < 2 {
            return invalid("need at least two parts");
        }
        let size = parts[0].len();
        if size == 0 || parts.iter().any(|p| p.len() != size) {
            return invalid("parts are not of equal non-zero size");
        }
        let mut part_of = BTreeMap::new();
        for (i, p) in parts.iter().enumerate() {
            for &v in p {
                if part_of.insert(v, i).is_some() {
                    return invalid(format!("vertex {v} in two parts"));
                }
            }
        }
        let n = part_of.len() as u32;
        if part_of.keys().next() != Some(&1) || part_of.keys().last() != Some(&n) {
            return invalid("vertices must be numbered 1..=n");
        }
        let mut norm = BTreeSet::new();
        for (u, v) in edges {
            let (Some(pu), Some(pv)) = (part_of.get(&u), part_of.get(&v)) else {
                return invalid(format!("edge {u}-{v} has an unknown endpoint"));
            };
            if pu == pv {
                return invalid(format!("edge {u}-{v} inside one part"));
            }
            norm.insert((u.min(v), u.max(v)));
        }
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(PartiteGraph { parts, edges: norm })
    }

    pub fn num_vertices(&self) -> usize {
        self.parts.len() * self.parts[0].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Brute force: is there a clique with one vertex per part?
    pub fn has_partitioned_clique(&self) -> bool {
        fn rec(g: &PartiteGraph, i: usize, chosen: &mut Vec<u32>) -> bool {
            if i == g.parts.len() {
                return true;
            }
            for &v in &g.parts[i] {
                if chosen.iter().all(|&u| g.has_edge(u, v)) {
                    chosen.push(v);
                    if rec(g, i + 1, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        rec(self, 0, &mut Vec::new())
    }
}

/// Random balanced `d`-partite graph, parts `{1..s}, {s+1..2s}, …`, each
/// cross pair an edge with probability `p`.
pub fn random_partite_graph(d: usize, s: usize, p: f64, seed: u64) -> Result<PartiteGraph, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<Vec<u32>> = (0..d)
        .map(|i| (1..=s as u32).map(|j| (i * s) as u32 + j).collect())
        .collect();
    let mut edges = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            for &u in &parts[i] {
                for &v in &parts[j] {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    PartiteGraph::new(parts, edges)
}

/// Partitioned-clique reduction. Returns the formula and `k = d`; it has a
/// model with at most `d` ones iff the graph has a `d`-clique.
pub fn gen_partitioned_clique_formula(graph: &PartiteGraph) -> (Formula, usize) {
    let d = graph.parts.len();
    let mut clauses: Vec<Vec<Lit>> = graph.parts.iter().map(|p| p.iter().map(|&v| Lit::pos(v)).collect()).collect();
    for i in 0..d {
        for j in i + 1..d {
            for &u in &graph.parts[i] {
                for &v in &graph.parts[j] {
                    if graph.has_edge(u, v) {
                        continue;
                    }
                    let mut c: Vec<Lit> = graph.parts[i]
                        .iter()
                        .chain(&graph.parts[j])
                        .filter(|&&x| x != u && x != v)
                        .map(|&x| Lit::pos(x))
                        .collect();
                    c.extend([Lit::neg(u), Lit::neg(v)]);
                    clauses.push(c);
                }
            }
        }
    }
    (Formula::new(graph.num_vertices(), clauses), d)
}

/// Contracts each part and each group of clauses over the same variable
/// set in the unsigned incidence graph of a partitioned-clique formula,
/// drops the pendant part clauses, and checks the result is a subdivision
/// of `K_d` with the parts as branch vertices.
///
/// Fails when a group is not a module (its contraction creates a red edge)
/// or when two parts are completely joined, which leaves them without a
/// connecting clause group.
pub fn check_module_contraction(formula: &Formula, graph: &PartiteGraph) -> Result<SignedTrigraph, GenError> {
    let n = formula.num_vars() as VertexId;
    let mut g = incidence_graph(formula).unsigned();
    let mut groups: Vec<Vec<VertexId>> = graph.parts.clone();
    let mut by_vars: BTreeMap<Vec<u32>, Vec<VertexId>> = BTreeMap::new();
    for (i, c) in formula.clauses().iter().enumerate() {
        let vars: Vec<u32> = c.lits().iter().map(|l| l.var()).collect();
        by_vars.entry(vars).or_default().push(n + 1 + i as VertexId);
    }
    groups.extend(by_vars.into_values());

    let mut branch = BTreeSet::new();
    for (gi, group) in groups.iter().enumerate() {
        let mut rep = group[0];
        for &x in &group[1..] {
            rep = g.contract_in_place(rep, x, SidePolicy::Ignore).map_err(|e| GenError::Invalid(e.to_string()))?;
            if g.red_degree(rep) > 0 {
                return invalid(format!("group {group:?} is not a module"));
            }
        }
        if gi < graph.parts.len() {
            branch.insert(rep);
        }
    }
    let mut reduced = SignedTrigraph::new();
    let kept: BTreeSet<VertexId> = g.vertices().filter(|&v| branch.contains(&v) || g.degree(v) != 1).collect();
    for &v in &kept {
        reduced.add_vertex(v, Side::Plain);
    }
    for (a, b, kind) in g.edges() {
        if kept.contains(&a) && kept.contains(&b) {
            reduced.set_edge(a, b, kind).unwrap();
        }
    }
    check_subdivided_clique(&reduced, &branch).map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(reduced)
}

/// Uniform random formula with `num_clauses` distinct clauses of exactly
/// `width` distinct variables each and random signs.
pub fn gen_random_ksat(num_vars: usize, width: usize, num_clauses: usize, seed: u64) -> Result<Formula, GenError> {
    if width == 0 || width > num_vars {
        return invalid(format!("clause width {width} with {num_vars} variables"));
    }
    // number of distinct clauses, saturating
    let mut available: u128 = 1;
    for i in 0..width {
        available = available * (num_vars - i) as u128 / (i + 1) as u128;
    }
    available = available.saturating_mul(1u128 << width.min(100));
    if (num_clauses as u128) > available {
        return invalid(format!("only {available} distinct clauses exist, {num_clauses} requested"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<u32> = (1..=num_vars as u32).collect();
    let mut seen = BTreeSet::new();
    let mut clauses = Vec::with_capacity(num_clauses);
    while clauses.len() < num_clauses {
        let mut c: Vec<Lit> = vars
            .choose_multiple(&mut rng, width)
            .map(|&v| Lit::new(v, rng.gen_bool(0.5)))
            .collect();
        c.sort();
        if seen.insert(c.clone()) {
            clauses.push(c);
        }
    }
    Ok(Formula::new(num_vars, clauses))
}

/// Random bipartite signed graph: `a` var vertices, `b` clause vertices,
/// each cross pair adjacent with probability `p`, random sign.
pub fn random_bipartite_graph(a: usize, b: usize, p: f64, seed: u64) -> SignedTrigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = SignedTrigraph::new();
    for v in 1..=(a + b) as VertexId {
        g.add_vertex(v, if v as usize <= a { Side::Var } else { Side::Cla });
    }
    for u in 1..=a as VertexId {
        for v in a as VertexId + 1..=(a + b) as VertexId {
            if rng.gen_bool(p) {
                let kind = if rng.gen_bool(0.5) { EdgeKind::Pos } else { EdgeKind::Neg };
                g.set_edge(u, v, kind).unwrap();
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bsat_oracle;

    #[test]
    fn grids() {
        let p3 = gen_grid(1, 3, SignPolicy::AllPositive).unwrap();
        assert_eq!((p3.num_vertices(), p3.num_edges()), (3, 2));
        let g = gen_grid(2, 3, SignPolicy::Alternating).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
        assert!(g.check_bipartite_sides().is_ok());
        assert_eq!(gen_grid(2, 4, SignPolicy::Random(5)).unwrap(), gen_grid(2, 4, SignPolicy::Random(5)).unwrap());
        assert!(gen_grid(0, 3, SignPolicy::AllPositive).is_err());
    }

    #[test]
    fn subdivided_cliques() {
        let s = gen_subdivided_clique(4, &[1; 6], SignPolicy::AllPositive).unwrap();
        assert_eq!((s.graph.num_vertices(), s.graph.num_edges()), (10, 12));
        let s = gen_subdivided_clique(3, &[1, 2, 3], SignPolicy::Alternating).unwrap();
        assert_eq!(s.graph.num_vertices(), 9);
        assert!(check_subdivided_clique(&s.graph, &s.branch).is_ok());
        let k5 = gen_subdivided_clique(5, &[0; 10], SignPolicy::AllPositive).unwrap();
        assert_eq!(k5.graph.num_edges(), 10);
        assert!(gen_subdivided_clique(3, &[1], SignPolicy::AllPositive).is_err());
    }

    #[test]
    fn hitting_set() {
        let (f, k) = gen_hitting_set_formula(3, &[vec![1, 2], vec![2, 3]], 1).unwrap();
        assert_eq!(f.num_clauses(), 3);
        assert!(bsat_oracle(&f, k as i64).is_some());
        let (f, k) = gen_hitting_set_formula(2, &[vec![1], vec![2]], 1).unwrap();
        assert!(bsat_oracle(&f, k as i64).is_none());
        assert!(gen_hitting_set_formula(2, &[vec![]], 1).is_err());
    }

    #[test]
    fn partitioned_clique() {
        // V1 = {a, b} = {1, 2}, V2 = {c, e} = {3, 4}
        let g = PartiteGraph::new(vec![vec![1, 2], vec![3, 4]], [(1, 3)]).unwrap();
        let (f, k) = gen_partitioned_clique_formula(&g);
        assert_eq!(f.num_clauses(), 2 + 3);
        assert!(bsat_oracle(&f, k as i64).is_some());
        assert!(check_module_contraction(&f, &g).is_ok());
        let g = PartiteGraph::new(vec![vec![1, 2], vec![3, 4]], []).unwrap();
        let (f, k) = gen_partitioned_clique_formula(&g);
        assert!(bsat_oracle(&f, k as i64).is_none());
        assert!(PartiteGraph::new(vec![vec![1, 2], vec![3]], []).is_err());
    }

    #[test]
    fn complete_pair_has_no_path() {
        let g = PartiteGraph::new(vec![vec![1], vec![2], vec![3]], [(1, 2)]).unwrap();
        let (f, _) = gen_partitioned_clique_formula(&g);
        assert!(check_module_contraction(&f, &g).is_err());
    }

    #[test]
    fn random_ksat() {
        let f = gen_random_ksat(15, 3, 30, 1).unwrap();
        let g = incidence_graph(&f);
        assert!(g.num_vertices() <= 45);
        assert_eq!(g.num_edges(), 90);
        assert_eq!(f, gen_random_ksat(15, 3, 30, 1).unwrap());
        let f = gen_random_ksat(15, 2, 15, 1).unwrap();
        assert_eq!(f.num_literals(), 30);
        assert!(gen_random_ksat(2, 1, 5, 0).is_err());
        assert!(gen_random_ksat(3, 1, 6, 0).is_ok());
    }
}
