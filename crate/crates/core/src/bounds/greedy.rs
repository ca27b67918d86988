use std::collections::BTreeMap;

use crate::sequence::ContractionSequence;
use crate::trigraph::{EdgeKind, SidePolicy, SignedTrigraph, VertexId};

/// How equally scored candidate pairs are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Smallest,
    Largest,
    Seeded(u64),
}

/// Greedy sequence minimizing (max red degree, red edge count) after each
/// step, ties by smallest id pair. In bipartite mode only vertices of the
/// same side are merged and the sequence stops when no such pair is left.
pub fn greedy_sequence(graph: &SignedTrigraph, bipartite: bool) -> ContractionSequence {
    greedy_sequence_with(graph, bipartite, TieBreak::Smallest)
}

pub fn greedy_sequence_with(graph: &SignedTrigraph, bipartite: bool, tie: TieBreak) -> ContractionSequence {
    let mut g = graph.clone();
    let mut fresh = Vec::new();
    let mut degree_count: BTreeMap<usize, usize> = BTreeMap::new();
    for v in g.vertices() {
        *degree_count.entry(g.red_degree(v)).or_default() += 1;
    }
    let mut total_red = g.num_red_edges();

    loop {
        let verts: Vec<VertexId> = g.vertices().collect();
        let mut best: Option<((usize, usize, u64, VertexId, VertexId), VertexId, VertexId)> = None;
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                if bipartite && g.side(u) != g.side(v) {
                    continue;
                }
                let (max_red, red_total) = score(&g, u, v, &degree_count, total_red);
                let key = match tie {
                    TieBreak::Smallest => (max_red, red_total, 0, u, v),
                    TieBreak::Largest => (max_red, red_total, 0, VertexId::MAX - v, VertexId::MAX - u),
                    TieBreak::Seeded(seed) => (max_red, red_total, mix(seed, u, v), u, v),
                };
                if best.as_ref().is_none_or(|b| key < b.0) {
                    best = Some((key, u, v));
                }
            }
        }
        let Some((_, u, v)) = best else { break };

        let mut touched: Vec<VertexId> = g.neighbors(u).chain(g.neighbors(v)).map(|(x, _)| x).collect();
        touched.extend([u, v]);
        touched.sort_unstable();
        touched.dedup();
        for &x in &touched {
            dec(&mut degree_count, g.red_degree(x));
        }
        total_red = total_red + usize::from(g.edge(u, v) == Some(EdgeKind::Red)) - g.red_degree(u) - g.red_degree(v);
        let w = g.contract_in_place(u, v, SidePolicy::Ignore).expect("candidate pair is valid");
        total_red += g.red_degree(w);
        for x in touched.into_iter().filter(|&x| x != u && x != v).chain([w]) {
            *degree_count.entry(g.red_degree(x)).or_default() += 1;
        }
        fresh.push((u, v));
    }
    ContractionSequence::from_fresh_steps(graph, &fresh)
}

fn dec(counts: &mut BTreeMap<usize, usize>, d: usize) {
    let c = counts.get_mut(&d).expect("degree is counted");
    *c -= 1;
    if *c == 0 {
        counts.remove(&d);
    }
}

/// Max red degree and red edge count after contracting `u` and `v`.
fn score(
    g: &SignedTrigraph,
    u: VertexId,
    v: VertexId,
    degree_count: &BTreeMap<usize, usize>,
    total_red: usize,
) -> (usize, usize) {
    let mut changed: BTreeMap<VertexId, (usize, usize)> = BTreeMap::new();
    let mut w_red = 0;
    for (x, _) in g.neighbors(u).chain(g.neighbors(v)) {
        if x == u || x == v || changed.contains_key(&x) {
            continue;
        }
        let old = g.red_degree(x);
        let mut new = old;
        if g.edge(u, x) == Some(EdgeKind::Red) {
            new -= 1;
        }
        if g.edge(v, x) == Some(EdgeKind::Red) {
            new -= 1;
        }
        if g.merged_kind(u, v, x) == Some(EdgeKind::Red) {
            new += 1;
            w_red += 1;
        }
        changed.insert(x, (old, new));
    }

    let mut removed: BTreeMap<usize, usize> = BTreeMap::new();
    for d in [g.red_degree(u), g.red_degree(v)] {
        *removed.entry(d).or_default() += 1;
    }
    for &(old, _) in changed.values() {
        *removed.entry(old).or_default() += 1;
    }
    let untouched_max = degree_count
        .iter()
        .rev()
        .find(|(d, c)| **c > removed.get(d).copied().unwrap_or(0))
        .map_or(0, |(d, _)| *d);
    let max_red = changed
        .values()
        .map(|&(_, new)| new)
        .chain([w_red, untouched_max])
        .max()
        .unwrap_or(0);

    let uv_red = usize::from(g.edge(u, v) == Some(EdgeKind::Red));
    let red_total = total_red + uv_red + w_red - g.red_degree(u) - g.red_degree(v);
    (max_red, red_total)
}

fn mix(seed: u64, u: VertexId, v: VertexId) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for x in [u as u64, v as u64] {
        h ^= x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    h
}
