use std::collections::HashMap;

use crate::error::{BoundsError, GraphError};
use crate::sequence::ContractionSequence;
use crate::trigraph::{EdgeKind, Side, SignedTrigraph, VertexId};

pub const BRUTEFORCE_LIMIT: usize = 10;

/// Exact (bipartite) signed twin-width by exhaustive search over partitions.
/// The witness is the lexicographically smallest optimal sequence, with
/// steps named `(min of one part, min of the other part)`.
pub fn exact_tww_bruteforce(
    graph: &SignedTrigraph,
    bipartite: bool,
) -> Result<(usize, ContractionSequence), BoundsError> {
    let n = graph.num_vertices();
    if n > BRUTEFORCE_LIMIT {
        return Err(BoundsError::TooLarge(n, BRUTEFORCE_LIMIT));
    }
    if bipartite {
        if !graph.sides_in_use() && n > 0 {
            return Err(GraphError::Invalid("bipartite search needs var/cla sides".into()).into());
        }
        graph.check_bipartite_sides()?;
    }
    let search = Search::new(graph, bipartite);
    let start: Vec<u16> = (0..n).map(|i| 1u16 << i).collect();
    let mut memo = HashMap::new();
    let width = search.solve(&start, &mut memo);

    let mut steps = Vec::new();
    let mut state = start;
    loop {
        let next = search
            .successors(&state)
            .into_iter()
            .find(|(_, next)| search.solve(next, &mut memo) <= width);
        let Some(((a, b), next)) = next else { break };
        steps.push((search.ids[a], search.ids[b]));
        state = next;
    }
    Ok((width as usize, ContractionSequence::new(n, steps)))
}

struct Search {
    ids: Vec<VertexId>,
    pos: Vec<u16>,
    neg: Vec<u16>,
    red: Vec<u16>,
    sides: Vec<Side>,
    bipartite: bool,
}

impl Search {
    fn new(graph: &SignedTrigraph, bipartite: bool) -> Self {
        let ids: Vec<VertexId> = graph.vertices().collect();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let (mut pos, mut neg, mut red) = (vec![0u16; n], vec![0u16; n], vec![0u16; n]);
        for (u, v, k) in graph.edges() {
            let (a, b) = (index[&u], index[&v]);
            let masks = match k {
                EdgeKind::Pos => &mut pos,
                EdgeKind::Neg => &mut neg,
                EdgeKind::Red => &mut red,
            };
            masks[a] |= 1 << b;
            masks[b] |= 1 << a;
        }
        let sides = ids.iter().map(|&v| graph.side(v).unwrap()).collect();
        Search {
            ids,
            pos,
            neg,
            red,
            sides,
            bipartite,
        }
    }

    fn side_of(&self, part: u16) -> Side {
        self.sides[part.trailing_zeros() as usize]
    }

    fn is_red(&self, x: u16, y: u16) -> bool {
        let mut all_pos = true;
        let mut all_neg = true;
        let mut none = true;
        for i in bits(x) {
            all_pos &= self.pos[i] & y == y;
            all_neg &= self.neg[i] & y == y;
            none &= (self.pos[i] | self.neg[i] | self.red[i]) & y == 0;
        }
        !(all_pos || all_neg || none)
    }

    fn max_red(&self, parts: &[u16]) -> u8 {
        let mut deg = vec![0u8; parts.len()];
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if self.is_red(parts[i], parts[j]) {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Successor states in lexicographic order of the step `(a, b)`, where
    /// `a < b` are the smallest original indices of the merged parts.
    fn successors(&self, parts: &[u16]) -> Vec<((usize, usize), Vec<u16>)> {
        let mut out = Vec::new();
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if self.bipartite && self.side_of(parts[i]) != self.side_of(parts[j]) {
                    continue;
                }
                let mut next: Vec<u16> = parts
                    .iter()
                    .enumerate()
                    .filter(|&(h, _)| h != j)
                    .map(|(h, &p)| if h == i { p | parts[j] } else { p })
                    .collect();
                next.sort_unstable_by_key(|p| p.trailing_zeros());
                let a = parts[i].trailing_zeros() as usize;
                let b = parts[j].trailing_zeros() as usize;
                out.push(((a, b), next));
            }
        }
        out
    }

    /// Minimum over continuations of the max red degree from `parts` on.
    fn solve(&self, parts: &[u16], memo: &mut HashMap<Vec<u16>, u8>) -> u8 {
        if let Some(&w) = memo.get(parts) {
            return w;
        }
        let here = self.max_red(parts);
        let mut best: Option<u8> = None;
        for (_, next) in self.successors(parts) {
            let w = self.solve(&next, memo).max(here);
            if best.is_none_or(|b| w < b) {
                best = Some(w);
            }
            if w == here {
                break;
            }
        }
        let w = best.unwrap_or(here);
        memo.insert(parts.to_vec(), w);
        w
    }
}

fn bits(mut m: u16) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::verify;

    #[test]
    fn small_examples() {
        let g = SignedTrigraph::with_plain_vertices(5);
        assert_eq!(exact_tww_bruteforce(&g, false).unwrap().0, 0);

        let mut k2 = SignedTrigraph::with_plain_vertices(2);
        k2.set_edge(1, 2, EdgeKind::Pos).unwrap();
        assert_eq!(exact_tww_bruteforce(&k2, false).unwrap().0, 0);

        let mut p3 = SignedTrigraph::with_plain_vertices(3);
        p3.set_edge(1, 2, EdgeKind::Pos).unwrap();
        p3.set_edge(2, 3, EdgeKind::Neg).unwrap();
        let (w, seq) = exact_tww_bruteforce(&p3, false).unwrap();
        assert_eq!(w, 1);
        assert_eq!(verify(&p3, &seq, false).width, 1);
        assert_eq!(seq.steps, vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn bipartite_witness_ends_with_two_vertices() {
        let mut p3 = SignedTrigraph::with_plain_vertices(3);
        p3.set_edge(1, 2, EdgeKind::Pos).unwrap();
        p3.set_edge(2, 3, EdgeKind::Neg).unwrap();
        let p3 = p3.with_bipartition().unwrap();
        let (w, seq) = exact_tww_bruteforce(&p3, true).unwrap();
        assert_eq!(w, 1);
        let r = verify(&p3, &seq, true);
        assert!(r.is_bipartite_sequence);
        assert_eq!(r.final_vertices, 2);
    }

    #[test]
    fn size_guard() {
        let g = SignedTrigraph::with_plain_vertices(11);
        assert!(matches!(exact_tww_bruteforce(&g, false), Err(BoundsError::TooLarge(11, 10))));
    }
}
