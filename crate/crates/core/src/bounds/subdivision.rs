use std::collections::{BTreeMap, BTreeSet};

use crate::error::BoundsError;
use crate::sequence::ContractionSequence;
use crate::trigraph::{SidePolicy, SignedTrigraph, VertexId};

/// Checks that `graph` is a subdivision of `K_d` with branch vertices
/// `branch`: every branch vertex has degree `d - 1`, every other vertex
/// degree 2, and the subdivided paths join each pair of branch vertices
/// exactly once.
pub fn check_subdivided_clique(graph: &SignedTrigraph, branch: &BTreeSet<VertexId>) -> Result<(), BoundsError> {
    let fail = |m: String| Err(BoundsError::NotSubdividedClique(m));
    let d = branch.len();
    if d < 2 {
        return fail(format!("{d} branch vertices"));
    }
    for &v in branch {
        if !graph.contains(v) {
            return fail(format!("branch vertex {v} not in graph"));
        }
        if graph.degree(v) != d - 1 {
            return fail(format!("branch vertex {v} has degree {}", graph.degree(v)));
        }
    }
    for v in graph.vertices().filter(|v| !branch.contains(v)) {
        if graph.degree(v) != 2 {
            return fail(format!("subdivision vertex {v} has degree {}", graph.degree(v)));
        }
    }
    let mut seen_pairs = BTreeSet::new();
    let mut covered = BTreeSet::new();
    for &start in branch {
        for (first, _) in graph.neighbors(start) {
            let (mut prev, mut cur) = (start, first);
            let mut interior = Vec::new();
            while !branch.contains(&cur) {
                interior.push(cur);
                let next = graph
                    .neighbors(cur)
                    .map(|(x, _)| x)
                    .find(|&x| x != prev)
                    .expect("degree 2");
                prev = cur;
                cur = next;
            }
            if cur == start {
                return fail(format!("path from {start} returns to itself"));
            }
            if start < cur {
                if !seen_pairs.insert((start, cur)) {
                    return fail(format!("branch vertices {start} and {cur} joined twice"));
                }
                for x in interior {
                    if !covered.insert(x) {
                        return fail(format!("vertex {x} lies on two paths"));
                    }
                }
            }
        }
    }
    if seen_pairs.len() != d * (d - 1) / 2 {
        return fail("some pair of branch vertices is not joined".into());
    }
    if covered.len() != graph.num_vertices() - d {
        return fail("graph has vertices off the subdivided paths".into());
    }
    Ok(())
}

/// Branch vertices recovered from degrees; only unambiguous for `d >= 4`.
pub fn recover_branch_vertices(graph: &SignedTrigraph) -> Result<BTreeSet<VertexId>, BoundsError> {
    let branch: BTreeSet<VertexId> = graph.vertices().filter(|&v| graph.degree(v) != 2).collect();
    if branch.len() < 4 {
        return Err(BoundsError::NotSubdividedClique(
            "fewer than 4 vertices of degree other than 2; supply the branch vertices".into(),
        ));
    }
    Ok(branch)
}

/// Sequence that repeatedly contracts a subdivision vertex into an adjacent
/// branch vertex (smallest ids first) and finally contracts the remaining
/// clique. Every intermediate graph has maximum degree at most `d - 1`.
pub fn subdivided_clique_sequence(
    graph: &SignedTrigraph,
    branch: Option<&BTreeSet<VertexId>>,
) -> Result<ContractionSequence, BoundsError> {
    let branch = match branch {
        Some(b) => b.clone(),
        None => recover_branch_vertices(graph)?,
    };
    check_subdivided_clique(graph, &branch)?;

    let mut g = graph.clone();
    // internal id -> survivor label for branch vertices
    let mut kept: BTreeMap<VertexId, VertexId> = branch.iter().map(|&v| (v, v)).collect();
    let mut subdiv: BTreeSet<VertexId> = graph.vertices().filter(|v| !branch.contains(v)).collect();
    let mut steps = Vec::new();
    while let Some(u) = subdiv.iter().copied().find(|&u| g.neighbors(u).any(|(x, _)| kept.contains_key(&x))) {
        let v = g
            .neighbors(u)
            .map(|(x, _)| x)
            .filter(|x| kept.contains_key(x))
            .min_by_key(|x| kept[x])
            .unwrap();
        let label = kept.remove(&v).unwrap();
        steps.push((label, u));
        let w = g.contract_in_place(v, u, SidePolicy::Ignore)?;
        subdiv.remove(&u);
        kept.insert(w, label);
    }
    debug_assert!(subdiv.is_empty());
    let mut labels: Vec<VertexId> = kept.into_values().collect();
    labels.sort_unstable();
    for &l in &labels[1..] {
        steps.push((labels[0], l));
    }
    Ok(ContractionSequence::new(graph.num_vertices(), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::verify;
    use crate::trigraph::EdgeKind;

    fn cycle(n: usize) -> SignedTrigraph {
        let mut g = SignedTrigraph::with_plain_vertices(n);
        for i in 1..=n as VertexId {
            let j = i % n as VertexId + 1;
            g.set_edge(i, j, if i % 2 == 0 { EdgeKind::Neg } else { EdgeKind::Pos }).unwrap();
        }
        g
    }

    #[test]
    fn six_cycle_is_subdivided_triangle() {
        let g = cycle(6);
        let branch = BTreeSet::from([1, 3, 5]);
        let seq = subdivided_clique_sequence(&g, Some(&branch)).unwrap();
        let r = verify(&g, &seq, false);
        assert!(r.is_valid());
        assert_eq!(r.final_vertices, 1);
        assert!(r.max_total_degree() <= 2);
        assert!(r.width <= 2);
        assert!(recover_branch_vertices(&g).is_err());
    }

    #[test]
    fn plain_clique() {
        let mut g = SignedTrigraph::with_plain_vertices(5);
        for u in 1..=5 {
            for v in u + 1..=5 {
                g.set_edge(u, v, EdgeKind::Pos).unwrap();
            }
        }
        let seq = subdivided_clique_sequence(&g, None).unwrap();
        assert_eq!(seq.steps, vec![(1, 2), (1, 3), (1, 4), (1, 5)]);
        assert!(verify(&g, &seq, false).width <= 4);
    }

    #[test]
    fn rejects_non_subdivisions() {
        let g = cycle(6);
        assert!(check_subdivided_clique(&g, &BTreeSet::from([1, 2, 3])).is_ok());
        let mut two = cycle(3);
        for v in 4..=6 {
            two.add_vertex(v, crate::trigraph::Side::Plain);
        }
        two.set_edge(4, 5, EdgeKind::Pos).unwrap();
        two.set_edge(5, 6, EdgeKind::Pos).unwrap();
        two.set_edge(4, 6, EdgeKind::Pos).unwrap();
        assert!(check_subdivided_clique(&two, &BTreeSet::from([1, 2, 3])).is_err());
        assert!(check_subdivided_clique(&g, &BTreeSet::from([1, 4])).is_err());
        assert!(check_subdivided_clique(&cycle(5), &BTreeSet::from([1])).is_err());
    }
}
