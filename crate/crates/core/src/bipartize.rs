//! Turning an arbitrary contraction sequence of a bipartite signed graph
//! into a bipartite one whose width is larger by at most 2.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{GraphError, SequenceError};
use crate::sequence::{verify, ContractionSequence};
use crate::trigraph::{Side, SidePolicy, SignedTrigraph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartizationResult {
    pub seq: ContractionSequence,
    /// `index_map[j - 1]` is the input step producing output step `j`.
    pub index_map: Vec<usize>,
    /// Output steps (1-based) whose graph is the middle of a double step.
    pub doubled_steps: BTreeSet<usize>,
    /// Input steps merging one var-only and one clause-only vertex, which
    /// produce no output step.
    pub skipped: Vec<usize>,
    pub input_width: usize,
    /// `(input step, input vertex)` pairs where a part exceeded the red
    /// degree bound of the input; only filled when instrumented.
    pub part_degree_violations: Vec<(usize, VertexId)>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Parts {
    a: Option<VertexId>,
    b: Option<VertexId>,
}

impl Parts {
    fn swapped(self) -> Parts {
        Parts { a: self.b, b: self.a }
    }
}

struct Output {
    graph: SignedTrigraph,
    internal: BTreeMap<VertexId, VertexId>,
    steps: Vec<(VertexId, VertexId)>,
    index_map: Vec<usize>,
}

impl Output {
    fn contract(&mut self, keep: VertexId, merge: VertexId, input_step: usize) -> Result<(), SequenceError> {
        let x = self.internal[&keep];
        let y = self.internal.remove(&merge).unwrap();
        let z = self
            .graph
            .contract_in_place(x, y, SidePolicy::Enforce)
            .map_err(|e| SequenceError::Replay {
                step: input_step,
                reason: e.to_string(),
            })?;
        self.internal.insert(keep, z);
        self.steps.push((keep, merge));
        self.index_map.push(input_step);
        Ok(())
    }

    fn red_excluding(&self, part: VertexId, other: Option<VertexId>) -> usize {
        let p = self.internal[&part];
        let o = other.map(|o| self.internal[&o]);
        self.graph.red_neighbors(p).filter(|&x| Some(x) != o).count()
    }
}

/// Bipartizes `seq`, a contraction sequence of `graph` that may merge
/// vertices of different sides. `graph` must carry var/cla sides.
pub fn bipartize(graph: &SignedTrigraph, seq: &ContractionSequence) -> Result<BipartizationResult, SequenceError> {
    bipartize_with(graph, seq, false)
}

/// As [`bipartize`]; with `instrument` set, checks after every input step
/// that each part has red degree at most the input width once its sibling
/// part is removed.
pub fn bipartize_with(
    graph: &SignedTrigraph,
    seq: &ContractionSequence,
    instrument: bool,
) -> Result<BipartizationResult, SequenceError> {
    if !graph.sides_in_use() && graph.num_vertices() > 0 {
        return Err(GraphError::Invalid("graph has vertices without a side".into()).into());
    }
    graph.check_bipartite_sides()?;
    let report = verify(graph, seq, false);
    if let Some((step, reason)) = report.failure {
        return Err(SequenceError::Replay { step, reason });
    }
    let d = report.width;

    let mut parts: BTreeMap<VertexId, Parts> = graph
        .vertices()
        .map(|v| {
            let p = match graph.side(v) {
                Some(Side::Var) => Parts { a: Some(v), b: None },
                _ => Parts { a: None, b: Some(v) },
            };
            (v, p)
        })
        .collect();
    let mut out = Output {
        graph: graph.clone(),
        internal: graph.vertices().map(|v| (v, v)).collect(),
        steps: Vec::new(),
        index_map: Vec::new(),
    };
    let mut doubled_steps = BTreeSet::new();
    let mut skipped = Vec::new();
    let mut part_degree_violations = Vec::new();

    for (i, &(keep, merge)) in seq.steps.iter().enumerate() {
        let step = i + 1;
        let pu = parts.remove(&keep).expect("input sequence verified");
        let pv = parts.remove(&merge).expect("input sequence verified");
        let empties = [pu.a, pu.b, pv.a, pv.b].iter().filter(|p| p.is_none()).count();
        let merged = match empties {
            2 => {
                if pu.a.is_some() == pv.a.is_some() {
                    let (x, y) = (pu.a.or(pu.b).unwrap(), pv.a.or(pv.b).unwrap());
                    out.contract(x, y, step)?;
                    if pu.a.is_some() {
                        Parts { a: Some(x), b: None }
                    } else {
                        Parts { a: None, b: Some(x) }
                    }
                } else {
                    skipped.push(step);
                    Parts {
                        a: pu.a.or(pv.a),
                        b: pu.b.or(pv.b),
                    }
                }
            }
            1 => {
                // normalize so that v's B-part is the empty one
                let (mut u, mut v, mut flipped) = (pu, pv, false);
                if u.b.is_none() {
                    std::mem::swap(&mut u, &mut v);
                }
                if v.b.is_some() {
                    (u, v) = (u.swapped(), v.swapped());
                    flipped = true;
                    if u.b.is_none() {
                        std::mem::swap(&mut u, &mut v);
                    }
                }
                debug_assert!(v.b.is_none() && u.a.is_some() && u.b.is_some() && v.a.is_some());
                let (x, y) = (u.a.unwrap(), v.a.unwrap());
                out.contract(x, y, step)?;
                let p = Parts { a: Some(x), b: u.b };
                if flipped {
                    p.swapped()
                } else {
                    p
                }
            }
            0 => {
                let (xa, ya) = (pu.a.unwrap(), pv.a.unwrap());
                out.contract(xa, ya, step)?;
                doubled_steps.insert(out.steps.len());
                let (xb, yb) = (pu.b.unwrap(), pv.b.unwrap());
                out.contract(xb, yb, step)?;
                Parts { a: Some(xa), b: Some(xb) }
            }
            _ => unreachable!("every vertex has a non-empty part"),
        };
        parts.insert(keep, merged);

        if instrument {
            for (&x, p) in &parts {
                let a_bad = p.a.is_some_and(|a| out.red_excluding(a, p.b) > d);
                let b_bad = p.b.is_some_and(|b| out.red_excluding(b, p.a) > d);
                if a_bad || b_bad {
                    part_degree_violations.push((step, x));
                }
            }
        }
    }

    Ok(BipartizationResult {
        seq: ContractionSequence::new(graph.num_vertices(), out.steps),
        index_map: out.index_map,
        doubled_steps,
        skipped,
        input_width: d,
        part_degree_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigraph::EdgeKind;

    /// 4-cycle a1 b1 a2 b2, all positive; a-vertices are vars.
    fn c4() -> SignedTrigraph {
        let mut g = SignedTrigraph::new();
        g.add_vertex(1, Side::Var);
        g.add_vertex(2, Side::Cla);
        g.add_vertex(3, Side::Var);
        g.add_vertex(4, Side::Cla);
        for (u, v) in [(1, 2), (2, 3), (3, 4), (4, 1)] {
            g.set_edge(u, v, EdgeKind::Pos).unwrap();
        }
        g
    }

    #[test]
    fn cycle_double_step() {
        let g = c4();
        let input = ContractionSequence::new(4, vec![(1, 2), (3, 4), (1, 3)]);
        let r = bipartize_with(&g, &input, true).unwrap();
        assert_eq!(r.skipped, vec![1, 2]);
        assert_eq!(r.seq.steps, vec![(1, 3), (2, 4)]);
        assert_eq!(r.index_map, vec![3, 3]);
        assert_eq!(r.doubled_steps, BTreeSet::from([1]));
        let rep = verify(&g, &r.seq, true);
        assert!(rep.is_bipartite_sequence);
        assert_eq!(rep.final_vertices, 2);
        assert!(rep.width <= r.input_width + 2);
        assert!(r.part_degree_violations.is_empty());
    }

    #[test]
    fn bipartite_input_is_fixed_point() {
        let g = c4();
        let input = ContractionSequence::new(4, vec![(1, 3), (2, 4), (1, 2)]);
        let r = bipartize(&g, &input).unwrap();
        assert_eq!(r.seq.steps, vec![(1, 3), (2, 4)]);
        assert_eq!(r.skipped, vec![3]);
        assert_eq!(verify(&g, &r.seq, true).width, verify(&g, &input, false).width);
    }

    #[test]
    fn one_empty_part() {
        let g = c4();
        let input = ContractionSequence::new(4, vec![(1, 2), (3, 1), (4, 3)]);
        let r = bipartize(&g, &input).unwrap();
        assert_eq!(r.seq.steps, vec![(1, 3), (2, 4)]);
        assert!(r.doubled_steps.is_empty());
        assert!(verify(&g, &r.seq, true).is_bipartite_sequence);
    }

    #[test]
    fn rejects_invalid_input() {
        let g = c4();
        assert!(bipartize(&g, &ContractionSequence::new(4, vec![(1, 9)])).is_err());
        let plain = SignedTrigraph::with_plain_vertices(2);
        assert!(bipartize(&plain, &ContractionSequence::new(2, vec![])).is_err());
    }
}
