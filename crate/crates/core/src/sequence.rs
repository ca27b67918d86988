//! Contraction sequences in survivor-id form, their replay on a trigraph,
//! verification and the `.tws` text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ParseError, SequenceError};
use crate::trigraph::{Side, SidePolicy, SignedTrigraph, VertexId};

/// Ordered list of `(keep, merge)` pairs. After a step the merged vertex
/// is addressed by `keep`; `merge` is gone.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ContractionSequence {
    pub num_vertices: usize,
    pub steps: Vec<(VertexId, VertexId)>,
    pub declared_width: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    /// Max red degree over the input graph and every intermediate graph.
    pub width: usize,
    pub is_bipartite_sequence: bool,
    /// Entry 0 is the input graph, entry `i` the graph after step `i`.
    pub per_step_max_red: Vec<usize>,
    /// Same indexing, counting black and red edges.
    pub per_step_max_degree: Vec<usize>,
    pub failure: Option<(usize, String)>,
    pub final_vertices: usize,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    /// First step (1-based; 0 = input graph) whose red degree exceeds `d`.
    pub fn first_step_exceeding(&self, d: usize) -> Option<usize> {
        self.per_step_max_red.iter().position(|&r| r > d)
    }

    pub fn max_total_degree(&self) -> usize {
        self.per_step_max_degree.iter().copied().max().unwrap_or(0)
    }
}

/// One replayed contraction: `x` and `y` are internal ids in the graph
/// before the step, `z` the fresh internal id after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplayStep {
    pub index: usize,
    pub keep: VertexId,
    pub merge: VertexId,
    pub x: VertexId,
    pub y: VertexId,
    pub z: VertexId,
}

/// Step-by-step replay of a survivor-id sequence using fresh-id contraction.
#[derive(Clone, Debug)]
pub struct Replay<'s> {
    graph: SignedTrigraph,
    internal: BTreeMap<VertexId, VertexId>,
    steps: &'s [(VertexId, VertexId)],
    pos: usize,
    policy: SidePolicy,
}

impl<'s> Replay<'s> {
    pub fn new(graph: &SignedTrigraph, seq: &'s ContractionSequence, policy: SidePolicy) -> Self {
        Replay {
            internal: graph.vertices().map(|v| (v, v)).collect(),
            graph: graph.clone(),
            steps: &seq.steps,
            pos: 0,
            policy,
        }
    }

    pub fn graph(&self) -> &SignedTrigraph {
        &self.graph
    }

    pub fn into_graph(self) -> SignedTrigraph {
        self.graph
    }

    /// Internal id of the vertex currently addressed as `survivor`.
    pub fn internal_id(&self, survivor: VertexId) -> Option<VertexId> {
        self.internal.get(&survivor).copied()
    }

    /// Number of steps replayed so far.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn next_step(&mut self) -> Option<Result<ReplayStep, SequenceError>> {
        let &(keep, merge) = self.steps.get(self.pos)?;
        self.pos += 1;
        let index = self.pos;
        let fail = |reason: String| Some(Err(SequenceError::Replay { step: index, reason }));
        if keep == merge {
            return fail(format!("vertex {keep} contracted with itself"));
        }
        let Some(x) = self.internal_id(keep) else {
            return fail(format!("unknown vertex {keep}"));
        };
        let Some(y) = self.internal_id(merge) else {
            return fail(format!("unknown vertex {merge}"));
        };
        let z = match self.graph.contract_in_place(x, y, self.policy) {
            Ok(z) => z,
            Err(e) => return fail(format!("{e} (ids {keep}, {merge})")),
        };
        self.internal.remove(&merge);
        self.internal.insert(keep, z);
        Some(Ok(ReplayStep {
            index,
            keep,
            merge,
            x,
            y,
            z,
        }))
    }
}

impl ContractionSequence {
    pub fn new(num_vertices: usize, steps: Vec<(VertexId, VertexId)>) -> Self {
        ContractionSequence {
            num_vertices,
            steps,
            declared_width: None,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Converts a list of fresh-id contractions (as produced by
    /// [`SignedTrigraph::contract_in_place`]) into survivor form, where the
    /// smaller survivor label of the two parts is kept.
    pub fn from_fresh_steps(graph: &SignedTrigraph, fresh: &[(VertexId, VertexId)]) -> Self {
        let mut label: BTreeMap<VertexId, VertexId> = graph.vertices().map(|v| (v, v)).collect();
        let mut next = graph.next_id();
        let mut steps = Vec::with_capacity(fresh.len());
        for &(x, y) in fresh {
            let (lx, ly) = (label[&x], label[&y]);
            let (keep, merge) = if lx <= ly { (lx, ly) } else { (ly, lx) };
            steps.push((keep, merge));
            label.insert(next, keep);
            next += 1;
        }
        ContractionSequence::new(graph.num_vertices(), steps)
    }

    pub fn to_tws(&self) -> String {
        let mut out = String::new();
        if let Some(d) = self.declared_width {
            let _ = writeln!(out, "c width {d}");
        }
        let _ = writeln!(out, "p tws {} {}", self.num_vertices, self.steps.len());
        for (keep, merge) in &self.steps {
            let _ = writeln!(out, "{keep} {merge}");
        }
        out
    }

    /// Parses `p tws <n> <steps>` followed by `keep merge` lines. Comment
    /// lines start with `c`; `c width <d>` sets the declared width.
    pub fn parse_tws(text: &str) -> Result<ContractionSequence, ParseError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut declared_width = None;
        let mut steps = Vec::new();
        for (index, line) in text.lines().enumerate() {
            let lineno = index + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.first().copied() {
                None => continue,
                Some("c") => {
                    if fields.get(1) == Some(&"width") {
                        let d = fields
                            .get(2)
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| ParseError::new(lineno, "bad `c width` line"))?;
                        declared_width = Some(d);
                    }
                    continue;
                }
                Some("p") => {
                    if header.is_some() {
                        return Err(ParseError::new(lineno, "duplicate header"));
                    }
                    if fields.len() != 4 || fields[1] != "tws" {
                        return Err(ParseError::new(lineno, "expected `p tws <n> <steps>`"));
                    }
                    let n: usize = fields[2]
                        .parse()
                        .map_err(|_| ParseError::new(lineno, "bad vertex count"))?;
                    let s: usize = fields[3]
                        .parse()
                        .map_err(|_| ParseError::new(lineno, "bad step count"))?;
                    if s > n.saturating_sub(1) {
                        return Err(ParseError::new(
                            lineno,
                            format!("{s} steps declared but a graph on {n} vertices allows at most {}", n.saturating_sub(1)),
                        ));
                    }
                    header = Some((n, s, lineno));
                }
                Some(_) => {
                    let (n, s, _) =
                        header.ok_or_else(|| ParseError::new(lineno, "step before `p tws` header"))?;
                    if fields.len() != 2 {
                        return Err(ParseError::new(lineno, "expected `keep merge`"));
                    }
                    let mut ids = [0 as VertexId; 2];
                    for (slot, field) in ids.iter_mut().zip(&fields) {
                        let v: VertexId = field
                            .parse()
                            .map_err(|_| ParseError::new(lineno, format!("bad vertex id `{field}`")))?;
                        if v == 0 || v as usize > n {
                            return Err(ParseError::new(lineno, format!("vertex {v} out of range 1..={n}")));
                        }
                        *slot = v;
                    }
                    if steps.len() == s {
                        return Err(ParseError::new(lineno, format!("more than the declared {s} steps")));
                    }
                    steps.push((ids[0], ids[1]));
                }
            }
        }
        let (n, s, line) = header.ok_or_else(|| ParseError::new(1, "missing `p tws` header"))?;
        if steps.len() != s {
            return Err(ParseError::new(
                line,
                format!("header declares {s} steps but {} were given", steps.len()),
            ));
        }
        Ok(ContractionSequence {
            num_vertices: n,
            steps,
            declared_width,
        })
    }
}

/// Replays `seq` on `graph` and measures it. Cross-side steps are tolerated
/// unless `require_bipartite` is set, in which case they stop the replay.
pub fn verify(graph: &SignedTrigraph, seq: &ContractionSequence, require_bipartite: bool) -> VerificationReport {
    let policy = if require_bipartite {
        SidePolicy::Enforce
    } else {
        SidePolicy::Ignore
    };
    let mut replay = Replay::new(graph, seq, policy);
    let mut per_step_max_red = vec![graph.max_red_degree()];
    let mut per_step_max_degree = vec![graph.max_degree()];
    let mut is_bipartite_sequence = true;
    let mut failure = None;
    if require_bipartite && !graph.sides_in_use() && graph.num_vertices() > 0 {
        failure = Some((0, "graph has vertices without a side".to_string()));
    }
    while failure.is_none() {
        let before = replay.graph().clone();
        match replay.next_step() {
            None => break,
            Some(Err(SequenceError::Replay { step, reason })) => failure = Some((step, reason)),
            Some(Err(e)) => failure = Some((replay.position(), e.to_string())),
            Some(Ok(step)) => {
                let (sx, sy) = (before.side(step.x).unwrap(), before.side(step.y).unwrap());
                if sx != sy || sx == Side::Plain {
                    is_bipartite_sequence = false;
                }
                let g = replay.graph();
                per_step_max_red.push(g.max_red_degree());
                per_step_max_degree.push(g.max_degree());
            }
        }
    }
    if !graph.sides_in_use() {
        is_bipartite_sequence = false;
    }
    VerificationReport {
        width: per_step_max_red.iter().copied().max().unwrap_or(0),
        is_bipartite_sequence: is_bipartite_sequence && failure.is_none(),
        per_step_max_red,
        per_step_max_degree,
        failure,
        final_vertices: replay.graph().num_vertices(),
    }
}

/// Width of `seq` on `graph`, or the replay error.
pub fn width_of(graph: &SignedTrigraph, seq: &ContractionSequence) -> Result<usize, SequenceError> {
    let report = verify(graph, seq, false);
    match report.failure {
        None => Ok(report.width),
        Some((step, reason)) => Err(SequenceError::Replay { step, reason }),
    }
}

/// Replays `seq` bipartitely and returns the final trigraph, failing unless
/// no two vertices of the same side remain.
pub fn replay_maximal_bipartite(
    graph: &SignedTrigraph,
    seq: &ContractionSequence,
) -> Result<SignedTrigraph, SequenceError> {
    let mut replay = Replay::new(graph, seq, SidePolicy::Enforce);
    while let Some(step) = replay.next_step() {
        step?;
    }
    let g = replay.into_graph();
    check_maximal_bipartite(&g)?;
    Ok(g)
}

pub(crate) fn check_maximal_bipartite(g: &SignedTrigraph) -> Result<(), SequenceError> {
    let vars = g.vertices_on(Side::Var).count();
    let clas = g.vertices_on(Side::Cla).count();
    let plain = g.vertices_on(Side::Plain).count();
    if plain > 0 || vars > 1 || clas > 1 {
        return Err(SequenceError::NotMaximalBipartite(format!(
            "{vars} var-side and {clas} clause-side vertices remain"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigraph::EdgeKind;

    fn path3(second: EdgeKind) -> SignedTrigraph {
        let mut g = SignedTrigraph::with_plain_vertices(3);
        g.set_edge(1, 2, EdgeKind::Pos).unwrap();
        g.set_edge(2, 3, second).unwrap();
        g
    }

    #[test]
    fn verify_examples() {
        let seq = ContractionSequence::new(3, vec![(1, 3), (1, 2)]);
        let r = verify(&path3(EdgeKind::Pos), &seq, false);
        assert!(r.is_valid());
        assert_eq!(r.width, 0);
        assert_eq!(r.final_vertices, 1);

        let r = verify(&path3(EdgeKind::Neg), &seq, false);
        assert_eq!(r.width, 1);
        assert_eq!(r.per_step_max_red, vec![0, 1, 0]);
        assert_eq!(r.first_step_exceeding(0), Some(1));

        let empty = ContractionSequence::new(3, vec![]);
        let r = verify(&path3(EdgeKind::Neg), &empty, false);
        assert_eq!(r.width, 0);
        assert!(r.is_valid());
    }

    #[test]
    fn single_edge() {
        let mut g = SignedTrigraph::with_plain_vertices(2);
        g.set_edge(1, 2, EdgeKind::Pos).unwrap();
        assert_eq!(width_of(&g, &ContractionSequence::new(2, vec![(1, 2)])).unwrap(), 0);
    }

    #[test]
    fn unknown_vertex_halts_replay() {
        let seq = ContractionSequence::new(3, vec![(1, 3), (3, 2)]);
        let r = verify(&path3(EdgeKind::Pos), &seq, false);
        assert_eq!(r.failure.as_ref().unwrap().0, 2);
        assert_eq!(r.per_step_max_red.len(), 2);
        assert!(width_of(&path3(EdgeKind::Pos), &seq).is_err());
    }

    #[test]
    fn parse_and_serialize() {
        let seq = ContractionSequence::parse_tws("p tws 4 2\n1 3\n2 4\n").unwrap();
        assert_eq!(seq.steps, vec![(1, 3), (2, 4)]);
        assert_eq!(seq.num_vertices, 4);
        assert_eq!(ContractionSequence::parse_tws(&seq.to_tws()).unwrap(), seq);

        let mut with_width = seq.clone();
        with_width.declared_width = Some(2);
        assert_eq!(ContractionSequence::parse_tws(&with_width.to_tws()).unwrap(), with_width);
    }

    #[test]
    fn parse_errors() {
        let e = ContractionSequence::parse_tws("p tws 4 5\n1 2\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(ContractionSequence::parse_tws("p tws 4 1\n1 5\n").unwrap_err().line, 2);
        assert_eq!(ContractionSequence::parse_tws("p tws 4 1\n").unwrap_err().line, 1);
        assert_eq!(ContractionSequence::parse_tws("p tws 4 1\n1 2\n2 3\n").unwrap_err().line, 3);
        assert!(ContractionSequence::parse_tws("1 2\n").is_err());
        assert!(ContractionSequence::parse_tws("p twx 4 1\n1 2\n").is_err());
    }

    #[test]
    fn fresh_steps_convert_to_survivors() {
        let g = path3(EdgeKind::Pos);
        let mut h = g.clone();
        let w = h.contract_in_place(3, 1, SidePolicy::Ignore).unwrap();
        h.contract_in_place(2, w, SidePolicy::Ignore).unwrap();
        let seq = ContractionSequence::from_fresh_steps(&g, &[(3, 1), (2, w)]);
        assert_eq!(seq.steps, vec![(1, 3), (1, 2)]);
    }

    #[test]
    fn maximal_bipartite_check() {
        let g = path3(EdgeKind::Pos).with_bipartition().unwrap();
        // sides: 1 Var, 2 Cla, 3 Var
        let seq = ContractionSequence::new(3, vec![(1, 3)]);
        let r = verify(&g, &seq, true);
        assert!(r.is_bipartite_sequence);
        assert!(replay_maximal_bipartite(&g, &seq).is_ok());
        assert!(replay_maximal_bipartite(&g, &ContractionSequence::new(3, vec![])).is_err());
        let cross = ContractionSequence::new(3, vec![(1, 2)]);
        let r = verify(&g, &cross, true);
        assert!(r.failure.is_some());
        assert!(!r.is_bipartite_sequence);
        assert!(!verify(&g, &cross, false).is_bipartite_sequence);
    }
}
