//! CNF encoding of "the signed bipartite twin-width is at most d".
//!
//! Relative encoding: `o(i, j)` orders the vertices by elimination time,
//! `p(i, j)` makes same-side `j` the vertex `i` is merged into, and
//! `r(t, u, v)` says `u` and `v` are red-adjacent once `t` is eliminated.
//! Vertices without a parent survive and come last. Between two current
//! vertices without a red edge the black edge (or non-edge) equals the one
//! between the two original vertices, which is what lets the red variables
//! refer to original adjacency only.

use std::collections::{BTreeMap, HashMap};

use crate::cnf::{Formula, Lit};
use crate::error::EncodeError;
use crate::sequence::{verify, ContractionSequence};
use crate::trigraph::{Side, SignedTrigraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// `i` is eliminated before `j` (`i < j` as ids)
    Order(VertexId, VertexId),
    /// `i` is merged into `j`
    Parent(VertexId, VertexId),
    /// red edge `u`-`v` after eliminating `t`
    Red(VertexId, VertexId, VertexId),
    Counter,
}

#[derive(Clone, Debug)]
pub struct EncodingArtifact {
    pub cnf: Formula,
    /// role of each encoding variable `1..=cnf.num_vars()`
    pub legend: BTreeMap<u32, Role>,
    pub d: usize,
    pub graph: SignedTrigraph,
    pub side_sizes: (usize, usize),
}

impl EncodingArtifact {
    pub fn num_parent_vars(&self) -> usize {
        self.legend.values().filter(|r| matches!(r, Role::Parent(..))).count()
    }
}

struct Builder {
    next: u32,
    clauses: Vec<Vec<Lit>>,
    legend: BTreeMap<u32, Role>,
}

impl Builder {
    fn var(&mut self, role: Role) -> u32 {
        self.next += 1;
        self.legend.insert(self.next, role);
        self.next
    }

    fn clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        self.clauses.push(lits.into_iter().collect());
    }

    /// Sinz sequential counter: at most `d` of `xs` are true.
    fn at_most(&mut self, xs: &[Lit], d: usize) {
        let m = xs.len();
        if m <= d {
            return;
        }
        if d == 0 {
            for &x in xs {
                self.clause([x.negate()]);
            }
            return;
        }
        // s[i][j]: at least j+1 of xs[..=i] are true
        let s: Vec<Vec<u32>> = (0..m - 1).map(|_| (0..d).map(|_| self.var(Role::Counter)).collect()).collect();
        self.clause([xs[0].negate(), Lit::pos(s[0][0])]);
        for j in 1..d {
            self.clause([Lit::neg(s[0][j])]);
        }
        for i in 1..m - 1 {
            self.clause([xs[i].negate(), Lit::pos(s[i][0])]);
            self.clause([Lit::neg(s[i - 1][0]), Lit::pos(s[i][0])]);
            for j in 1..d {
                self.clause([xs[i].negate(), Lit::neg(s[i - 1][j - 1]), Lit::pos(s[i][j])]);
                self.clause([Lit::neg(s[i - 1][j]), Lit::pos(s[i][j])]);
            }
            self.clause([xs[i].negate(), Lit::neg(s[i - 1][d - 1])]);
        }
        self.clause([xs[m - 1].negate(), Lit::neg(s[m - 2][d - 1])]);
    }
}

/// Encodes "`graph` has a maximal bipartite contraction sequence of width
/// at most `d`". The graph must carry var/cla sides.
pub fn encode(graph: &SignedTrigraph, d: usize) -> Result<EncodingArtifact, EncodeError> {
    graph
        .check_bipartite_sides()
        .map_err(|e| EncodeError::NotBipartite(e.to_string()))?;
    if graph.vertices().any(|v| graph.side(v) == Some(Side::Plain)) {
        return Err(EncodeError::NotBipartite("graph has vertices without a side".into()));
    }
    let vs: Vec<VertexId> = graph.vertices().collect();
    let mut b = Builder {
        next: 0,
        clauses: Vec::new(),
        legend: BTreeMap::new(),
    };

    let mut order: HashMap<(VertexId, VertexId), u32> = HashMap::new();
    for (i, &u) in vs.iter().enumerate() {
        for &v in &vs[i + 1..] {
            order.insert((u, v), b.var(Role::Order(u, v)));
        }
    }
    // literal "u before v"
    let before = |u: VertexId, v: VertexId| -> Lit {
        if u < v {
            Lit::pos(order[&(u, v)])
        } else {
            Lit::neg(order[&(v, u)])
        }
    };
    for (i, &a) in vs.iter().enumerate() {
        for (j, &c) in vs.iter().enumerate().skip(i + 1) {
            for &e in &vs[j + 1..] {
                b.clause([before(a, c).negate(), before(c, e).negate(), before(a, e)]);
                b.clause([before(e, c).negate(), before(c, a).negate(), before(e, a)]);
                b.clause([before(a, e).negate(), before(e, c).negate(), before(a, c)]);
                b.clause([before(c, e).negate(), before(e, a).negate(), before(c, a)]);
                b.clause([before(c, a).negate(), before(a, e).negate(), before(c, e)]);
                b.clause([before(e, a).negate(), before(a, c).negate(), before(e, c)]);
            }
        }
    }

    let same_side = |u: VertexId, v: VertexId| graph.side(u) == graph.side(v);
    let mut parent: HashMap<(VertexId, VertexId), u32> = HashMap::new();
    for &i in &vs {
        for &j in &vs {
            if i != j && same_side(i, j) {
                parent.insert((i, j), b.var(Role::Parent(i, j)));
            }
        }
    }
    for &i in &vs {
        let ps: Vec<Lit> = vs
            .iter()
            .filter(|&&j| j != i && same_side(i, j))
            .map(|&j| Lit::pos(parent[&(i, j)]))
            .collect();
        for (x, &pj) in ps.iter().enumerate() {
            for &pk in &ps[x + 1..] {
                b.clause([pj.negate(), pk.negate()]);
            }
        }
        for &j in &vs {
            if j == i {
                continue;
            }
            if same_side(i, j) {
                // parent is later; anything later on the same side forces a parent
                b.clause([Lit::neg(parent[&(i, j)]), before(i, j)]);
                let mut c = vec![before(i, j).negate()];
                c.extend(&ps);
                b.clause(c);
            }
            // survivor i comes after every eliminated j
            for &k in &vs {
                if k != j && same_side(j, k) {
                    let mut c = vec![before(j, i), Lit::neg(parent[&(j, k)])];
                    c.extend(&ps);
                    b.clause(c);
                }
            }
        }
    }

    // red variables for cross-side pairs, per elimination time
    let mut red: HashMap<(VertexId, VertexId, VertexId), u32> = HashMap::new();
    let cross: Vec<(VertexId, VertexId)> = vs
        .iter()
        .flat_map(|&u| vs.iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| u < v && !same_side(u, v))
        .collect();
    for &t in &vs {
        for &(u, v) in &cross {
            if t != u && t != v {
                red.insert((t, u, v), b.var(Role::Red(t, u, v)));
            }
        }
    }
    let r = |t: VertexId, u: VertexId, v: VertexId| -> Lit { Lit::pos(red[&(t, u.min(v), u.max(v))]) };
    let symbol = |u: VertexId, v: VertexId| graph.edge(u, v);

    for &t in &vs {
        for &j in &vs {
            if j == t || !same_side(t, j) {
                continue;
            }
            let p = Lit::neg(parent[&(t, j)]);
            for &x in &vs {
                if same_side(x, t) {
                    continue;
                }
                // t merged into j disagrees on x
                if symbol(t, x) != symbol(j, x) {
                    b.clause([p, before(t, x).negate(), r(t, j, x)]);
                }
                // red edges of t move to j
                for &s in &vs {
                    if s != t && s != x {
                        b.clause([p, before(s, t).negate(), r(s, t, x).negate(), before(t, x).negate(), r(t, j, x)]);
                    }
                }
            }
        }
    }
    // persistence: red edges between vertices alive after t stay red
    for &(u, v) in &cross {
        for &s in &vs {
            if s == u || s == v {
                continue;
            }
            for &t in &vs {
                if t == s || t == u || t == v {
                    continue;
                }
                b.clause([
                    r(s, u, v).negate(),
                    before(s, t).negate(),
                    before(t, u).negate(),
                    before(t, v).negate(),
                    r(t, u, v),
                ]);
            }
        }
    }
    for &t in &vs {
        for &x in &vs {
            if x == t {
                continue;
            }
            let xs: Vec<Lit> = vs
                .iter()
                .filter(|&&v| v != t && v != x && !same_side(v, x))
                .map(|&v| r(t, x, v))
                .collect();
            b.at_most(&xs, d);
        }
    }

    let vars = graph.vertices_on(Side::Var).count();
    let clas = graph.vertices_on(Side::Cla).count();
    let num_vars = b.next as usize;
    Ok(EncodingArtifact {
        cnf: Formula::new(num_vars, b.clauses),
        legend: b.legend,
        d,
        graph: graph.clone(),
        side_sizes: (vars, clas),
    })
}

/// Reads the elimination order and parents from a model (`model[v - 1]`
/// is the value of encoding variable `v`) and checks the resulting
/// sequence against the graph.
pub fn decode(artifact: &EncodingArtifact, model: &[bool]) -> Result<ContractionSequence, EncodeError> {
    let bad = |m: String| Err(EncodeError::Decode(m));
    if model.len() < artifact.cnf.num_vars() {
        return bad(format!("model has {} values, encoding has {} variables", model.len(), artifact.cnf.num_vars()));
    }
    if let Some(i) = artifact
        .cnf
        .clauses()
        .iter()
        .position(|c| !c.lits().iter().any(|l| model[l.var() as usize - 1] == l.is_positive()))
    {
        return bad(format!("clause {} is falsified", i + 1));
    }
    let g = &artifact.graph;
    let mut preds: BTreeMap<VertexId, usize> = g.vertices().map(|v| (v, 0)).collect();
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (&var, role) in &artifact.legend {
        let value = model[var as usize - 1];
        match *role {
            Role::Order(u, v) => *preds.get_mut(if value { &v } else { &u }).unwrap() += 1,
            Role::Parent(i, j) if value
                && parent.insert(i, j).is_some() => {
                    return bad(format!("vertex {i} has two parents"));
                }
            _ => {}
        }
    }
    let mut order: Vec<(usize, VertexId)> = preds.into_iter().map(|(v, c)| (c, v)).collect();
    order.sort_unstable();
    if order.iter().enumerate().any(|(i, &(c, _))| c != i) {
        return bad("order variables are not a total order".into());
    }
    let steps: Vec<(VertexId, VertexId)> = order
        .iter()
        .filter_map(|&(_, v)| parent.get(&v).map(|&p| (p, v)))
        .collect();
    let seq = ContractionSequence::new(g.num_vertices(), steps);
    let report = verify(g, &seq, true);
    if let Some((step, reason)) = report.failure {
        return bad(format!("decoded sequence fails at step {step}: {reason}"));
    }
    if report.final_vertices > 2 {
        return bad(format!("decoded sequence leaves {} vertices", report.final_vertices));
    }
    if report.width > artifact.d {
        return bad(format!("decoded sequence has width {} > {}", report.width, artifact.d));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigraph::EdgeKind;

    /// tiny DPLL for tests only
    fn brute_solve(f: &Formula) -> Option<Vec<bool>> {
        fn rec(f: &Formula, vals: &mut Vec<Option<bool>>) -> bool {
            let mut unassigned = None;
            for c in f.clauses() {
                let mut sat = false;
                let mut open = Vec::new();
                for l in c.lits() {
                    match vals[l.var() as usize] {
                        Some(b) if b == l.is_positive() => sat = true,
                        Some(_) => {}
                        None => open.push(*l),
                    }
                }
                if sat {
                    continue;
                }
                match open.len() {
                    0 => return false,
                    1 => {
                        let l = open[0];
                        vals[l.var() as usize] = Some(l.is_positive());
                        let snapshot = vals.clone();
                        if rec(f, vals) {
                            return true;
                        }
                        *vals = snapshot;
                        vals[l.var() as usize] = None;
                        return false;
                    }
                    _ => unassigned = unassigned.or(Some(open[0].var())),
                }
            }
            let Some(v) = unassigned else { return true };
            for b in [true, false] {
                let snapshot = vals.clone();
                vals[v as usize] = Some(b);
                if rec(f, vals) {
                    return true;
                }
                *vals = snapshot;
            }
            false
        }
        let mut vals = vec![None; f.num_vars() + 1];
        rec(f, &mut vals).then(|| vals[1..].iter().map(|b| b.unwrap_or(false)).collect())
    }

    fn graph(vars: &[VertexId], clas: &[VertexId], edges: &[(VertexId, VertexId, EdgeKind)]) -> SignedTrigraph {
        let mut g = SignedTrigraph::new();
        for &v in vars {
            g.add_vertex(v, Side::Var);
        }
        for &c in clas {
            g.add_vertex(c, Side::Cla);
        }
        for &(u, v, k) in edges {
            g.set_edge(u, v, k).unwrap();
        }
        g
    }

    #[test]
    fn twin_clauses_have_width_zero() {
        let g = graph(&[1], &[2, 3], &[(1, 2, EdgeKind::Pos), (1, 3, EdgeKind::Pos)]);
        let art = encode(&g, 0).unwrap();
        let model = brute_solve(&art.cnf).expect("satisfiable");
        let seq = decode(&art, &model).unwrap();
        assert_eq!(verify(&g, &seq, true).width, 0);
    }

    #[test]
    fn mixed_path_needs_one() {
        let g = graph(&[1, 3], &[2], &[(1, 2, EdgeKind::Pos), (3, 2, EdgeKind::Neg)]);
        assert!(brute_solve(&encode(&g, 0).unwrap().cnf).is_none());
        let art = encode(&g, 1).unwrap();
        let model = brute_solve(&art.cnf).unwrap();
        assert!(verify(&g, &decode(&art, &model).unwrap(), true).width <= 1);
    }

    #[test]
    fn parent_variables_are_same_side_only() {
        let g = graph(&[1, 2, 3], &[4, 5], &[(1, 4, EdgeKind::Pos)]);
        let art = encode(&g, 1).unwrap();
        assert_eq!(art.num_parent_vars(), 3 * 2 + 2);
        assert!(art.num_parent_vars() < 5 * 4);
    }

    #[test]
    fn decode_rejects_non_models() {
        let g = graph(&[1], &[2, 3], &[(1, 2, EdgeKind::Pos)]);
        let art = encode(&g, 0).unwrap();
        assert!(decode(&art, &vec![false; art.cnf.num_vars()]).is_err());
        assert!(decode(&art, &[]).is_err());
    }
}
