//! Signed clique-width expressions and their conversion into contraction
//! sequences of width at most twice the number of labels.
//!
//! Text form, prefix notation, parentheses optional:
//!
//! ```text
//! leaf <label> <name>      single vertex carrying <label>
//! un <e1> <e2>             disjoint union
//! rl <i> <j> <e>           relabel i to j
//! ep <i> <j> <e>           positive edges between labels i and j
//! en <i> <j> <e>           negative edges between labels i and j
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::BoundsError;
use crate::sequence::ContractionSequence;
use crate::trigraph::{EdgeKind, Side, SignedTrigraph, VertexId};

pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CwExpr {
    Leaf { label: Label, name: String },
    Union(Box<CwExpr>, Box<CwExpr>),
    Relabel { from: Label, to: Label, inner: Box<CwExpr> },
    Edges { i: Label, j: Label, kind: EdgeKind, inner: Box<CwExpr> },
}

impl CwExpr {
    pub fn leaf(label: Label, name: impl Into<String>) -> Self {
        CwExpr::Leaf {
            label,
            name: name.into(),
        }
    }

    pub fn union(a: CwExpr, b: CwExpr) -> Self {
        CwExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn relabel(from: Label, to: Label, inner: CwExpr) -> Self {
        CwExpr::Relabel {
            from,
            to,
            inner: Box::new(inner),
        }
    }

    pub fn edges(i: Label, j: Label, kind: EdgeKind, inner: CwExpr) -> Self {
        CwExpr::Edges {
            i,
            j,
            kind,
            inner: Box::new(inner),
        }
    }

    /// Leaf names in left-to-right order; vertex `i + 1` is the i-th leaf.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            CwExpr::Leaf { name, .. } => out.push(name),
            CwExpr::Union(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            CwExpr::Relabel { inner, .. } | CwExpr::Edges { inner, .. } => inner.collect_leaves(out),
        }
    }

    /// Largest label used anywhere.
    pub fn width(&self) -> Label {
        match self {
            CwExpr::Leaf { label, .. } => *label,
            CwExpr::Union(a, b) => a.width().max(b.width()),
            CwExpr::Relabel { from, to, inner } => (*from).max(*to).max(inner.width()),
            CwExpr::Edges { i, j, inner, .. } => (*i).max(*j).max(inner.width()),
        }
    }

    pub fn parse(text: &str) -> Result<CwExpr, BoundsError> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let mut depth = 0i64;
        for tok in spaced.split_whitespace() {
            match tok {
                "(" => depth += 1,
                ")" => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return Err(malformed("unbalanced `)`"));
            }
        }
        if depth != 0 {
            return Err(malformed("unbalanced `(`"));
        }
        let mut tokens = spaced.split_whitespace().filter(|t| *t != "(" && *t != ")").peekable();
        let expr = parse_node(&mut tokens)?;
        if let Some(extra) = tokens.next() {
            return Err(malformed(&format!("trailing token `{extra}`")));
        }
        let names = expr.leaves();
        let distinct: BTreeSet<&str> = names.iter().copied().collect();
        if distinct.len() != names.len() {
            return Err(malformed("leaf names are not unique"));
        }
        Ok(expr)
    }
}

fn malformed(m: &str) -> BoundsError {
    BoundsError::MalformedExpression(m.to_string())
}

fn parse_node<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<CwExpr, BoundsError> {
    let op = tokens.next().ok_or_else(|| malformed("unexpected end of expression"))?;
    let mut label = |what: &str| -> Result<Label, BoundsError> {
        let t = tokens.next().ok_or_else(|| malformed(&format!("missing {what}")))?;
        match t.parse::<Label>() {
            Ok(l) if l >= 1 => Ok(l),
            _ => Err(malformed(&format!("bad label `{t}`"))),
        }
    };
    match op {
        "leaf" => {
            let l = label("label")?;
            let name = tokens.next().ok_or_else(|| malformed("missing leaf name"))?;
            Ok(CwExpr::leaf(l, name))
        }
        "un" => {
            let a = parse_node(tokens)?;
            let b = parse_node(tokens)?;
            Ok(CwExpr::union(a, b))
        }
        "rl" | "ep" | "en" => {
            let i = label("first label")?;
            let j = label("second label")?;
            if i == j {
                return Err(malformed(&format!("`{op}` with equal labels {i}")));
            }
            let inner = parse_node(tokens)?;
            Ok(match op {
                "rl" => CwExpr::relabel(i, j, inner),
                "ep" => CwExpr::edges(i, j, EdgeKind::Pos, inner),
                _ => CwExpr::edges(i, j, EdgeKind::Neg, inner),
            })
        }
        other => Err(malformed(&format!("unknown operation `{other}`"))),
    }
}

impl fmt::Display for CwExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CwExpr::Leaf { label, name } => write!(f, "(leaf {label} {name})"),
            CwExpr::Union(a, b) => write!(f, "(un {a} {b})"),
            CwExpr::Relabel { from, to, inner } => write!(f, "(rl {from} {to} {inner})"),
            CwExpr::Edges { i, j, kind, inner } => {
                let op = if *kind == EdgeKind::Pos { "ep" } else { "en" };
                write!(f, "({op} {i} {j} {inner})")
            }
        }
    }
}

/// Per-subexpression state: the label of every vertex and one
/// representative (survivor id) per label.
struct Frontier {
    labels: BTreeMap<VertexId, Label>,
    reps: BTreeMap<Label, VertexId>,
}

struct Builder {
    graph: SignedTrigraph,
    steps: Vec<(VertexId, VertexId)>,
    next_leaf: VertexId,
}

impl Builder {
    fn visit(&mut self, expr: &CwExpr) -> Result<Frontier, BoundsError> {
        match expr {
            CwExpr::Leaf { label, .. } => {
                let v = self.next_leaf;
                self.next_leaf += 1;
                self.graph.add_vertex(v, Side::Plain);
                Ok(Frontier {
                    labels: BTreeMap::from([(v, *label)]),
                    reps: BTreeMap::from([(*label, v)]),
                })
            }
            CwExpr::Union(a, b) => {
                let mut left = self.visit(a)?;
                let right = self.visit(b)?;
                for (label, rep) in right.reps {
                    match left.reps.get(&label) {
                        Some(&keep) => self.steps.push((keep, rep)),
                        None => {
                            left.reps.insert(label, rep);
                        }
                    }
                }
                left.labels.extend(right.labels);
                Ok(left)
            }
            CwExpr::Relabel { from, to, inner } => {
                let mut fr = self.visit(inner)?;
                for l in fr.labels.values_mut() {
                    if *l == *from {
                        *l = *to;
                    }
                }
                if let Some(rep) = fr.reps.remove(from) {
                    match fr.reps.get(to) {
                        Some(&keep) => self.steps.push((keep, rep)),
                        None => {
                            fr.reps.insert(*to, rep);
                        }
                    }
                }
                Ok(fr)
            }
            CwExpr::Edges { i, j, kind, inner } => {
                let fr = self.visit(inner)?;
                let with = |l: Label| fr.labels.iter().filter(move |(_, &x)| x == l).map(|(&v, _)| v);
                for u in with(*i) {
                    for v in with(*j) {
                        match self.graph.edge(u, v) {
                            Some(k) if k != *kind => {
                                return Err(malformed(&format!(
                                    "vertices {u} and {v} receive edges of both signs"
                                )))
                            }
                            Some(_) => {}
                            None => self.graph.set_edge(u, v, *kind)?,
                        }
                    }
                }
                Ok(fr)
            }
        }
    }
}

/// Evaluates `expr` (leaves become vertices `1..=n` left to right) and
/// builds a full contraction sequence of the evaluation following the
/// expression bottom-up.
pub fn cw_to_sequence(expr: &CwExpr) -> Result<(SignedTrigraph, ContractionSequence), BoundsError> {
    let mut b = Builder {
        graph: SignedTrigraph::new(),
        steps: Vec::new(),
        next_leaf: 1,
    };
    let root = b.visit(expr)?;
    let mut reps = root.reps.into_values();
    if let Some(first) = reps.next() {
        for rep in reps {
            b.steps.push((first, rep));
        }
    }
    let n = b.graph.num_vertices();
    Ok((b.graph, ContractionSequence::new(n, b.steps)))
}

/// Random expression over labels `1..=k` with `leaves` leaves. Edge
/// insertions reuse the sign of any edge already present between the two
/// label classes, so the result always evaluates without conflicts.
pub fn random_expression(k: Label, leaves: usize, seed: u64) -> CwExpr {
    assert!(k >= 1 && leaves >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = 0;
    random_node(&mut rng, k, leaves, &mut counter).0
}

/// Returns the expression and its evaluation as (labels, signed edges).
fn random_node(
    rng: &mut ChaCha8Rng,
    k: Label,
    leaves: usize,
    counter: &mut usize,
) -> (CwExpr, BTreeMap<usize, Label>, BTreeMap<(usize, usize), EdgeKind>) {
    let (mut expr, mut labels, mut edges) = if leaves == 1 {
        *counter += 1;
        let label = rng.gen_range(1..=k);
        (
            CwExpr::leaf(label, format!("v{}", *counter)),
            BTreeMap::from([(*counter, label)]),
            BTreeMap::new(),
        )
    } else {
        let left = rng.gen_range(1..leaves);
        let (a, la, ea) = random_node(rng, k, left, counter);
        let (b, lb, eb) = random_node(rng, k, leaves - left, counter);
        let mut labels = la;
        labels.extend(lb);
        let mut edges = ea;
        edges.extend(eb);
        (CwExpr::union(a, b), labels, edges)
    };
    if k < 2 {
        return (expr, labels, edges);
    }
    for _ in 0..rng.gen_range(0..3) {
        let i = rng.gen_range(1..=k);
        let mut j = rng.gen_range(1..k);
        if j >= i {
            j += 1;
        }
        if rng.gen_bool(0.3) {
            for l in labels.values_mut() {
                if *l == i {
                    *l = j;
                }
            }
            expr = CwExpr::relabel(i, j, expr);
            continue;
        }
        let us: Vec<usize> = labels.iter().filter(|(_, &l)| l == i).map(|(&v, _)| v).collect();
        let vs: Vec<usize> = labels.iter().filter(|(_, &l)| l == j).map(|(&v, _)| v).collect();
        let key = |u: usize, v: usize| (u.min(v), u.max(v));
        let existing: BTreeSet<EdgeKind> = us
            .iter()
            .flat_map(|&u| vs.iter().map(move |&v| (u, v)))
            .filter_map(|(u, v)| edges.get(&key(u, v)).copied())
            .collect();
        // both signs already present between the classes: no insertion fits
        if existing.len() > 1 {
            continue;
        }
        let kind = existing
            .into_iter()
            .next()
            .unwrap_or(if rng.gen_bool(0.5) { EdgeKind::Pos } else { EdgeKind::Neg });
        for &u in &us {
            for &v in &vs {
                edges.insert(key(u, v), kind);
            }
        }
        expr = CwExpr::edges(i, j, kind, expr);
    }
    (expr, labels, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::verify;

    #[test]
    fn single_edge_expression() {
        let e = CwExpr::parse("ep 1 2 (un (leaf 1 a) (leaf 2 b))").unwrap();
        let (g, seq) = cw_to_sequence(&e).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edge(1, 2), Some(EdgeKind::Pos));
        assert_eq!(seq.steps, vec![(1, 2)]);
        assert_eq!(verify(&g, &seq, false).width, 0);
    }

    #[test]
    fn positive_path_on_four_vertices() {
        // labels: 1 finished, 2 current end, 3 new vertex
        let text = "ep 2 3 un (leaf 3 d) \
                    (rl 3 2 rl 2 1 ep 2 3 un (leaf 3 c) \
                    (rl 3 2 rl 2 1 ep 2 3 un (leaf 2 a) (leaf 3 b)))";
        let e = CwExpr::parse(text).unwrap();
        let (g, seq) = cw_to_sequence(&e).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.max_degree(), 2);
        let r = verify(&g, &seq, false);
        assert!(r.is_valid());
        assert_eq!(r.final_vertices, 1);
        assert!(r.width <= 2 * e.width() as usize);
    }

    #[test]
    fn display_round_trips() {
        let e = random_expression(3, 8, 11);
        assert_eq!(CwExpr::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn malformed_inputs() {
        assert!(CwExpr::parse("un (leaf 1 a)").is_err());
        assert!(CwExpr::parse("ep 1 1 (leaf 1 a)").is_err());
        assert!(CwExpr::parse("(leaf 1 a").is_err());
        assert!(CwExpr::parse("un (leaf 1 a) (leaf 2 a)").is_err());
        assert!(CwExpr::parse("leaf 0 a").is_err());
        assert!(CwExpr::parse("xx 1 2").is_err());
        let clash = CwExpr::parse("en 1 2 ep 1 2 un (leaf 1 a) (leaf 2 b)").unwrap();
        assert!(matches!(cw_to_sequence(&clash), Err(BoundsError::MalformedExpression(_))));
    }
}
