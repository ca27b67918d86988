//! Signed trigraphs: positive, negative and red edges over vertices that
//! carry a side tag and the bag of original vertices merged into them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::cnf::Formula;
use crate::error::{GraphError, ParseError};

pub type VertexId = u32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum EdgeKind {
    Pos,
    Neg,
    Red,
}

impl EdgeKind {
    pub fn symbol(self) -> char {
        match self {
            EdgeKind::Pos => '+',
            EdgeKind::Neg => '-',
            EdgeKind::Red => 'r',
        }
    }

    pub fn is_black(self) -> bool {
        self != EdgeKind::Red
    }
}

/// Side of a vertex. `Var`/`Cla` double as the two parts of any bipartite
/// graph; `Plain` means the vertex belongs to no part (or to both after a
/// cross-side contraction).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Side {
    Var,
    Cla,
    Plain,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Var => Side::Cla,
            Side::Cla => Side::Var,
            Side::Plain => Side::Plain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct VertexData {
    side: Side,
    bag: Vec<VertexId>,
    adj: BTreeMap<VertexId, EdgeKind>,
    red: BTreeSet<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTrigraph {
    vertices: BTreeMap<VertexId, VertexData>,
    next_id: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedDegreeReport {
    pub per_vertex: BTreeMap<VertexId, usize>,
    pub max_red_degree: usize,
}

/// Whether `contract` should reject merging vertices of different sides.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SidePolicy {
    Enforce,
    Ignore,
}

impl Default for SignedTrigraph {
    fn default() -> Self {
        Self::new()
    }
}

impl SignedTrigraph {
    pub fn new() -> Self {
        SignedTrigraph {
            vertices: BTreeMap::new(),
            next_id: 1,
        }
    }

    /// Graph on `1..=n` without edges, all vertices `Plain`.
    pub fn with_plain_vertices(n: usize) -> Self {
        let mut g = Self::new();
        for v in 1..=n as VertexId {
            g.add_vertex(v, Side::Plain);
        }
        g
    }

    pub fn add_vertex(&mut self, id: VertexId, side: Side) {
        self.vertices.insert(
            id,
            VertexData {
                side,
                bag: vec![id],
                adj: BTreeMap::new(),
                red: BTreeSet::new(),
            },
        );
        self.next_id = self.next_id.max(id + 1);
    }

    /// Sets (or replaces) the edge between `u` and `v`.
    pub fn set_edge(&mut self, u: VertexId, v: VertexId, kind: EdgeKind) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::Invalid(format!("self-loop at {u}")));
        }
        for x in [u, v] {
            if !self.vertices.contains_key(&x) {
                return Err(GraphError::UnknownVertex(x));
            }
        }
        self.remove_edge(u, v);
        self.link(u, v, kind);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Option<EdgeKind> {
        let kind = self.vertices.get_mut(&u)?.adj.remove(&v)?;
        let du = self.vertices.get_mut(&u).unwrap();
        du.red.remove(&v);
        let dv = self.vertices.get_mut(&v).unwrap();
        dv.adj.remove(&u);
        dv.red.remove(&u);
        Some(kind)
    }

    fn link(&mut self, u: VertexId, v: VertexId, kind: EdgeKind) {
        for (a, b) in [(u, v), (v, u)] {
            let d = self.vertices.get_mut(&a).unwrap();
            d.adj.insert(b, kind);
            if kind == EdgeKind::Red {
                d.red.insert(b);
            }
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertices_on(&self, side: Side) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .filter(move |(_, d)| d.side == side)
            .map(|(&v, _)| v)
    }

    pub fn side(&self, v: VertexId) -> Option<Side> {
        self.vertices.get(&v).map(|d| d.side)
    }

    pub fn set_side(&mut self, v: VertexId, side: Side) -> Result<(), GraphError> {
        self.vertices
            .get_mut(&v)
            .map(|d| d.side = side)
            .ok_or(GraphError::UnknownVertex(v))
    }

    /// True iff every vertex is tagged `Var` or `Cla`.
    pub fn sides_in_use(&self) -> bool {
        !self.vertices.is_empty() && self.vertices.values().all(|d| d.side != Side::Plain)
    }

    /// Original vertices merged into `v`, sorted.
    pub fn bag(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[&v].bag
    }

    pub fn edge(&self, u: VertexId, v: VertexId) -> Option<EdgeKind> {
        self.vertices.get(&u)?.adj.get(&v).copied()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeKind)> + '_ {
        self.vertices[&v].adj.iter().map(|(&x, &k)| (x, k))
    }

    pub fn red_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices[&v].red.iter().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertices[&v].adj.len()
    }

    pub fn red_degree(&self, v: VertexId) -> usize {
        self.vertices[&v].red.len()
    }

    pub fn max_red_degree(&self) -> usize {
        self.vertices.values().map(|d| d.red.len()).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.vertices.values().map(|d| d.adj.len()).max().unwrap_or(0)
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.values().map(|d| d.adj.len()).sum::<usize>() / 2
    }

    pub fn num_red_edges(&self) -> usize {
        self.vertices.values().map(|d| d.red.len()).sum::<usize>() / 2
    }

    /// All edges `(u, v, kind)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, EdgeKind)> {
        let mut out = Vec::new();
        for (&u, d) in &self.vertices {
            for (&v, &k) in d.adj.range(u + 1..) {
                out.push((u, v, k));
            }
        }
        out
    }

    pub fn red_degrees(&self) -> RedDegreeReport {
        let per_vertex: BTreeMap<_, _> = self
            .vertices
            .iter()
            .map(|(&v, d)| (v, d.red.len()))
            .collect();
        let max_red_degree = per_vertex.values().copied().max().unwrap_or(0);
        RedDegreeReport {
            per_vertex,
            max_red_degree,
        }
    }

    /// Id the next contraction will assign to its merged vertex.
    pub fn next_id(&self) -> VertexId {
        self.next_id
    }

    /// Contracts `u` and `v` into a fresh vertex, returning the new trigraph
    /// and the fresh id. Sides are enforced.
    pub fn contract(&self, u: VertexId, v: VertexId) -> Result<(SignedTrigraph, VertexId), GraphError> {
        let mut g = self.clone();
        let w = g.contract_in_place(u, v, SidePolicy::Enforce)?;
        Ok((g, w))
    }

    /// Edge kind `w` would get towards `x` if `u` and `v` were contracted.
    pub fn merged_kind(&self, u: VertexId, v: VertexId, x: VertexId) -> Option<EdgeKind> {
        merge_kinds(self.edge(u, x), self.edge(v, x))
    }

    pub fn contract_in_place(
        &mut self,
        u: VertexId,
        v: VertexId,
        policy: SidePolicy,
    ) -> Result<VertexId, GraphError> {
        if u == v {
            return Err(GraphError::SelfContraction(u));
        }
        let su = self.side(u).ok_or(GraphError::UnknownVertex(u))?;
        let sv = self.side(v).ok_or(GraphError::UnknownVertex(v))?;
        if policy == SidePolicy::Enforce && su != Side::Plain && sv != Side::Plain && su != sv {
            return Err(GraphError::CrossSide(u, v));
        }
        let du = self.vertices.remove(&u).unwrap();
        let dv = self.vertices.remove(&v).unwrap();
        let w = self.next_id;
        self.next_id += 1;

        let mut others: BTreeSet<VertexId> = du.adj.keys().chain(dv.adj.keys()).copied().collect();
        others.remove(&u);
        others.remove(&v);
        for &x in &others {
            let dx = self.vertices.get_mut(&x).unwrap();
            dx.adj.remove(&u);
            dx.adj.remove(&v);
            dx.red.remove(&u);
            dx.red.remove(&v);
        }
        let mut bag = du.bag;
        bag.extend(dv.bag);
        bag.sort_unstable();
        let side = if su == sv { su } else { Side::Plain };
        self.vertices.insert(
            w,
            VertexData {
                side,
                bag,
                adj: BTreeMap::new(),
                red: BTreeSet::new(),
            },
        );
        for x in others {
            let kind = merge_kinds(du.adj.get(&x).copied(), dv.adj.get(&x).copied())
                .expect("x is a neighbor of u or v");
            self.link(w, x, kind);
        }
        Ok(w)
    }

    /// Quotient trigraph of `self` under a partition of its vertices.
    ///
    /// Singleton bags keep their vertex id; larger bags get fresh ids in
    /// the order they are listed.
    pub fn partition_view(&self, partition: &[Vec<VertexId>]) -> Result<SignedTrigraph, GraphError> {
        let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (i, part) in partition.iter().enumerate() {
            if part.is_empty() {
                return Err(GraphError::NotAPartition("empty bag".into()));
            }
            for &v in part {
                if !self.contains(v) {
                    return Err(GraphError::UnknownVertex(v));
                }
                if owner.insert(v, i).is_some() {
                    return Err(GraphError::NotAPartition(format!("vertex {v} in two bags")));
                }
            }
        }
        if owner.len() != self.num_vertices() {
            return Err(GraphError::NotAPartition("some vertex is in no bag".into()));
        }

        let mut next = self.next_id;
        let mut ids = Vec::with_capacity(partition.len());
        let mut q = SignedTrigraph::new();
        for part in partition {
            let id = if part.len() == 1 {
                part[0]
            } else {
                next += 1;
                next - 1
            };
            let first = self.side(part[0]).unwrap();
            let side = if part.iter().all(|&v| self.side(v) == Some(first)) {
                first
            } else {
                Side::Plain
            };
            let mut bag: Vec<VertexId> = part.iter().flat_map(|&v| self.bag(v).iter().copied()).collect();
            bag.sort_unstable();
            q.vertices.insert(
                id,
                VertexData {
                    side,
                    bag,
                    adj: BTreeMap::new(),
                    red: BTreeSet::new(),
                },
            );
            ids.push(id);
        }
        q.next_id = next.max(q.vertices.keys().next_back().map_or(1, |m| m + 1));

        for i in 0..partition.len() {
            for j in i + 1..partition.len() {
                let mut kinds = BTreeSet::new();
                for &x in &partition[i] {
                    for &y in &partition[j] {
                        kinds.insert(self.edge(x, y));
                    }
                }
                let kind = if kinds.len() == 1 {
                    kinds.into_iter().next().unwrap()
                } else {
                    Some(EdgeKind::Red)
                };
                if let Some(kind) = kind {
                    q.link(ids[i], ids[j], kind);
                }
            }
        }
        Ok(q)
    }

    /// Current bags, sorted, as a canonical partition of the original vertices.
    pub fn bag_partition(&self) -> Vec<Vec<VertexId>> {
        let mut bags: Vec<Vec<VertexId>> = self.vertices.values().map(|d| d.bag.clone()).collect();
        bags.sort();
        bags
    }

    /// Id-independent description: edges between bags.
    pub fn canonical_form(&self) -> BTreeSet<(Vec<VertexId>, Vec<VertexId>, EdgeKind)> {
        let mut out = BTreeSet::new();
        for (u, v, k) in self.edges() {
            let (a, b) = (self.bag(u).to_vec(), self.bag(v).to_vec());
            if a < b {
                out.insert((a, b, k));
            } else {
                out.insert((b, a, k));
            }
        }
        out
    }

    /// Copy of the graph with every black edge made positive.
    pub fn unsigned(&self) -> SignedTrigraph {
        let mut g = self.clone();
        for d in g.vertices.values_mut() {
            for k in d.adj.values_mut() {
                if *k == EdgeKind::Neg {
                    *k = EdgeKind::Pos;
                }
            }
        }
        g
    }

    /// Assigns `Var`/`Cla` sides by 2-colouring each connected component,
    /// starting every component at its smallest vertex with `Var`.
    pub fn with_bipartition(&self) -> Result<SignedTrigraph, GraphError> {
        let mut color: BTreeMap<VertexId, Side> = BTreeMap::new();
        for start in self.vertices() {
            if color.contains_key(&start) {
                continue;
            }
            color.insert(start, Side::Var);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = color[&u];
                for (x, _) in self.neighbors(u) {
                    match color.get(&x) {
                        Some(&cx) if cx == cu => return Err(GraphError::NotBipartite),
                        Some(_) => {}
                        None => {
                            color.insert(x, cu.other());
                            queue.push_back(x);
                        }
                    }
                }
            }
        }
        let mut g = self.clone();
        for (v, side) in color {
            g.vertices.get_mut(&v).unwrap().side = side;
        }
        Ok(g)
    }

    /// Checks that sides are in use and no edge joins two vertices of the
    /// same side.
    pub fn check_bipartite_sides(&self) -> Result<(), GraphError> {
        if !self.sides_in_use() && self.num_vertices() > 0 {
            return Err(GraphError::Invalid("vertex without a side".into()));
        }
        for (u, v, _) in self.edges() {
            if self.side(u) == self.side(v) {
                return Err(GraphError::NotBipartite);
            }
        }
        Ok(())
    }

    /// Edge list: `p graph <n> <m>`, side lines `s <v> var|cla`, then `u v +|-|r`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p graph {} {}", self.num_vertices(), self.num_edges());
        for (&v, d) in &self.vertices {
            match d.side {
                Side::Var => {
                    let _ = writeln!(out, "s {v} var");
                }
                Side::Cla => {
                    let _ = writeln!(out, "s {v} cla");
                }
                Side::Plain => {}
            }
        }
        for (u, v, k) in self.edges() {
            let _ = writeln!(out, "{u} {v} {}", k.symbol());
        }
        out
    }

    /// Reads the edge-list format written by [`SignedTrigraph::to_edge_list`].
    /// Vertices are `1..=n` from the header; edges default to `+` when the
    /// kind column is missing.
    pub fn parse_edge_list(text: &str) -> Result<SignedTrigraph, ParseError> {
        let mut g: Option<SignedTrigraph> = None;
        for (index, line) in text.lines().enumerate() {
            let lineno = index + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields[0] == "c" || fields[0].starts_with('#') {
                continue;
            }
            if fields[0] == "p" {
                if g.is_some() {
                    return Err(ParseError::new(lineno, "duplicate header"));
                }
                if fields.len() < 3 || fields[1] != "graph" {
                    return Err(ParseError::new(lineno, "expected `p graph <n> [<m>]`"));
                }
                let n: usize = fields[2]
                    .parse()
                    .map_err(|_| ParseError::new(lineno, "bad vertex count"))?;
                g = Some(SignedTrigraph::with_plain_vertices(n));
                continue;
            }
            let graph = g
                .as_mut()
                .ok_or_else(|| ParseError::new(lineno, "edge before `p graph` header"))?;
            let parse_id = |s: &str| -> Result<VertexId, ParseError> {
                let v: VertexId = s
                    .parse()
                    .map_err(|_| ParseError::new(lineno, format!("bad vertex id `{s}`")))?;
                if !graph.contains(v) {
                    return Err(ParseError::new(lineno, format!("vertex {v} out of range")));
                }
                Ok(v)
            };
            if fields[0] == "s" {
                if fields.len() != 3 {
                    return Err(ParseError::new(lineno, "expected `s <v> var|cla`"));
                }
                let v = parse_id(fields[1])?;
                let side = match fields[2] {
                    "var" => Side::Var,
                    "cla" => Side::Cla,
                    other => return Err(ParseError::new(lineno, format!("unknown side `{other}`"))),
                };
                graph.set_side(v, side).unwrap();
                continue;
            }
            if fields.len() < 2 || fields.len() > 3 {
                return Err(ParseError::new(lineno, "expected `u v [+|-|r]`"));
            }
            let u = parse_id(fields[0])?;
            let v = parse_id(fields[1])?;
            let kind = match fields.get(2).copied().unwrap_or("+") {
                "+" => EdgeKind::Pos,
                "-" => EdgeKind::Neg,
                "r" => EdgeKind::Red,
                other => return Err(ParseError::new(lineno, format!("unknown edge kind `{other}`"))),
            };
            graph
                .set_edge(u, v, kind)
                .map_err(|e| ParseError::new(lineno, e.to_string()))?;
        }
        g.ok_or_else(|| ParseError::new(1, "missing `p graph` header"))
    }
}

fn merge_kinds(a: Option<EdgeKind>, b: Option<EdgeKind>) -> Option<EdgeKind> {
    match (a, b) {
        (None, None) => None,
        (Some(EdgeKind::Pos), Some(EdgeKind::Pos)) => Some(EdgeKind::Pos),
        (Some(EdgeKind::Neg), Some(EdgeKind::Neg)) => Some(EdgeKind::Neg),
        _ => Some(EdgeKind::Red),
    }
}

/// Signed incidence graph: variables `1..=n_v` (side `Var`), then one
/// vertex per clause in clause order (side `Cla`).
pub fn incidence_graph(formula: &Formula) -> SignedTrigraph {
    let nv = formula.num_vars() as VertexId;
    let mut g = SignedTrigraph::new();
    for v in 1..=nv {
        g.add_vertex(v, Side::Var);
    }
    for (i, clause) in formula.clauses().iter().enumerate() {
        let c = nv + 1 + i as VertexId;
        g.add_vertex(c, Side::Cla);
        for lit in clause.lits() {
            let kind = if lit.is_positive() { EdgeKind::Pos } else { EdgeKind::Neg };
            g.link(lit.var(), c, kind);
        }
    }
    g
}
