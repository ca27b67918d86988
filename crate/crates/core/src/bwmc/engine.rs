use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::profile::{clause_indices, red_connected_containing, Entries, ProfileKey, Record};
use crate::cnf::{Formula, Lit, WeightFunction, Weight};
use crate::error::{BwmcError, SequenceError};
use crate::sequence::{check_maximal_bipartite, verify, ContractionSequence, Replay, ReplayStep};
use crate::trigraph::{incidence_graph, EdgeKind, Side, SidePolicy, SignedTrigraph, VertexId};

/// Largest region the bitmask representation supports.
pub const MAX_REGION: usize = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelStats {
    pub level: usize,
    pub regions: usize,
    pub profiles: usize,
    pub large_case_regions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BwmcOutcome {
    pub value: Weight,
    /// Width of the sequence restricted to variables that occur in clauses.
    pub width: usize,
    /// Region size bound `k(d² + 1)` used by the run (0 when no DP ran).
    pub t: usize,
    pub levels: Vec<LevelStats>,
}

/// Formula-specific data shared by all levels.
struct Ctx<'a> {
    formula: &'a Formula,
    weights: &'a WeightFunction,
    k: usize,
    t: usize,
}

impl Ctx<'_> {
    fn zero_weight(&self, g: &SignedTrigraph, v: VertexId) -> Weight {
        g.bag(v).iter().map(|&x| self.weights.of(Lit::neg(x)).clone()).product()
    }

    /// Does every clause merged into `c` contain a negative literal of a
    /// variable merged into one of `zeros`?
    fn satisfied_by_zeros(&self, g: &SignedTrigraph, c: VertexId, zeros: &[VertexId]) -> bool {
        clause_indices(g, self.formula, c).into_iter().all(|i| {
            let clause = &self.formula.clauses()[i];
            zeros
                .iter()
                .flat_map(|&r| g.bag(r).iter())
                .any(|&x| clause.polarity(x) == Some(false))
        })
    }
}

/// A vertex set of one level with fixed bit positions.
struct Region {
    verts: Vec<VertexId>,
    pos: HashMap<VertexId, usize>,
}

impl Region {
    fn new(mut verts: Vec<VertexId>) -> Result<Region, BwmcError> {
        verts.sort_unstable();
        if verts.len() > MAX_REGION {
            return Err(BwmcError::RegionTooLarge(verts.len()));
        }
        let pos = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Ok(Region { verts, pos })
    }

    fn bit(&self, v: VertexId) -> u64 {
        1 << self.pos[&v]
    }

    fn mask_of(&self, vs: impl IntoIterator<Item = VertexId>) -> u64 {
        vs.into_iter().fold(0, |m, v| m | self.bit(v))
    }
}

/// One record entry translated to the bit positions of an enclosing region.
struct Entry<'r> {
    p: u64,
    m: u64,
    l: usize,
    q: u64,
    w: &'r Weight,
}

fn translate<'r>(sub: &[VertexId], entries: &'r Entries, region: &Region) -> Vec<Entry<'r>> {
    let map: Vec<u64> = sub.iter().map(|&v| region.bit(v)).collect();
    let remap = |mask: u64| -> u64 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            out |= map[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        out
    };
    let mut out: Vec<Entry> = entries
        .iter()
        .map(|(key, w)| Entry {
            p: remap(key.p),
            m: remap(key.m),
            l: key.l as usize,
            q: remap(key.q),
            w,
        })
        .collect();
    out.sort_by_key(|e| e.l);
    out
}

/// Red components of `verts` inside `g`.
fn red_components(g: &SignedTrigraph, verts: &[VertexId]) -> Vec<Vec<VertexId>> {
    let inside: std::collections::BTreeSet<VertexId> = verts.iter().copied().collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut comps = Vec::new();
    for &s in verts {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for x in g.red_neighbors(u) {
                if inside.contains(&x) && seen.insert(x) {
                    comp.push(x);
                    stack.push(x);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Black-edge satisfaction data of one clause vertex of a region: var
/// positions with a positive / negative black edge to it.
struct BlackMasks {
    clause_bit: u64,
    pos: u64,
    neg: u64,
}

fn black_masks(g: &SignedTrigraph, region: &Region, clause: VertexId, exclude: u64) -> BlackMasks {
    let (mut pos, mut neg) = (0, 0);
    for (x, kind) in g.neighbors(clause) {
        let Some(&i) = region.pos.get(&x) else { continue };
        let b = 1u64 << i;
        if b & exclude != 0 {
            continue;
        }
        match kind {
            EdgeKind::Pos => pos |= b,
            EdgeKind::Neg => neg |= b,
            EdgeKind::Red => {}
        }
    }
    BlackMasks {
        clause_bit: region.bit(clause),
        pos,
        neg,
    }
}

impl BlackMasks {
    fn satisfied(&self, p: u64, m: u64) -> bool {
        self.pos & p != 0 || self.neg & !(p & !m) != 0
    }
}

/// Calls `f(p, m, l, q, weight)` for each tuple of entries, one per list,
/// with combined ones count at most `k`.
fn for_each_tuple(
    lists: &[Vec<Entry>],
    k: usize,
    f: &mut dyn FnMut(u64, u64, usize, u64, &Weight) -> Result<(), BwmcError>,
) -> Result<(), BwmcError> {
    fn rec(
        lists: &[Vec<Entry>],
        j: usize,
        acc: (u64, u64, usize, u64),
        w: &Weight,
        k: usize,
        f: &mut dyn FnMut(u64, u64, usize, u64, &Weight) -> Result<(), BwmcError>,
    ) -> Result<(), BwmcError> {
        if j == lists.len() {
            return f(acc.0, acc.1, acc.2, acc.3, w);
        }
        for e in &lists[j] {
            if acc.2 + e.l > k {
                break;
            }
            let nw = w * e.w;
            rec(lists, j + 1, (acc.0 | e.p, acc.1 | e.m, acc.2 + e.l, acc.3 | e.q), &nw, k, f)?;
        }
        Ok(())
    }
    rec(lists, 0, (0, 0, 0, 0), &Weight::one(), k, f)
}

/// Bit positions of `verts` that lie in a component other than the
/// clause's, for every clause vertex of the union of `comps`.
fn cross_black_masks(g: &SignedTrigraph, region: &Region, comps: &[Vec<VertexId>]) -> Vec<BlackMasks> {
    let mut out = Vec::new();
    for comp in comps {
        let own = region.mask_of(comp.iter().copied());
        for &c in comp {
            if g.side(c) == Some(Side::Cla) {
                out.push(black_masks(g, region, c, own));
            }
        }
    }
    out
}

/// Maps a profile over `U = T ∖ {z} ∪ {x, y}` (level i+1) to `T` (level i).
struct Contraction {
    /// bit in `T` for every bit position of `U`, 0 for x and y
    map: Vec<u64>,
    x_bit: u64,
    y_bit: u64,
    z_bit: u64,
    vars: bool,
}

impl Contraction {
    fn new(u: &Region, t: &Region, step: &ReplayStep, vars: bool) -> Contraction {
        let map = u
            .verts
            .iter()
            .map(|&v| if v == step.x || v == step.y { 0 } else { t.bit(v) })
            .collect();
        Contraction {
            map,
            x_bit: u.bit(step.x),
            y_bit: u.bit(step.y),
            z_bit: t.bit(step.z),
            vars,
        }
    }

    fn remap(&self, mask: u64) -> u64 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            out |= self.map[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        out
    }

    fn apply(&self, p: u64, m: u64, l: usize, q: u64) -> ProfileKey {
        let (mut tp, mut tm, mut tq) = (self.remap(p), self.remap(m), self.remap(q));
        if self.vars {
            let has_one = p & (self.x_bit | self.y_bit) != 0;
            let all_one = |b: u64| p & b != 0 && m & b == 0;
            let has_zero = !all_one(self.x_bit) || !all_one(self.y_bit);
            if has_one {
                tp |= self.z_bit;
                if has_zero {
                    tm |= self.z_bit;
                }
            }
        } else if q & self.x_bit != 0 && q & self.y_bit != 0 {
            tq |= self.z_bit;
        }
        ProfileKey {
            p: tp,
            m: tm,
            l: l as u32,
            q: tq,
        }
    }
}

fn add_to(map: &mut Entries, key: ProfileKey, w: Weight) {
    map.entry(key).and_modify(|acc| *acc += &w).or_insert(w);
}

/// Computes the entries of region `t` (containing `step.z`) at level i from
/// the record of level i+1. Returns the entries and whether the large case
/// was used.
fn region_entries(
    ctx: &Ctx,
    prev: &SignedTrigraph,
    cur_record: &Record,
    step: &ReplayStep,
    t_verts: &[VertexId],
) -> Result<(Entries, bool), BwmcError> {
    let t = Region::new(t_verts.to_vec())?;
    let mut u_verts: Vec<VertexId> = t_verts.iter().copied().filter(|&v| v != step.z).collect();
    u_verts.extend([step.x, step.y]);
    let u = Region::new(u_verts)?;
    let vars = prev.side(step.x) == Some(Side::Var);
    let contraction = Contraction::new(&u, &t, step, vars);
    let comps = red_components(prev, &u.verts);
    let mut out = Entries::new();

    if comps.iter().all(|c| c.len() <= ctx.t) {
        let lists: Vec<Vec<Entry>> = comps
            .iter()
            .map(|c| lookup(cur_record, c).map(|e| translate(c, e, &u)))
            .collect::<Result<_, _>>()?;
        let cross = cross_black_masks(prev, &u, &comps);
        for_each_tuple(&lists, ctx.k, &mut |p, m, l, q, w| {
            let mut q = q;
            for bm in &cross {
                if bm.satisfied(p, m) {
                    q |= bm.clause_bit;
                }
            }
            add_to(&mut out, contraction.apply(p, m, l, q), w.clone());
            Ok(())
        })?;
        return Ok((out, false));
    }

    if comps.len() != 1 || t_verts.len() != ctx.t {
        return Err(BwmcError::Internal(format!(
            "region of {} vertices splits into components of sizes {:?}",
            t_verts.len(),
            comps.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    large_case(ctx, prev, cur_record, &u, &contraction, &mut out)?;
    Ok((out, true))
}

fn lookup<'r>(record: &'r Record, comp: &[VertexId]) -> Result<&'r Entries, BwmcError> {
    record
        .regions
        .get(comp)
        .ok_or_else(|| BwmcError::Internal(format!("no record for red-connected set {comp:?}")))
}

/// Red adjacency of a region as bitmasks.
fn red_adjacency(g: &SignedTrigraph, region: &Region) -> Vec<u64> {
    region
        .verts
        .iter()
        .map(|&v| {
            g.red_neighbors(v)
                .filter_map(|x| region.pos.get(&x))
                .fold(0, |m, &i| m | 1 << i)
        })
        .collect()
}

/// Position of the vertex farthest (over red edges inside the region) from
/// `p`, ties by smallest id, smallest id when `p` is empty; with its distance.
fn farthest_from(adj: &[u64], p: u64) -> (usize, usize) {
    if p == 0 {
        return (0, usize::MAX);
    }
    let full: u64 = if adj.len() == 64 { u64::MAX } else { (1 << adj.len()) - 1 };
    let mut seen = p;
    let mut frontier = p;
    let mut dist = 0;
    let mut last = p;
    while seen != full {
        let mut next = 0;
        let mut f = frontier;
        while f != 0 {
            next |= adj[f.trailing_zeros() as usize];
            f &= f - 1;
        }
        next &= !seen;
        if next == 0 {
            break;
        }
        seen |= next;
        frontier = next;
        last = next;
        dist += 1;
    }
    (last.trailing_zeros() as usize, dist)
}

/// Region `u` has `t + 1` vertices and is red-connected. Every assignment
/// is attributed to the vertex `v` farthest from its ones; `v` is all-zero
/// (or a clause vertex) and the rest of `u` splits into records of level
/// i+1.
fn large_case(
    ctx: &Ctx,
    prev: &SignedTrigraph,
    record: &Record,
    u: &Region,
    contraction: &Contraction,
    out: &mut Entries,
) -> Result<(), BwmcError> {
    let adj = red_adjacency(prev, u);
    let mut choice_cache: HashMap<u64, (usize, usize)> = HashMap::new();
    for (vi, &v) in u.verts.iter().enumerate() {
        let v_bit = 1u64 << vi;
        let rest: Vec<VertexId> = u.verts.iter().copied().filter(|&x| x != v).collect();
        let comps = red_components(prev, &rest);
        let lists: Vec<Vec<Entry>> = comps
            .iter()
            .map(|c| lookup(record, c).map(|e| translate(c, e, u)))
            .collect::<Result<_, _>>()?;
        let cross = cross_black_masks(prev, u, &comps);
        let red_of = |c: VertexId, without: Option<VertexId>| -> Vec<VertexId> {
            prev.red_neighbors(c)
                .filter(|x| u.pos.contains_key(x) && Some(*x) != without)
                .collect()
        };

        if prev.side(v) == Some(Side::Var) {
            let zero = ctx.zero_weight(prev, v);
            // clause vertices red-adjacent to v are evaluated explicitly
            let mut explicit = Vec::new();
            let mut neg_from_v = 0u64;
            for (c, kind) in prev.neighbors(v) {
                if !u.pos.contains_key(&c) {
                    continue;
                }
                match kind {
                    EdgeKind::Red => {
                        let reds = red_of(c, None);
                        let reds_without_v = red_of(c, Some(v));
                        explicit.push((
                            u.bit(c),
                            black_masks(prev, u, c, 0),
                            ctx.satisfied_by_zeros(prev, c, &reds),
                            ctx.satisfied_by_zeros(prev, c, &reds_without_v),
                            u.mask_of(reds_without_v),
                        ));
                    }
                    EdgeKind::Neg => neg_from_v |= u.bit(c),
                    EdgeKind::Pos => {}
                }
            }
            for_each_tuple(&lists, ctx.k, &mut |p, m, l, q, w| {
                let (chosen, dist) = *choice_cache.entry(p).or_insert_with(|| farthest_from(&adj, p));
                if chosen != vi {
                    return Ok(());
                }
                if dist < 3 {
                    return Err(BwmcError::Internal(format!("removed vertex at red distance {dist} from the ones")));
                }
                let mut q_rest = q;
                for bm in &cross {
                    if bm.satisfied(p, m) {
                        q_rest |= bm.clause_bit;
                    }
                }
                let mut q_full = q_rest | neg_from_v;
                for (bit, bm, with_v, without_v, red_mask) in &explicit {
                    if red_mask & p != 0 {
                        return Err(BwmcError::Internal("red neighbour of an explicit clause has ones".into()));
                    }
                    let black = bm.satisfied(p, m);
                    if (q_rest & bit != 0) != (black || *without_v) {
                        return Err(BwmcError::Internal("explicit clause evaluation disagrees with record".into()));
                    }
                    if black || *with_v {
                        q_full |= bit;
                    } else {
                        q_full &= !bit;
                    }
                }
                let weight = w * &zero;
                add_to(out, contraction.apply(p, m, l, q_full), weight);
                Ok(())
            })?;
        } else {
            let bm = black_masks(prev, u, v, 0);
            let reds = red_of(v, None);
            let red_mask = u.mask_of(reds.iter().copied());
            let by_zeros = ctx.satisfied_by_zeros(prev, v, &reds);
            for_each_tuple(&lists, ctx.k, &mut |p, m, l, q, w| {
                let (chosen, dist) = *choice_cache.entry(p).or_insert_with(|| farthest_from(&adj, p));
                if chosen != vi {
                    return Ok(());
                }
                if dist < 3 {
                    return Err(BwmcError::Internal(format!("removed vertex at red distance {dist} from the ones")));
                }
                if red_mask & p != 0 {
                    return Err(BwmcError::Internal("red neighbour of the removed clause has ones".into()));
                }
                let mut q = q;
                for c in &cross {
                    if c.satisfied(p, m) {
                        q |= c.clause_bit;
                    }
                }
                if bm.satisfied(p, m) || by_zeros {
                    q |= v_bit;
                }
                add_to(out, contraction.apply(p, m, l, q), w.clone());
                Ok(())
            })?;
        }
    }
    Ok(())
}

fn base_record_of(ctx: &Ctx, g: &SignedTrigraph) -> Record {
    let mut record = Record {
        level: g.num_vertices(),
        regions: BTreeMap::new(),
    };
    for v in g.vertices() {
        let mut entries = Entries::new();
        let empty = ProfileKey { p: 0, m: 0, l: 0, q: 0 };
        if g.side(v) == Some(Side::Var) {
            if ctx.k >= 1 {
                let w: Weight = g.bag(v).iter().map(|&x| ctx.weights.of(Lit::pos(x)).clone()).product();
                if g.bag(v).len() <= ctx.k {
                    entries.insert(ProfileKey { p: 1, m: 0, l: g.bag(v).len() as u32, q: 0 }, w);
                }
            }
            entries.insert(empty, ctx.zero_weight(g, v));
        } else {
            entries.insert(empty, Weight::one());
        }
        record.regions.insert(vec![v], entries);
    }
    record
}

/// Record of the signed incidence graph of `formula` with budget `k`.
pub fn base_record(formula: &Formula, weights: &WeightFunction, k: usize) -> Record {
    let ctx = Ctx {
        formula,
        weights,
        k,
        t: 0,
    };
    base_record_of(&ctx, &incidence_graph(formula))
}

fn transition(
    ctx: &Ctx,
    record: &mut Record,
    prev: &SignedTrigraph,
    cur: &SignedTrigraph,
    step: &ReplayStep,
) -> Result<LevelStats, BwmcError> {
    if prev.side(step.x) != prev.side(step.y) || prev.side(step.x) == Some(Side::Plain) {
        return Err(BwmcError::InconsistentStep {
            step: step.index,
            reason: "contracted vertices lie on different sides".into(),
        });
    }
    let regions = red_connected_containing(cur, step.z, ctx.t);
    let computed: Vec<(Vec<VertexId>, Entries, bool)> = regions
        .into_par_iter()
        .map(|t| region_entries(ctx, prev, record, step, &t).map(|(e, large)| (t, e, large)))
        .collect::<Result<_, _>>()?;
    record
        .regions
        .retain(|t, _| !t.contains(&step.x) && !t.contains(&step.y));
    let large_case_regions = computed.iter().filter(|c| c.2).count();
    for (t, entries, _) in computed {
        record.regions.insert(t, entries);
    }
    record.level = cur.num_vertices();
    Ok(LevelStats {
        level: record.level,
        regions: record.regions.len(),
        profiles: record.num_profiles(),
        large_case_regions,
    })
}

/// Weights of satisfying assignments of the used variables, by ones count.
fn finalize(ctx: &Ctx, record: &Record, g: &SignedTrigraph) -> Result<Vec<Weight>, BwmcError> {
    check_maximal_bipartite(g)?;
    let a = g.vertices_on(Side::Var).next();
    let c = g.vertices_on(Side::Cla).next();
    let (Some(a), Some(c)) = (a, c) else {
        return Err(BwmcError::Internal("final graph lacks a side".into()));
    };
    let region = Region::new(vec![a, c])?;
    let comps = red_components(g, &region.verts);
    let lists: Vec<Vec<Entry>> = comps
        .iter()
        .map(|comp| lookup(record, comp).map(|e| translate(comp, e, &region)))
        .collect::<Result<_, _>>()?;
    let cross = cross_black_masks(g, &region, &comps);
    let c_bit = region.bit(c);
    let mut by_ones = vec![Weight::zero(); ctx.k + 1];
    for_each_tuple(&lists, ctx.k, &mut |p, m, l, q, w| {
        let mut q = q;
        for bm in &cross {
            if bm.satisfied(p, m) {
                q |= bm.clause_bit;
            }
        }
        if q & c_bit != 0 {
            by_ones[l] += w;
        }
        Ok(())
    })?;
    Ok(by_ones)
}

/// Weights of all assignments of `vars` by ones count, truncated at `k`.
fn free_polynomial(weights: &WeightFunction, vars: impl Iterator<Item = u32>, k: usize) -> Vec<Weight> {
    let mut poly = vec![Weight::one()];
    for v in vars {
        let mut next = vec![Weight::zero(); (poly.len() + 1).min(k + 1)];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c * weights.negative(v);
            if j < k {
                next[j + 1] += c * weights.positive(v);
            }
        }
        poly = next;
    }
    poly
}

/// Restricts a survivor-id sequence of the full incidence graph to the
/// vertices in `keep`.
fn project_sequence(
    full: &SignedTrigraph,
    keep: &SignedTrigraph,
    seq: &ContractionSequence,
) -> ContractionSequence {
    let mut rep: BTreeMap<VertexId, Option<VertexId>> = full
        .vertices()
        .map(|v| (v, keep.contains(v).then_some(v)))
        .collect();
    let mut steps = Vec::new();
    for &(a, b) in &seq.steps {
        let ra = rep[&a];
        let rb = rep.remove(&b).flatten();
        let merged = match (ra, rb) {
            (Some(x), Some(y)) => {
                steps.push((x, y));
                Some(x)
            }
            (x, y) => x.or(y),
        };
        rep.insert(a, merged);
    }
    ContractionSequence::new(keep.num_vertices(), steps)
}

/// Σ of w(π) over models π of `formula` with at most `k` ones, computed
/// along the bipartite contraction sequence `seq` of its incidence graph.
pub fn solve_bwmc(
    formula: &Formula,
    weights: &WeightFunction,
    k: i64,
    seq: &ContractionSequence,
) -> Result<Weight, BwmcError> {
    solve_bwmc_traced(formula, weights, k, seq, |_, _| {}).map(|o| o.value)
}

/// As [`solve_bwmc`], calling `on_level(graph, record)` for the base record
/// and after every transition.
pub fn solve_bwmc_traced(
    formula: &Formula,
    weights: &WeightFunction,
    k: i64,
    seq: &ContractionSequence,
    on_level: impl FnMut(&SignedTrigraph, &Record),
) -> Result<BwmcOutcome, BwmcError> {
    solve_bwmc_with(formula, weights, k, seq, None, on_level)
}

/// As [`solve_bwmc_traced`] with the region size bound `t` overridden.
/// A bound below `k(d² + 1)` either still gives the exact answer or fails
/// with [`BwmcError::Internal`] when an assignment has no removable vertex
/// far enough from its ones.
pub fn solve_bwmc_with(
    formula: &Formula,
    weights: &WeightFunction,
    k: i64,
    seq: &ContractionSequence,
    region_bound: Option<usize>,
    mut on_level: impl FnMut(&SignedTrigraph, &Record),
) -> Result<BwmcOutcome, BwmcError> {
    if k < 0 {
        return Err(BwmcError::NegativeBudget(k));
    }
    let full = incidence_graph(formula);
    let report = verify(&full, seq, true);
    if let Some((step, reason)) = report.failure {
        return Err(SequenceError::Replay { step, reason }.into());
    }
    if formula.num_vars() > 0 && formula.num_clauses() > 0 {
        replay_final(&full, seq)?;
    }
    let n = formula.num_vars();
    let outcome = |value| BwmcOutcome {
        value,
        width: 0,
        t: 0,
        levels: Vec::new(),
    };
    if formula.has_empty_clause() {
        return Ok(outcome(Weight::zero()));
    }
    let k = (k as usize).min(n);
    if k == 0 {
        let all_zero = crate::cnf::Assignment::all_false(n);
        let value = if crate::cnf::satisfies(formula, &all_zero) {
            crate::cnf::assignment_weight(formula, weights, &all_zero)
        } else {
            Weight::zero()
        };
        return Ok(outcome(value));
    }
    let occurring = formula.occurring_vars();
    let unused = (1..=n as u32).filter(|&v| !occurring[v as usize]);
    let free = free_polynomial(weights, unused, k);
    if formula.num_clauses() == 0 {
        return Ok(outcome(free.iter().sum()));
    }

    let mut used = SignedTrigraph::new();
    for v in full.vertices() {
        if full.side(v) == Some(Side::Cla) || occurring[v as usize] {
            used.add_vertex(v, full.side(v).unwrap());
        }
    }
    for (a, b, kind) in full.edges() {
        used.set_edge(a, b, kind).expect("both endpoints are used");
    }
    let projected = project_sequence(&full, &used, seq);
    let width = verify(&used, &projected, true).width;
    let n_used = occurring.iter().filter(|&&b| b).count();
    let k_dp = k.min(n_used);
    let ctx = Ctx {
        formula,
        weights,
        k: k_dp,
        t: region_bound.unwrap_or(k_dp * (width * width + 1)).max(1),
    };

    let mut record = base_record_of(&ctx, &used);
    on_level(&used, &record);
    let mut levels = Vec::new();
    let mut replay = Replay::new(&used, &projected, SidePolicy::Enforce);
    loop {
        let prev = replay.graph().clone();
        let Some(step) = replay.next_step() else { break };
        let step = step?;
        levels.push(transition(&ctx, &mut record, &prev, replay.graph(), &step)?);
        on_level(replay.graph(), &record);
    }
    let by_ones = finalize(&ctx, &record, replay.graph())?;

    let mut value = Weight::zero();
    for (l, w) in by_ones.iter().enumerate() {
        for (j, f) in free.iter().enumerate() {
            if l + j <= k {
                value += w * f;
            }
        }
    }
    Ok(BwmcOutcome {
        value,
        width,
        t: ctx.t,
        levels,
    })
}

fn replay_final(full: &SignedTrigraph, seq: &ContractionSequence) -> Result<(), BwmcError> {
    crate::sequence::replay_maximal_bipartite(full, seq)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::greedy_sequence;
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> Weight {
        BigRational::new(a.into(), b.into())
    }

    fn solve(f: &Formula, w: &WeightFunction, k: i64) -> Weight {
        let seq = greedy_sequence(&incidence_graph(f), true);
        solve_bwmc(f, w, k, &seq).unwrap()
    }

    #[test]
    fn base_record_example() {
        let f = Formula::new(1, vec![vec![Lit::pos(1)]]);
        let w = WeightFunction::from_pairs(vec![(q(3, 1), q(5, 1))]);
        let r = base_record(&f, &w, 1);
        assert_eq!(r.num_profiles(), 3);
        let vals: Vec<Weight> = r.profiles().map(|(_, w)| w.clone()).collect();
        // var profiles ordered by key: P = ∅ first
        assert_eq!(vals, vec![q(5, 1), q(3, 1), q(1, 1)]);
    }

    #[test]
    fn small_counts() {
        let f = Formula::new(2, vec![vec![Lit::pos(1), Lit::pos(2)]]);
        let unit = WeightFunction::unit(2);
        assert_eq!(solve(&f, &unit, 1), q(2, 1));
        assert_eq!(solve(&f, &unit, 2), q(3, 1));
        assert_eq!(solve(&f, &unit, 0), q(0, 1));

        let f = Formula::new(1, vec![vec![Lit::pos(1)]]);
        assert_eq!(solve(&f, &WeightFunction::unit(1), 1), q(1, 1));

        let f = Formula::new(2, vec![vec![Lit::pos(1), Lit::neg(2)]]);
        let w = WeightFunction::from_pairs(vec![(q(1, 2), q(1, 2)), (q(2, 1), q(1, 1))]);
        assert_eq!(solve(&f, &w, 2), q(2, 1));
    }

    #[test]
    fn unused_variables_and_degenerate_formulas() {
        let f = Formula::new(3, vec![vec![Lit::pos(1)]]);
        let unit = WeightFunction::unit(3);
        // x1 = 1, x2 and x3 free with at most one more one
        assert_eq!(solve(&f, &unit, 2), q(3, 1));
        let empty = Formula::new(2, Vec::<Vec<Lit>>::new());
        assert_eq!(solve(&empty, &unit, 1), q(3, 1));
        let seq = ContractionSequence::new(3, vec![]);
        assert!(matches!(solve_bwmc(&f, &unit, -1, &seq), Err(BwmcError::NegativeBudget(-1))));
    }

    #[test]
    fn rejects_non_maximal_sequence() {
        let f = Formula::new(2, vec![vec![Lit::pos(1)], vec![Lit::pos(2)]]);
        let seq = ContractionSequence::new(4, vec![(1, 2)]);
        assert!(solve_bwmc(&f, &WeightFunction::unit(2), 1, &seq).is_err());
    }

    #[test]
    fn twin_variables() {
        let f = Formula::new(2, vec![vec![Lit::pos(1), Lit::pos(2)], vec![Lit::neg(1), Lit::neg(2)]]);
        let w = WeightFunction::from_pairs(vec![(q(2, 1), q(3, 1)), (q(5, 1), q(7, 1))]);
        let seq = ContractionSequence::new(4, vec![(1, 2), (3, 4)]);
        let mut seen = false;
        solve_bwmc_traced(&f, &w, 1, &seq, |g, r| {
            if g.num_vertices() == 3 {
                let z = g.vertices_on(Side::Var).next().unwrap();
                let key = ProfileKey { p: 1, m: 1, l: 1, q: 0 };
                // x=1,y=0 and x=0,y=1
                assert_eq!(r.regions[&vec![z]][&key], q(2 * 7 + 3 * 5, 1));
                seen = true;
            }
        })
        .unwrap();
        assert!(seen);
    }
}
