//! The two-layer gadgets for k = 4 and k = 5.
//!
//! `L1` holds every stack of length `k-1`. `L2` holds triples `({S1,S2}, x, y)`
//! with `|S1| + |S2| = k-2` such that one concatenation order satisfies `x`
//! and the other satisfies `y`. Vertices sharing a stack pair form a clique
//! (coordinate changes), stored as a clique group rather than explicit edges.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::graph::{Graph, GraphBuilder, NO_GROUP};
use crate::ov::{OvInstance, OvWitness};
use crate::stack::{concat, satisfies_unchecked, CoordArray, Stack};

/// Every L2 vertex has degree at most `DEGREE_CONST * (n + d^{2(k-1)})`.
pub const DEGREE_CONST: u64 = 5;

pub const UNREACHED: u8 = u8::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmallError {
    #[error("this builder handles k = {expected}, instance has k = {got}")]
    WrongK { expected: usize, got: usize },
    #[error("vertex {0} is not in the gadget")]
    VertexMissing(String),
    #[error("gadget too large: {0}")]
    TooLarge(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmallVertex {
    L1(Stack),
    /// Unordered pair stored with the lexicographically smaller stack first.
    L2 { pair: (Stack, Stack), x: CoordArray, y: CoordArray },
}

pub type K4Vertex = SmallVertex;
pub type K5Vertex = SmallVertex;

impl fmt::Display for SmallVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmallVertex::L1(s) => write!(f, "L1 {s}"),
            SmallVertex::L2 { pair, x, y } => write!(f, "L2 {{{},{}}} x={x} y={y}", pair.0, pair.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    L1L2,
    /// Pop from one stack, push onto the other.
    VectorType1,
    /// Pop from one stack, push back onto the same stack.
    VectorType2,
    CoordChange,
}

fn canon(a: Stack, b: Stack) -> (Stack, Stack) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn all_stacks(n: usize, len: usize) -> Vec<Stack> {
    let mut out = vec![Stack::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|s| (0..n).map(move |a| s.pushed(a))).collect();
    }
    out
}

/// Vertex index of a small gadget: vertex ids, membership bitsets and the
/// pair-to-pair moves. Edges are produced by [`SmallGadget::build_graph`] or
/// traversed implicitly by [`SmallGadget::implicit_bfs`].
#[derive(Debug, Clone)]
pub struct SmallGadget {
    inst: OvInstance,
    k: usize,
    universe: usize,
    l1_sat: Vec<BitSet>,
    pairs: Vec<(Stack, Stack)>,
    pair_index: HashMap<(Stack, Stack), u32>,
    /// Arrays satisfied by `S1∘S2` and by `S2∘S1`.
    sat_fwd: Vec<BitSet>,
    sat_rev: Vec<BitSet>,
    codes: Vec<Vec<u32>>,
    bases: Vec<u32>,
    moves: Vec<Vec<(u32, EdgeKind)>>,
    total: usize,
}

impl SmallGadget {
    /// Indexes the gadget for `inst` (any `k >= 3`; the public builders pin k).
    pub fn index(inst: &OvInstance) -> Result<Self, SmallError> {
        let k = inst.k();
        let d = inst.d();
        let n = inst.n();
        let universe = d.checked_pow((k - 1) as u32).filter(|&u| u <= 65_535).ok_or_else(|| {
            SmallError::TooLarge(format!("d^(k-1) = {d}^{} arrays per slot", k - 1))
        })?;
        let arrays: Vec<CoordArray> = (0..universe).map(|r| CoordArray::unrank(r, d, k - 1)).collect();
        let sat_set = |s: &Stack| {
            let mut b = BitSet::empty(universe);
            for (r, x) in arrays.iter().enumerate() {
                if satisfies_unchecked(s, x, inst) {
                    b.set(r);
                }
            }
            b
        };
        let l1: Vec<Stack> = all_stacks(n, k - 1);
        let l1_sat: Vec<BitSet> = l1.iter().map(&sat_set).collect();

        let mut pairs = Vec::new();
        for l in 0..=k - 2 {
            for a in all_stacks(n, l) {
                for b in all_stacks(n, k - 2 - l) {
                    if a <= b {
                        pairs.push((a.clone(), b));
                    }
                }
            }
        }
        pairs.sort();
        let pair_index: HashMap<(Stack, Stack), u32> =
            pairs.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
        let sat_fwd: Vec<BitSet> = pairs.iter().map(|(a, b)| sat_set(&concat(a, b))).collect();
        let sat_rev: Vec<BitSet> = pairs.iter().map(|(a, b)| sat_set(&concat(b, a))).collect();

        let mut codes = Vec::with_capacity(pairs.len());
        let mut bases = Vec::with_capacity(pairs.len());
        let mut total = l1.len();
        for p in 0..pairs.len() {
            let (f, r) = (&sat_fwd[p], &sat_rev[p]);
            let mut xs = f.clone();
            xs.union_with(r);
            let mut list = Vec::new();
            for x in xs.iter() {
                let mut ys = BitSet::empty(universe);
                if f.get(x) {
                    ys.union_with(r);
                }
                if r.get(x) {
                    ys.union_with(f);
                }
                list.extend(ys.iter().map(|y| (x * universe + y) as u32));
            }
            bases.push(total as u32);
            total += list.len();
            codes.push(list);
        }
        if total > u32::MAX as usize / 2 {
            return Err(SmallError::TooLarge(format!("{total} vertices")));
        }

        let mut moves = Vec::with_capacity(pairs.len());
        for (pi, (a, b)) in pairs.iter().enumerate() {
            let mut m = Vec::new();
            let orders: &[(&Stack, &Stack)] = if a == b { &[(a, b)] } else { &[(a, b), (b, a)] };
            for &(s1, s2) in orders {
                if s1.is_empty() {
                    continue;
                }
                let rest = s1.popped();
                for v in 0..n {
                    let q1 = pair_index[&canon(rest.clone(), s2.pushed(v))];
                    let q2 = pair_index[&canon(rest.pushed(v), s2.clone())];
                    for (q, kind) in [(q1, EdgeKind::VectorType1), (q2, EdgeKind::VectorType2)] {
                        if q as usize != pi && !m.contains(&(q, kind)) {
                            m.push((q, kind));
                        }
                    }
                }
            }
            moves.push(m);
        }

        Ok(SmallGadget {
            inst: inst.clone(),
            k,
            universe,
            l1_sat,
            pairs,
            pair_index,
            sat_fwd,
            sat_rev,
            codes,
            bases,
            moves,
            total,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn instance(&self) -> &OvInstance {
        &self.inst
    }

    pub fn num_vertices(&self) -> usize {
        self.total
    }

    pub fn num_l1(&self) -> usize {
        self.l1_sat.len()
    }

    pub fn num_l2(&self) -> usize {
        self.total - self.num_l1()
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Size of the coordinate-array universe `d^{k-1}`.
    pub fn universe(&self) -> usize {
        self.universe
    }

    fn l1_rank(&self, s: &[u32]) -> usize {
        let n = self.inst.n();
        s.iter().fold(0usize, |acc, &a| acc * n + a as usize)
    }

    fn l1_stack(&self, mut r: usize) -> Stack {
        let n = self.inst.n();
        let mut v = vec![0usize; self.k - 1];
        for slot in v.iter_mut().rev() {
            *slot = r % n;
            r /= n;
        }
        Stack::from_slice(&v)
    }

    fn l2_id(&self, pair: u32, code: u32) -> Option<u32> {
        let list = &self.codes[pair as usize];
        list.binary_search(&code).ok().map(|i| self.bases[pair as usize] + i as u32)
    }

    /// Pair index and `x*U + y` code of an L2 vertex id.
    fn l2_locate(&self, id: u32) -> (u32, u32) {
        let p = self.bases.partition_point(|&b| b <= id) - 1;
        (p as u32, self.codes[p][(id - self.bases[p]) as usize])
    }

    pub fn id_of(&self, v: &SmallVertex) -> Option<u32> {
        match v {
            SmallVertex::L1(s) => {
                (s.len() == self.k - 1 && s.iter().all(|&a| (a as usize) < self.inst.n()))
                    .then(|| self.l1_rank(s) as u32)
            }
            SmallVertex::L2 { pair, x, y } => {
                let p = *self.pair_index.get(pair)?;
                let d = self.inst.d();
                if x.len() != self.k - 1 || y.len() != self.k - 1 || x.iter().chain(y.iter()).any(|&c| c as usize >= d) {
                    return None;
                }
                self.l2_id(p, (x.rank(d) * self.universe + y.rank(d)) as u32)
            }
        }
    }

    pub fn vertex(&self, id: u32) -> SmallVertex {
        if (id as usize) < self.num_l1() {
            return SmallVertex::L1(self.l1_stack(id as usize));
        }
        let (p, code) = self.l2_locate(id);
        let d = self.inst.d();
        let u = self.universe;
        SmallVertex::L2 {
            pair: self.pairs[p as usize].clone(),
            x: CoordArray::unrank(code as usize / u, d, self.k - 1),
            y: CoordArray::unrank(code as usize % u, d, self.k - 1),
        }
    }

    /// The L1 endpoints `(a_1..a_{k-1})` and `(a_k..a_2)` for a witness.
    pub fn endpoint_pair(&self, witness: &OvWitness) -> Result<(u32, u32), SmallError> {
        let w = &witness.indices;
        let left = Stack::from_slice(&w[..self.k - 1]);
        let right = Stack::from_slice(&w[1..].iter().rev().copied().collect::<Vec<_>>());
        let id = |s: Stack| {
            let v = SmallVertex::L1(s);
            self.id_of(&v).ok_or_else(|| SmallError::VertexMissing(v.to_string()))
        };
        Ok((id(left)?, id(right)?))
    }

    /// Materializes all edges. Coordinate changes become clique groups.
    pub fn build_graph(&self) -> Graph {
        let mut b = GraphBuilder::new(self.total);
        let u = self.universe;
        for (li, sat) in self.l1_sat.iter().enumerate() {
            let s = self.l1_stack(li);
            let p = self.pair_index[&canon(Stack::new(), s.popped())];
            for x in sat.iter() {
                for y in sat.iter() {
                    let id = self.l2_id(p, (x * u + y) as u32).expect("L2 side of an L1 edge always exists");
                    b.add_edge(li as u32, id);
                }
            }
        }
        for p in 0..self.pairs.len() {
            for &(q, _) in &self.moves[p] {
                if (q as usize) < p {
                    continue;
                }
                let (a, c) = (&self.codes[p], &self.codes[q as usize]);
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < c.len() {
                    match a[i].cmp(&c[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            b.add_edge(self.bases[p] + i as u32, self.bases[q as usize] + j as u32);
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        }
        let mut groups = vec![NO_GROUP; self.total];
        for p in 0..self.pairs.len() {
            let base = self.bases[p] as usize;
            for g in groups.iter_mut().skip(base).take(self.codes[p].len()) {
                *g = p as u32;
            }
        }
        b.set_groups(groups);
        b.build()
    }

    /// Rule-based edge check straight from the definitions, independent of the
    /// id bookkeeping used to build edges.
    pub fn classify_edge(&self, a: &SmallVertex, b: &SmallVertex) -> Option<EdgeKind> {
        let inst = &self.inst;
        let sat = |s: &Stack, x: &CoordArray| satisfies_unchecked(s, x, inst);
        let member = |v: &SmallVertex| match v {
            SmallVertex::L1(s) => s.len() == self.k - 1,
            SmallVertex::L2 { pair: (s1, s2), x, y } => {
                let (f, r) = (concat(s1, s2), concat(s2, s1));
                s1.len() + s2.len() == self.k - 2 && ((sat(&f, x) && sat(&r, y)) || (sat(&f, y) && sat(&r, x)))
            }
        };
        if a == b || !member(a) || !member(b) {
            return None;
        }
        match (a, b) {
            (SmallVertex::L1(s), SmallVertex::L2 { pair, x, y }) | (SmallVertex::L2 { pair, x, y }, SmallVertex::L1(s)) => {
                let want = canon(s.popped(), Stack::new());
                (*pair == want && sat(s, x) && sat(s, y)).then_some(EdgeKind::L1L2)
            }
            (SmallVertex::L2 { pair: p, x, y }, SmallVertex::L2 { pair: q, x: x2, y: y2 }) => {
                if p == q {
                    return Some(EdgeKind::CoordChange);
                }
                if x != x2 || y != y2 {
                    return None;
                }
                let (s1s, s2s) = ([&p.0, &p.1], [&p.1, &p.0]);
                for i in 0..2 {
                    let (s1, s2) = (s1s[i], s2s[i]);
                    if s1.is_empty() {
                        continue;
                    }
                    for v in 0..inst.n() {
                        if canon(s1.popped(), s2.pushed(v)) == *q {
                            return Some(EdgeKind::VectorType1);
                        }
                        if canon(s1.popped().pushed(v), s2.clone()) == *q {
                            return Some(EdgeKind::VectorType2);
                        }
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Single-source hop distances without materializing edges; `UNREACHED` marks
    /// unreachable vertices. Suitable for gadgets with tens of millions of vertices.
    pub fn implicit_bfs(&self, source: u32) -> Vec<u8> {
        let u = self.universe;
        let nl1 = self.num_l1();
        let mut dist = vec![UNREACHED; self.total];
        let mut expanded = vec![false; self.pairs.len()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        let leaf_pair: Vec<u32> =
            (0..nl1).map(|li| self.pair_index[&canon(Stack::new(), self.l1_stack(li).popped())]).collect();
        let l1_children: HashMap<u32, Vec<usize>> = {
            let mut m: HashMap<u32, Vec<usize>> = HashMap::new();
            for (li, &p) in leaf_pair.iter().enumerate() {
                m.entry(p).or_default().push(li);
            }
            m
        };
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            let nd = dv.saturating_add(1);
            let visit = |w: u32, dist: &mut Vec<u8>, queue: &mut VecDeque<u32>| {
                if dist[w as usize] == UNREACHED {
                    dist[w as usize] = nd;
                    queue.push_back(w);
                }
            };
            if (v as usize) < nl1 {
                let p = leaf_pair[v as usize];
                if expanded[p as usize] {
                    continue;
                }
                let sat = &self.l1_sat[v as usize];
                for x in sat.iter() {
                    for y in sat.iter() {
                        let id = self.l2_id(p, (x * u + y) as u32).unwrap();
                        visit(id, &mut dist, &mut queue);
                    }
                }
                continue;
            }
            let (p, code) = self.l2_locate(v);
            let (x, y) = (code as usize / u, code as usize % u);
            if !expanded[p as usize] {
                expanded[p as usize] = true;
                let base = self.bases[p as usize];
                for i in 0..self.codes[p as usize].len() {
                    visit(base + i as u32, &mut dist, &mut queue);
                }
            }
            for &(q, _) in &self.moves[p as usize] {
                let (f, r) = (&self.sat_fwd[q as usize], &self.sat_rev[q as usize]);
                if (f.get(x) && r.get(y)) || (f.get(y) && r.get(x)) {
                    let id = self.l2_id(q, code).unwrap();
                    visit(id, &mut dist, &mut queue);
                }
            }
            if let Some(children) = l1_children.get(&p) {
                for &li in children {
                    let sat = &self.l1_sat[li];
                    if sat.get(x) && sat.get(y) {
                        visit(li as u32, &mut dist, &mut queue);
                    }
                }
            }
        }
        dist
    }

    /// Degree of every vertex, counting clique partners.
    pub fn max_l2_degree(&self, g: &Graph) -> u64 {
        (self.num_l1()..self.total)
            .map(|v| {
                let group = g.group(v).map_or(0, |gid| g.group_members(gid).len() as u64 - 1);
                g.neighbors(v).len() as u64 + group
            })
            .max()
            .unwrap_or(0)
    }
}

fn check_k(inst: &OvInstance, k: usize) -> Result<(), SmallError> {
    if inst.k() != k {
        return Err(SmallError::WrongK { expected: k, got: inst.k() });
    }
    Ok(())
}

pub fn build_k4_graph(inst: &OvInstance) -> Result<(Graph, SmallGadget), SmallError> {
    check_k(inst, 4)?;
    let gadget = SmallGadget::index(inst)?;
    Ok((gadget.build_graph(), gadget))
}

pub fn build_k5_graph(inst: &OvInstance) -> Result<(Graph, SmallGadget), SmallError> {
    check_k(inst, 5)?;
    let gadget = SmallGadget::index(inst)?;
    Ok((gadget.build_graph(), gadget))
}

/// Builds the gadget matching `inst.k()` (4 or 5).
pub fn build_small_graph(inst: &OvInstance) -> Result<(Graph, SmallGadget), SmallError> {
    match inst.k() {
        4 => build_k4_graph(inst),
        5 => build_k5_graph(inst),
        got => Err(SmallError::WrongK { expected: 4, got }),
    }
}

/// Vertex ids in `L1` lexicographic order followed by `L2` in (pair, x, y) order.
pub fn endpoint_pair(gadget: &SmallGadget, witness: &OvWitness) -> Result<(u32, u32), SmallError> {
    gadget.endpoint_pair(witness)
}
