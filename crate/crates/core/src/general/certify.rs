//! Symbolic breadth-first search over configurations whose edge slots are
//! sets of coordinate arrays.
//!
//! A symbolic state fixes the skeleton (node order and stacks) and holds, per
//! slot, the set of arrays still allowed. Obligations only ever test slot
//! membership, so the concrete configurations a state stands for are exactly
//! the product of its slot sets, and the union over reached states is the
//! concrete reachable set.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ops::{Deletion, FullOp, Insertion};
use super::{Configuration, EdgeConstraint};
use crate::bits::BitSet;
use crate::ov::{OvInstance, OvWitness};
use crate::stack::{all_arrays, satisfies_unchecked, CoordArray, Stack};

pub type SymbolicConfig = Configuration<BitSet>;

pub const DEFAULT_CAP: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("state budget exceeded: {states} states at depth {depth}")]
    BudgetExceeded { states: usize, depth: usize, frontier_sizes: Vec<usize> },
    #[error("bad input: {0}")]
    Input(String),
    #[error("sanity check failed: {0}")]
    Sanity(String),
}

#[derive(Debug, Clone)]
pub struct CertifyParams {
    /// Deepest layer explored.
    pub budget: usize,
    /// Maximum number of distinct states.
    pub cap: usize,
    /// Restrict slots to these arrays instead of all of `[d]^{k-1}`.
    pub universe: Option<Vec<CoordArray>>,
    /// Keep every state, grouped by depth.
    pub keep_states: bool,
    /// Stop at the first layer containing the target.
    pub stop_at_target: bool,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams { budget: 6, cap: DEFAULT_CAP, universe: None, keep_states: false, stop_at_target: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub start: Stack,
    pub target: Stack,
    pub budget: usize,
    pub reached: bool,
    pub first_reach_depth: Option<usize>,
    /// New states per depth, starting with depth 0.
    pub frontier_sizes: Vec<usize>,
    pub total_states: usize,
    pub universe_size: usize,
    /// Every state at depth `s` had a node whose stack starts with the
    /// first `k-1-s` vectors of the start stack.
    pub prefix_check: bool,
    #[serde(skip)]
    pub layers: Vec<Vec<SymbolicConfig>>,
    #[serde(skip)]
    pub universe: Vec<CoordArray>,
}

impl Certificate {
    /// Concrete canonical configurations represented by the states at depth `<= depth`.
    pub fn concrete_within(&self, depth: usize) -> HashSet<Configuration<CoordArray>> {
        let mut out = HashSet::new();
        for layer in self.layers.iter().take(depth + 1) {
            for s in layer {
                expand(s, &self.universe, &mut out);
            }
        }
        out
    }
}

/// Adds every concrete configuration in the product of `s`'s slot sets.
pub fn expand(s: &SymbolicConfig, universe: &[CoordArray], out: &mut HashSet<Configuration<CoordArray>>) {
    let slots = s.all_slots();
    let choices: Vec<Vec<usize>> = slots.iter().map(|r| s.slot_value(*r).iter().collect()).collect();
    let blank = s.map_slots(|_| CoordArray::default());
    let mut idx = vec![0usize; slots.len()];
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    loop {
        let mut c = blank.clone();
        for (i, r) in slots.iter().enumerate() {
            *c.slot_value_mut(*r) = universe[choices[i][idx[i]]].clone();
        }
        out.insert(c.canonical());
        let mut i = 0;
        loop {
            if i == idx.len() {
                return;
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

pub(crate) struct SatCache<'a> {
    inst: &'a OvInstance,
    universe: &'a [CoordArray],
    cache: HashMap<Stack, BitSet>,
}

impl<'a> SatCache<'a> {
    pub(crate) fn new(inst: &'a OvInstance, universe: &'a [CoordArray]) -> Self {
        SatCache { inst, universe, cache: HashMap::new() }
    }

    fn mask(&mut self, s: &Stack) -> &BitSet {
        let (inst, universe) = (self.inst, self.universe);
        self.cache.entry(s.clone()).or_insert_with(|| {
            let mut b = BitSet::empty(universe.len());
            for (i, x) in universe.iter().enumerate() {
                if satisfies_unchecked(s, x, inst) {
                    b.set(i);
                }
            }
            b
        })
    }

    /// Intersects every obligated slot with its stack's mask; false if some
    /// obligation cannot be met.
    pub(crate) fn constrain(&mut self, c: &mut SymbolicConfig) -> bool {
        let m = c.k() - 1;
        for (pos, r) in c.obligations() {
            let Some(r) = r else { return false };
            let s = &c.nodes()[pos].stack;
            if s.len() > m {
                return false;
            }
            let mask = self.mask(&s.clone()).clone();
            let slot = c.slot_value_mut(r);
            slot.intersect_with(&mask);
            if slot.is_empty() {
                return false;
            }
        }
        true
    }
}

fn encode(c: &SymbolicConfig) -> Box<[u64]> {
    let mut out = Vec::with_capacity(4 + c.edges().len() * 16);
    out.push(c.num_nodes() as u64);
    for n in c.nodes() {
        out.push(n.stack.len() as u64);
        out.extend(n.stack.iter().map(|&a| a as u64));
    }
    for e in c.edges() {
        out.push(e.ends[0] as u64 | (e.ends[1] as u64) << 8);
        for side in &e.sides {
            for s in side {
                out.extend_from_slice(s.words());
            }
        }
        out.extend_from_slice(e.star.words());
    }
    out.into_boxed_slice()
}

/// Valid symbolic successors of `h` under one full operation, canonicalized.
pub(crate) fn successors(h: &SymbolicConfig, n: usize, sat: &mut SatCache) -> Vec<SymbolicConfig> {
    raw_successors(h, n, sat).into_iter().map(|(c, _)| c.canonical()).collect()
}

/// Successors with their original labels, paired with the deleted node if any.
fn raw_successors(h: &SymbolicConfig, n: usize, sat: &mut SatCache) -> Vec<(SymbolicConfig, Option<super::Label>)> {
    let k = h.k();
    let ulen = sat.universe.len();
    let mut insertions = Vec::new();
    for node in h.labels() {
        for b in 0..n {
            insertions.push(Insertion::Vector { node, b });
        }
    }
    if let Some(label) = h.fresh_label() {
        let full = EdgeConstraint::uniform(label, h.root(), k, BitSet::full(ulen));
        insertions.push(Insertion::Node { label, second_largest: false, constraint: full.clone() });
        if h.num_nodes() >= 2 {
            insertions.push(Insertion::Node { label, second_largest: true, constraint: full });
        }
    }
    let mut out = Vec::new();
    for ins in &insertions {
        let Ok(mut mid) = h.insert(ins) else { continue };
        if !mid.root_large_enough() || !sat.constrain(&mut mid) {
            continue;
        }
        let mut pre = vec![mid.clone()];
        if let Ok(mut f) = mid.flip() {
            if f.root_large_enough() && sat.constrain(&mut f) {
                pre.push(f);
            }
        }
        for p in &pre {
            for del in deletions(p) {
                let Ok(mut end) = p.delete(&del) else { continue };
                if h.num_nodes() < 2 && end.num_nodes() < 2 {
                    continue;
                }
                if end.root_large_enough() && sat.constrain(&mut end) {
                    let gone = match del {
                        Deletion::Node { label } => Some(label),
                        Deletion::Vector { .. } => None,
                    };
                    out.push((end, gone));
                }
            }
        }
    }
    out
}

fn deletions<T: Clone>(c: &Configuration<T>) -> Vec<Deletion> {
    let mut out = Vec::new();
    for (i, nd) in c.nodes().iter().enumerate() {
        if !nd.stack.is_empty() {
            out.push(Deletion::Vector { node: nd.label });
        } else if i > 0 && i + 2 >= c.num_nodes() {
            out.push(Deletion::Node { label: nd.label });
        }
    }
    out
}

/// The weight-0 flip partner of a size-k state, if it exists and is valid.
pub(crate) fn flip_partner(c: &SymbolicConfig, sat: &mut SatCache) -> Option<SymbolicConfig> {
    let mut f = c.flip().ok()?;
    (f.root_large_enough() && sat.constrain(&mut f)).then(|| f.canonical())
}

/// Searches from the one-node configuration holding `start` for the one
/// holding `target`, layer by layer up to `params.budget` operations.
pub fn certify_between(inst: &OvInstance, start: &Stack, target: &Stack, params: &CertifyParams) -> Result<Certificate, CertifyError> {
    let k = inst.k();
    if k < 2 || start.len() != k - 1 || target.len() != k - 1 {
        return Err(CertifyError::Input(format!("start and target must be stacks of length {}", k - 1)));
    }
    if inst.d() > 8 && params.universe.is_none() {
        return Err(CertifyError::Input("full universe too large; pass a restricted universe".into()));
    }
    let universe: Vec<CoordArray> = match &params.universe {
        Some(u) => u.clone(),
        None => all_arrays(inst.d(), k - 1).collect(),
    };
    if universe.iter().any(|x| x.len() != k - 1 || x.iter().any(|&c| c as usize >= inst.d())) {
        return Err(CertifyError::Input("universe arrays must lie in [d]^(k-1)".into()));
    }
    let mut sat = SatCache::new(inst, &universe);
    let n = inst.n();

    let h0: SymbolicConfig = Configuration::single(k, 1, start.clone());
    let mut seen: HashSet<Box<[u64]>> = HashSet::new();
    seen.insert(encode(&h0));
    let mut frontier = vec![h0];
    let mut cert = Certificate {
        k,
        start: start.clone(),
        target: target.clone(),
        budget: params.budget,
        reached: false,
        first_reach_depth: None,
        frontier_sizes: vec![1],
        total_states: 1,
        universe_size: universe.len(),
        prefix_check: true,
        layers: Vec::new(),
        universe: Vec::new(),
    };
    let is_target = |c: &SymbolicConfig| c.num_nodes() == 1 && &c.nodes()[0].stack == target;
    if is_target(&frontier[0]) {
        cert.reached = true;
        cert.first_reach_depth = Some(0);
    }
    for depth in 1..=params.budget {
        if cert.reached && params.stop_at_target {
            break;
        }
        let mut next: Vec<SymbolicConfig> = Vec::new();
        for h in &frontier {
            for s in successors(h, n, &mut sat) {
                let mut group = vec![s];
                if let Some(f) = flip_partner(&group[0], &mut sat) {
                    group.push(f);
                }
                for s in group {
                    if seen.insert(encode(&s)) {
                        next.push(s);
                        if seen.len() > params.cap {
                            let mut fs = cert.frontier_sizes.clone();
                            fs.push(next.len());
                            return Err(CertifyError::BudgetExceeded { states: seen.len(), depth, frontier_sizes: fs });
                        }
                    }
                }
            }
        }
        let want = (k - 1).saturating_sub(depth);
        if !next.iter().all(|c| c.nodes().iter().any(|nd| nd.stack.has_prefix(&start[..want]))) {
            cert.prefix_check = false;
        }
        if !cert.reached && next.iter().any(is_target) {
            cert.reached = true;
            cert.first_reach_depth = Some(depth);
        }
        cert.frontier_sizes.push(next.len());
        if params.keep_states {
            cert.layers.push(std::mem::replace(&mut frontier, next));
        } else {
            frontier = next;
        }
        if frontier.is_empty() {
            break;
        }
    }
    if params.keep_states {
        cert.layers.push(frontier);
        cert.universe = universe;
    }
    cert.total_states = seen.len();
    Ok(cert)
}

/// Symbolic lower-bound certificate for a yes-instance: starting at
/// `(a_1..a_{k-1})`, can `(a_k..a_2)` be reached within `params.budget`
/// operations?
pub fn yes_case_bound(inst: &OvInstance, witness: &OvWitness, params: &CertifyParams) -> Result<Certificate, CertifyError> {
    let k = inst.k();
    let w = &witness.indices;
    if w.len() != k {
        return Err(CertifyError::Input(format!("witness has {} indices, expected {k}", w.len())));
    }
    let start = Stack::from_slice(&w[..k - 1]);
    let target = Stack::from_slice(&w[1..].iter().rev().copied().collect::<Vec<_>>());
    certify_between(inst, &start, &target, params)
}

/// Checks every symbolic successor of `h`: edges of `h` survive unless their
/// leaf was deleted, and the slot sets of surviving edges only shrink.
/// Returns the successors (canonicalized) or a description of the violation.
pub fn check_step(h: &SymbolicConfig, inst: &OvInstance, universe: &[CoordArray]) -> Result<Vec<SymbolicConfig>, String> {
    let mut sat = SatCache::new(inst, universe);
    let mut out = Vec::new();
    for (end, gone) in raw_successors(h, inst.n(), &mut sat) {
        for e in h.edges() {
            let leaf = if e.ends[0] == h.root() { e.ends[1] } else { e.ends[0] };
            if gone == Some(leaf) {
                continue;
            }
            let Some(f) = end.edges().iter().find(|f| f.joins(e.ends[0]) && f.joins(e.ends[1])) else {
                return Err(format!("edge {:?} vanished in {h} -> {end}", e.ends));
            };
            for slot in e.slots() {
                if !f.slot(slot).is_subset(e.slot(slot)) {
                    return Err(format!("slot {slot:?} grew in {h} -> {end}"));
                }
            }
        }
        out.push(end.canonical());
    }
    Ok(out)
}

/// Structural check used by tests: a full operation never removes an edge it
/// did not delete a node for.
pub fn edges_persist<T: Clone>(h: &Configuration<T>, op: &FullOp<T>) -> bool {
    let Ok(tr) = h.trace(op) else { return true };
    let pairs = |c: &Configuration<T>| -> Vec<[u8; 2]> {
        c.edges()
            .iter()
            .map(|e| {
                let mut p = e.ends;
                p.sort();
                p
            })
            .collect()
    };
    let deleted = match op.deletion {
        Deletion::Node { label } => Some(label),
        Deletion::Vector { .. } => None,
    };
    let before = pairs(&tr[0]);
    let after = pairs(tr.last().unwrap());
    before.iter().all(|p| after.contains(p) || deleted.is_some_and(|l| p.contains(&l)))
}
