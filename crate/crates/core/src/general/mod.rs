//! Star-shaped configurations for general k: edge constraints, the
//! edge-satisfying relation, validity, relabeling and canonical forms.
//!
//! Nodes are stored in `≺` order, root first. Edge `i - 1` joins the root to
//! node `i`. Edge constraints are keyed by endpoint label, so they survive a
//! flip (which swaps root and leaf) unchanged.
//!
//! Configurations are generic over the slot payload: [`CoordArray`] for
//! concrete configurations, [`BitSet`](crate::bits::BitSet) for the symbolic
//! certifier.

pub mod certify;
pub mod explicit;
pub mod nocase;
pub mod ops;
pub mod sample;
pub mod root_removal;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ov::OvInstance;
use crate::stack::{satisfies_unchecked, CoordArray, Stack};

pub use certify::{yes_case_bound, Certificate, CertifyError, CertifyParams};
pub use nocase::{build_z, no_case_path, NoCaseError};
pub use ops::{apply_full_op, inverse_full_op, Deletion, FullOp, Insertion, OpError, PathStep};
pub use sample::{count_vertices_bound, random_valid_configuration, VertexCount};

pub type Label = u8;

/// `k' = floor(k/2) + 1`.
pub fn k_prime(k: usize) -> usize {
    k / 2 + 1
}

/// Number of node labels, `2k'`.
pub fn num_labels(k: usize) -> usize {
    2 * k_prime(k)
}

/// Smallest root stack allowed: `ceil((k-2)/2)`.
pub fn min_root(k: usize) -> usize {
    (k - 1) / 2
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeConstraint<T> {
    pub ends: [Label; 2],
    /// `sides[e][j - 1]` is `X_{ends[e], j}`.
    pub sides: [Vec<T>; 2],
    pub star: T,
}

impl<T: Clone> EdgeConstraint<T> {
    /// Every slot holds `value`.
    pub fn uniform(a: Label, b: Label, k: usize, value: T) -> Self {
        let kp = k_prime(k);
        EdgeConstraint { ends: [a, b], sides: [vec![value.clone(); kp], vec![value.clone(); kp]], star: value }
    }

    fn end_index(&self, label: Label) -> usize {
        if self.ends[0] == label {
            0
        } else {
            assert_eq!(self.ends[1], label, "label {label} is not an end of this edge");
            1
        }
    }

    pub fn joins(&self, label: Label) -> bool {
        self.ends.contains(&label)
    }

    pub fn other(&self, label: Label) -> Label {
        self.ends[1 - self.end_index(label)]
    }

    pub fn slot(&self, slot: Slot) -> &T {
        match slot {
            Slot::Star => &self.star,
            Slot::Side(owner, j) => &self.sides[self.end_index(owner)][j - 1],
        }
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut T {
        match slot {
            Slot::Star => &mut self.star,
            Slot::Side(owner, j) => {
                let e = self.end_index(owner);
                &mut self.sides[e][j - 1]
            }
        }
    }

    /// All `2k' + 1` slots: side of `ends[0]`, side of `ends[1]`, then star.
    pub fn slots(&self) -> Vec<Slot> {
        let kp = self.sides[0].len();
        let mut out: Vec<Slot> = (1..=kp).map(|j| Slot::Side(self.ends[0], j)).collect();
        out.extend((1..=kp).map(|j| Slot::Side(self.ends[1], j)));
        out.push(Slot::Star);
        out
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> EdgeConstraint<U> {
        EdgeConstraint {
            ends: self.ends,
            sides: [self.sides[0].iter().map(&mut f).collect(), self.sides[1].iter().map(&mut f).collect()],
            star: f(&self.star),
        }
    }

    fn relabel(&self, pi: &[Label]) -> Self {
        let mut e = self.clone();
        e.ends = [pi[self.ends[0] as usize], pi[self.ends[1] as usize]];
        e
    }

    /// Same constraint with `ends` in increasing label order.
    fn normalized(mut self) -> Self {
        if self.ends[0] > self.ends[1] {
            self.ends.swap(0, 1);
            self.sides.swap(0, 1);
        }
        self
    }
}

/// One coordinate-array slot of an edge constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    /// `X_{owner, j}` with `j` in `1..=k'`.
    Side(Label, usize),
    Star,
}

/// A slot on the edge whose non-root end is `leaf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotRef {
    pub leaf: Label,
    pub slot: Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub label: Label,
    pub stack: Stack,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration<T> {
    k: usize,
    nodes: Vec<Node>,
    edges: Vec<EdgeConstraint<T>>,
}

pub type ConcreteConfig = Configuration<CoordArray>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Malformed(String),
}

impl<T: Clone> Configuration<T> {
    /// A one-node configuration.
    pub fn single(k: usize, label: Label, stack: Stack) -> Self {
        Configuration { k, nodes: vec![Node { label, stack }], edges: Vec::new() }
    }

    /// Builds from nodes in `≺` order (root first) and one edge per leaf.
    pub fn from_parts(k: usize, nodes: Vec<Node>, edges: Vec<EdgeConstraint<T>>) -> Result<Self, ConfigError> {
        let c = Configuration { k, nodes, edges };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Malformed(m));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        let nl = num_labels(self.k);
        let mut seen = vec![false; nl + 1];
        for n in &self.nodes {
            let l = n.label as usize;
            if l == 0 || l > nl {
                return bad(format!("label {l} outside 1..={nl}"));
            }
            if seen[l] {
                return bad(format!("label {l} used twice"));
            }
            seen[l] = true;
        }
        if self.edges.len() + 1 != self.nodes.len() {
            return bad("a star on t nodes has t-1 edges".into());
        }
        let root = self.nodes[0].label;
        let kp = k_prime(self.k);
        for (i, e) in self.edges.iter().enumerate() {
            let leaf = self.nodes[i + 1].label;
            if !(e.joins(root) && e.joins(leaf)) {
                return bad(format!("edge {i} does not join root {root} and leaf {leaf}"));
            }
            if e.sides[0].len() != kp || e.sides[1].len() != kp {
                return bad(format!("edge {i} does not have 2k'+1 = {} slots", 2 * kp + 1));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeConstraint<T>] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> Label {
        self.nodes[0].label
    }

    pub fn labels(&self) -> Vec<Label> {
        self.nodes.iter().map(|n| n.label).collect()
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    pub fn stack(&self, label: Label) -> Option<&Stack> {
        self.position(label).map(|i| &self.nodes[i].stack)
    }

    /// Number of stacks plus the number of vectors in them.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| 1 + n.stack.len()).sum()
    }

    /// The edge whose non-root end is `leaf`.
    pub fn edge_of(&self, leaf: Label) -> Option<&EdgeConstraint<T>> {
        let p = self.position(leaf)?;
        (p > 0).then(|| &self.edges[p - 1])
    }

    pub fn slot_value(&self, r: SlotRef) -> &T {
        self.edge_of(r.leaf).expect("slot reference to a missing edge").slot(r.slot)
    }

    pub fn slot_value_mut(&mut self, r: SlotRef) -> &mut T {
        let p = self.position(r.leaf).expect("slot reference to a missing edge");
        self.edges[p - 1].slot_mut(r.slot)
    }

    /// Every slot reference of every edge.
    pub fn all_slots(&self) -> Vec<SlotRef> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let leaf = self.nodes[i + 1].label;
            out.extend(e.slots().into_iter().map(|slot| SlotRef { leaf, slot }));
        }
        out
    }

    /// Root stack meets `|S_root| >= (k-2)/2`, compared as `2|S_root| >= k-2`.
    pub fn root_large_enough(&self) -> bool {
        2 * self.nodes[0].stack.len() + 2 >= self.k
    }

    /// The coordinate arrays the stack at `label` must satisfy.
    ///
    /// Part 1: for the edge to each neighbor, the node's own side and the star.
    /// Part 2: for every later node `v_{i'}`, slot `X_{v_{i'}, i}` on the
    /// edge `(v_{i'}, root)`, where `i` is this node's position.
    pub fn required_arrays(&self, label: Label) -> Vec<SlotRef> {
        let Some(pos) = self.position(label) else { return Vec::new() };
        let kp = k_prime(self.k);
        let mut out = Vec::new();
        if pos == 0 {
            for leaf in self.nodes[1..].iter().map(|n| n.label) {
                out.extend((1..=kp).map(|j| SlotRef { leaf, slot: Slot::Side(label, j) }));
                out.push(SlotRef { leaf, slot: Slot::Star });
            }
        } else {
            out.extend((1..=kp).map(|j| SlotRef { leaf: label, slot: Slot::Side(label, j) }));
            out.push(SlotRef { leaf: label, slot: Slot::Star });
        }
        let i = pos + 1;
        for later in &self.nodes[pos + 1..] {
            out.push(SlotRef { leaf: later.label, slot: Slot::Side(later.label, i) });
        }
        out
    }

    /// `(node position, slot)` for every satisfaction obligation. Obligations whose
    /// slot index exceeds `k'` cannot be met and are reported with `None`.
    pub fn obligations(&self) -> Vec<(usize, Option<SlotRef>)> {
        let kp = k_prime(self.k);
        let mut out = Vec::new();
        for (pos, n) in self.nodes.iter().enumerate() {
            for r in self.required_arrays(n.label) {
                let ok = !matches!(r.slot, Slot::Side(_, j) if j > kp);
                out.push((pos, ok.then_some(r)));
            }
        }
        out
    }

    /// `π(H)`: `pi[old] = new` for every label in `1..=2k'` (index 0 unused).
    pub fn permute(&self, pi: &[Label]) -> Self {
        Configuration {
            k: self.k,
            nodes: self.nodes.iter().map(|n| Node { label: pi[n.label as usize], stack: n.stack.clone() }).collect(),
            edges: self.edges.iter().map(|e| e.relabel(pi)).collect(),
        }
    }

    /// Relabels nodes `1..=t` in `≺` order and normalizes edge ends.
    ///
    /// Returns the canonical form and the permutation of `[2k']` used; labels
    /// not in the configuration are mapped to the remaining values in order.
    pub fn canonicalize(&self) -> (Self, Vec<Label>) {
        let nl = num_labels(self.k);
        let mut pi = vec![0 as Label; nl + 1];
        let mut used = vec![false; nl + 1];
        for (i, n) in self.nodes.iter().enumerate() {
            pi[n.label as usize] = (i + 1) as Label;
            used[n.label as usize] = true;
        }
        let mut next = self.nodes.len() as Label + 1;
        for l in 1..=nl {
            if !used[l] {
                pi[l] = next;
                next += 1;
            }
        }
        let mut c = self.permute(&pi);
        c.edges = c.edges.into_iter().map(EdgeConstraint::normalized).collect();
        (c, pi)
    }

    pub fn canonical(&self) -> Self {
        self.canonicalize().0
    }

    pub fn equivalent(&self, other: &Self) -> bool
    where
        T: PartialEq,
    {
        self.k == other.k && self.canonical() == other.canonical()
    }

    /// Smallest label not in use.
    pub fn fresh_label(&self) -> Option<Label> {
        (1..=num_labels(self.k) as Label).find(|l| self.position(*l).is_none())
    }

    pub fn map_slots<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> Configuration<U> {
        Configuration { k: self.k, nodes: self.nodes.clone(), edges: self.edges.iter().map(|e| e.map(&mut f)).collect() }
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut Vec<Node> {
        &mut self.nodes
    }

    pub(crate) fn edges_mut(&mut self) -> &mut Vec<EdgeConstraint<T>> {
        &mut self.edges
    }
}

impl ConcreteConfig {
    /// Every stack satisfies every array in its required set.
    pub fn is_edge_satisfying(&self, inst: &OvInstance) -> bool {
        let m = self.k - 1;
        self.obligations().into_iter().all(|(pos, r)| match r {
            None => false,
            Some(r) => {
                let s = &self.nodes[pos].stack;
                s.len() <= m && satisfies_unchecked(s, self.slot_value(r), inst)
            }
        })
    }

    /// Edge-satisfying and the root stack holds at least `(k-2)/2` vectors.
    pub fn is_valid(&self, inst: &OvInstance) -> bool {
        self.root_large_enough() && self.is_edge_satisfying(inst)
    }
}

/// Free-function form of [`Configuration::required_arrays`].
pub fn required_arrays<T: Clone>(h: &Configuration<T>, label: Label) -> Vec<SlotRef> {
    h.required_arrays(label)
}

pub fn is_valid(h: &ConcreteConfig, inst: &OvInstance) -> bool {
    h.is_valid(inst)
}

pub fn canonicalize<T: Clone>(h: &Configuration<T>) -> (Configuration<T>, Vec<Label>) {
    h.canonicalize()
}

impl<T: fmt::Display + Clone> fmt::Display for Configuration<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.nodes.iter().map(|n| format!("{}:{}", n.label, n.stack)).collect();
        write!(f, "[{}]", parts.join(" < "))?;
        for e in &self.edges {
            let side = |v: &Vec<T>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            write!(f, " {{{}-{}: {} | {} | *{}}}", e.ends[0], e.ends[1], side(&e.sides[0]), side(&e.sides[1]), e.star)?;
        }
        Ok(())
    }
}
