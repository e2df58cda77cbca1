//! Half-operations, full operations and their inverses.

use serde::{Deserialize, Serialize};

use super::{Configuration, EdgeConstraint, Label, Node};
use crate::ov::OvInstance;
use crate::stack::{CoordArray, Stack};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Insertion<T> {
    /// Push vector `b` onto the stack at `node`.
    Vector { node: Label, b: usize },
    /// Add an empty leaf `label` joined to the root by `constraint`, as the
    /// largest node or, with `second_largest`, just below the current largest.
    Node { label: Label, second_largest: bool, constraint: EdgeConstraint<T> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Deletion {
    Vector { node: Label },
    Node { label: Label },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FullOp<T> {
    pub insertion: Insertion<T>,
    pub flip: bool,
    pub deletion: Deletion,
}

/// One step of a path in the configuration graph. `Flip` is a weight-0 edge
/// between two size-k configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStep<T> {
    Op(FullOp<T>),
    Flip,
}

impl<T> PathStep<T> {
    pub fn weight(&self) -> usize {
        match self {
            PathStep::Op(_) => 1,
            PathStep::Flip => 0,
        }
    }
}

impl<T: Clone> Insertion<T> {
    /// The same insertion after relabeling by `pi` (`pi[old] = new`).
    pub fn permute(&self, pi: &[Label]) -> Self {
        match self {
            Insertion::Vector { node, b } => Insertion::Vector { node: pi[*node as usize], b: *b },
            Insertion::Node { label, second_largest, constraint } => Insertion::Node {
                label: pi[*label as usize],
                second_largest: *second_largest,
                constraint: constraint.relabel(pi),
            },
        }
    }
}

impl Deletion {
    pub fn permute(&self, pi: &[Label]) -> Self {
        match self {
            Deletion::Vector { node } => Deletion::Vector { node: pi[*node as usize] },
            Deletion::Node { label } => Deletion::Node { label: pi[*label as usize] },
        }
    }
}

impl<T: Clone> FullOp<T> {
    pub fn permute(&self, pi: &[Label]) -> Self {
        FullOp { insertion: self.insertion.permute(pi), flip: self.flip, deletion: self.deletion.permute(pi) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error("illegal half-operation: {0}")]
    IllegalHalfOp(String),
    #[error("invalid intermediate configuration at stage {stage}")]
    InvalidIntermediate { stage: usize },
}

fn illegal<R>(msg: String) -> Result<R, OpError> {
    Err(OpError::IllegalHalfOp(msg))
}

impl<T: Clone> Configuration<T> {
    pub fn insert(&self, ins: &Insertion<T>) -> Result<Self, OpError> {
        let mut h = self.clone();
        match ins {
            Insertion::Vector { node, b } => {
                let Some(p) = h.position(*node) else { return illegal(format!("no node {node}")) };
                h.nodes_mut()[p].stack.push(*b);
            }
            Insertion::Node { label, second_largest, constraint } => {
                let nl = super::num_labels(h.k()) as Label;
                if *label == 0 || *label > nl || h.position(*label).is_some() {
                    return illegal(format!("label {label} is not fresh"));
                }
                let root = h.root();
                if !(constraint.joins(*label) && constraint.joins(root)) || constraint.ends[0] == constraint.ends[1] {
                    return illegal(format!("constraint must join {label} and the root {root}"));
                }
                let kp = super::k_prime(h.k());
                if constraint.sides[0].len() != kp || constraint.sides[1].len() != kp {
                    return illegal("constraint has the wrong number of slots".into());
                }
                let t = h.num_nodes();
                let pos = if *second_largest {
                    if t < 2 {
                        return illegal("second-largest insertion needs two nodes".into());
                    }
                    t - 1
                } else {
                    t
                };
                h.nodes_mut().insert(pos, Node { label: *label, stack: Stack::new() });
                h.edges_mut().insert(pos - 1, constraint.clone());
            }
        }
        Ok(h)
    }

    pub fn delete(&self, del: &Deletion) -> Result<Self, OpError> {
        let mut h = self.clone();
        match del {
            Deletion::Vector { node } => {
                let Some(p) = h.position(*node) else { return illegal(format!("no node {node}")) };
                if h.nodes()[p].stack.is_empty() {
                    return illegal(format!("stack at {node} is empty"));
                }
                h.nodes_mut()[p].stack.0.pop();
            }
            Deletion::Node { label } => {
                let Some(p) = h.position(*label) else { return illegal(format!("no node {label}")) };
                let t = h.num_nodes();
                if p == 0 {
                    return illegal("the root cannot be deleted".into());
                }
                if !h.nodes()[p].stack.is_empty() {
                    return illegal(format!("node {label} is not empty"));
                }
                if p + 2 < t {
                    return illegal(format!("node {label} is neither largest nor second-largest"));
                }
                h.nodes_mut().remove(p);
                h.edges_mut().remove(p - 1);
            }
        }
        Ok(h)
    }

    /// Swaps the two nodes of a two-node configuration with equal stack sizes.
    pub fn flip(&self) -> Result<Self, OpError> {
        if self.num_nodes() != 2 {
            return illegal("flip needs exactly two nodes".into());
        }
        if self.nodes()[0].stack.len() != self.nodes()[1].stack.len() {
            return illegal("flip needs equal stack sizes".into());
        }
        let mut h = self.clone();
        h.nodes_mut().swap(0, 1);
        Ok(h)
    }

    /// Configurations passed through by `op`: start, after insertion, after
    /// the flip (if any), and the end. Only half-operation legality is checked.
    pub fn trace(&self, op: &FullOp<T>) -> Result<Vec<Self>, OpError> {
        let mut out = vec![self.clone()];
        let mid = self.insert(&op.insertion)?;
        out.push(mid);
        if op.flip {
            let f = out.last().unwrap().flip()?;
            out.push(f);
        }
        let end = out.last().unwrap().delete(&op.deletion)?;
        out.push(end);
        Ok(out)
    }
}

/// Applies `op` and checks that every configuration along the way is valid and
/// that the start or the end has at least two nodes.
pub fn apply_full_op(
    h: &Configuration<CoordArray>,
    op: &FullOp<CoordArray>,
    inst: &OvInstance,
) -> Result<Configuration<CoordArray>, OpError> {
    let tr = h.trace(op)?;
    for (stage, c) in tr.iter().enumerate() {
        if !c.is_valid(inst) {
            return Err(OpError::InvalidIntermediate { stage });
        }
    }
    let end = tr.last().unwrap();
    if h.num_nodes() < 2 && end.num_nodes() < 2 {
        return Err(OpError::InvalidIntermediate { stage: tr.len() - 1 });
    }
    Ok(end.clone())
}

/// The operation taking `op`'s result back to `h`.
pub fn inverse_full_op<T: Clone>(h: &Configuration<T>, op: &FullOp<T>) -> Result<FullOp<T>, OpError> {
    let tr = h.trace(op)?;
    let before_del = &tr[tr.len() - 2];
    let insertion = match op.deletion {
        Deletion::Vector { node } => {
            let b = before_del.stack(node).and_then(|s| s.top()).expect("deletion was legal");
            Insertion::Vector { node, b }
        }
        Deletion::Node { label } => {
            let p = before_del.position(label).expect("deletion was legal");
            let second_largest = p + 2 == before_del.num_nodes();
            Insertion::Node { label, second_largest, constraint: before_del.edges()[p - 1].clone() }
        }
    };
    let deletion = match &op.insertion {
        Insertion::Vector { node, .. } => Deletion::Vector { node: *node },
        Insertion::Node { label, .. } => Deletion::Node { label: *label },
    };
    Ok(FullOp { insertion, flip: op.flip, deletion })
}

/// Replays a path from `h`, validating each step. Flip steps require both
/// endpoints to be valid.
pub fn replay_path(
    h: &Configuration<CoordArray>,
    path: &[PathStep<CoordArray>],
    inst: &OvInstance,
) -> Result<Vec<Configuration<CoordArray>>, (usize, OpError)> {
    let mut out = vec![h.clone()];
    for (i, step) in path.iter().enumerate() {
        let cur = out.last().unwrap();
        let next = match step {
            PathStep::Op(op) => apply_full_op(cur, op, inst).map_err(|e| (i, e))?,
            PathStep::Flip => {
                let f = cur.flip().map_err(|e| (i, e))?;
                if !cur.is_valid(inst) || !f.is_valid(inst) {
                    return Err((i, OpError::InvalidIntermediate { stage: 1 }));
                }
                f
            }
        };
        out.push(next);
    }
    Ok(out)
}
