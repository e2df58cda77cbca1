//! Size-only search behind the lower bound on removing a root that has an
//! empty leaf: how many full operations until the root `v'` is gone while a
//! fixed leaf `v` survives.
//!
//! Only conditions that depend on stack sizes are enforced (half-operation
//! legality, the root bound, the two-node rule), so the search runs over a
//! superset of the valid moves and its minimum is a lower bound.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{min_root, num_labels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    /// The root being removed.
    Target,
    /// The leaf that must survive.
    Kept,
    Other,
}

/// Node roles and stack sizes in `≺` order.
pub type Shape = Vec<(Role, u8)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeletionCounts {
    pub vector_deletions: usize,
    pub node_deletions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootRemoval {
    pub start: Shape,
    pub min_ops: Option<usize>,
    pub deletions: DeletionCounts,
}

#[derive(Clone, Copy)]
enum Del {
    Vector,
    Node,
}

fn ok_root(k: usize, s: &Shape) -> bool {
    s[0].1 as usize >= min_root(k)
}

fn step(k: usize, s: &Shape) -> Vec<(Shape, Del)> {
    let t = s.len();
    let mut mids = Vec::new();
    for i in 0..t {
        let mut m = s.clone();
        m[i].1 += 1;
        mids.push(m);
    }
    if t < num_labels(k) {
        let mut m = s.clone();
        m.push((Role::Other, 0));
        mids.push(m);
        if t >= 2 {
            let mut m = s.clone();
            m.insert(t - 1, (Role::Other, 0));
            mids.push(m);
        }
    }
    let mut pres = Vec::new();
    for m in mids {
        if !ok_root(k, &m) {
            continue;
        }
        if m.len() == 2 && m[0].1 == m[1].1 {
            let mut f = m.clone();
            f.swap(0, 1);
            if ok_root(k, &f) {
                pres.push(f);
            }
        }
        pres.push(m);
    }
    let mut out = Vec::new();
    for p in pres {
        let tp = p.len();
        for i in 0..tp {
            if p[i].1 > 0 {
                let mut e = p.clone();
                e[i].1 -= 1;
                out.push((e, Del::Vector));
            } else if i > 0 && i + 2 >= tp && p[i].0 != Role::Kept {
                let mut e = p.clone();
                e.remove(i);
                out.push((e, Del::Node));
            }
        }
    }
    out.retain(|(e, _)| ok_root(k, e) && (s.len() >= 2 || e.len() >= 2));
    out
}

/// Weight-0 flip of a two-node shape with equal stacks.
fn free_flip(k: usize, s: &Shape) -> Option<Shape> {
    if s.len() == 2 && s[0].1 == s[1].1 {
        let mut f = s.clone();
        f.swap(0, 1);
        ok_root(k, &f).then_some(f)
    } else {
        None
    }
}

/// Fewest full operations from `start` to a shape without the `Target` node.
/// Size-k flips cost nothing.
pub fn min_ops_to_remove_root(k: usize, start: &Shape, limit: usize) -> RootRemoval {
    // predecessor and whether the step was a node deletion; `None` marks a flip
    let mut prev: HashMap<Shape, Option<(Shape, Option<bool>)>> = HashMap::new();
    let mut dist: HashMap<Shape, usize> = HashMap::new();
    dist.insert(start.clone(), 0);
    prev.insert(start.clone(), None);
    let mut q = VecDeque::from([(start.clone(), 0usize)]);
    while let Some((s, ds)) = q.pop_front() {
        if dist[&s] < ds {
            continue;
        }
        if !s.iter().any(|(r, _)| *r == Role::Target) {
            let mut counts = DeletionCounts::default();
            let mut cur = s.clone();
            while let Some(Some((p, kind))) = prev.get(&cur).cloned() {
                match kind {
                    Some(true) => counts.node_deletions += 1,
                    Some(false) => counts.vector_deletions += 1,
                    None => {}
                }
                cur = p;
            }
            return RootRemoval { start: start.clone(), min_ops: Some(ds), deletions: counts };
        }
        let mut moves: Vec<(Shape, usize, Option<bool>)> = Vec::new();
        if let Some(f) = free_flip(k, &s) {
            moves.push((f, 0, None));
        }
        if ds < limit {
            moves.extend(step(k, &s).into_iter().map(|(e, del)| (e, 1, Some(matches!(del, Del::Node)))));
        }
        for (e, w, kind) in moves {
            let nd = ds + w;
            if dist.get(&e).is_none_or(|&old| nd < old) {
                dist.insert(e.clone(), nd);
                prev.insert(e.clone(), Some((s.clone(), kind)));
                if w == 0 {
                    q.push_front((e, nd));
                } else {
                    q.push_back((e, nd));
                }
            }
        }
    }
    RootRemoval { start: start.clone(), min_ops: None, deletions: DeletionCounts::default() }
}

/// Every size-k shape whose root is `Target` and which has an empty leaf `Kept`.
pub fn scenario_shapes(k: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    let tmax = super::k_prime(k).min(k);
    for t in 2..=tmax {
        let vecs = k - t;
        let mut sizes = vec![0u8; t];
        rec(vecs, 0, &mut sizes, &mut |sz| {
            if (sz[0] as usize) < min_root(k) {
                return;
            }
            for kept in 1..t {
                if sz[kept] != 0 {
                    continue;
                }
                let shape: Shape = (0..t)
                    .map(|i| (if i == 0 { Role::Target } else if i == kept { Role::Kept } else { Role::Other }, sz[i]))
                    .collect();
                out.push(shape);
            }
        });
    }
    out
}

fn rec(left: usize, i: usize, sizes: &mut Vec<u8>, f: &mut impl FnMut(&[u8])) {
    if i + 1 == sizes.len() {
        sizes[i] = left as u8;
        f(sizes);
        return;
    }
    for s in 0..=left {
        sizes[i] = s as u8;
        rec(left - s, i + 1, sizes, f);
    }
}

/// Minimum over all scenario shapes of the operations needed.
pub fn min_over_scenarios(k: usize) -> Option<usize> {
    scenario_shapes(k).iter().filter_map(|s| min_ops_to_remove_root(k, s, 4 * k).min_ops).min()
}
