//! Explicit enumeration of valid configurations over a small set of allowed
//! coordinate arrays, and breadth-first search in the explicit graph.

use std::collections::{HashMap, VecDeque};

use super::ops::{Deletion, Insertion};
use super::{k_prime, min_root, num_labels, ConcreteConfig, Configuration, EdgeConstraint, Node};
use crate::ov::OvInstance;
use crate::stack::{satisfies_unchecked, CoordArray, Stack};

/// Node stacks of every size-k skeleton meeting the root bound, root first.
pub fn skeletons(k: usize, n: usize) -> Vec<Vec<Stack>> {
    let mut out = Vec::new();
    for t in 1..=k_prime(k).min(k) {
        let total = k - t;
        let mut sizes = vec![0usize; t];
        compositions(total, 0, &mut sizes, &mut |sz| {
            if sz[0] < min_root(k) {
                return;
            }
            fill_stacks(sz, n, &mut Vec::new(), &mut out);
        });
    }
    out
}

fn compositions(left: usize, i: usize, sizes: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if i + 1 == sizes.len() {
        sizes[i] = left;
        f(sizes);
        return;
    }
    for s in 0..=left {
        sizes[i] = s;
        compositions(left - s, i + 1, sizes, f);
    }
}

fn fill_stacks(sizes: &[usize], n: usize, acc: &mut Vec<Stack>, out: &mut Vec<Vec<Stack>>) {
    if acc.len() == sizes.len() {
        out.push(acc.clone());
        return;
    }
    let len = sizes[acc.len()];
    let total = n.pow(len as u32);
    for mut code in 0..total {
        let mut s = Stack::new();
        for _ in 0..len {
            s.push(code % n);
            code /= n;
        }
        acc.push(s);
        fill_stacks(sizes, n, acc, out);
        acc.pop();
    }
}

/// Canonical configuration for a skeleton, every slot set to `fill`.
pub fn skeleton_config<T: Clone>(k: usize, stacks: &[Stack], fill: T) -> Configuration<T> {
    let nodes = stacks.iter().enumerate().map(|(i, s)| Node { label: (i + 1) as u8, stack: s.clone() }).collect();
    let edges = (2..=stacks.len()).map(|i| EdgeConstraint::uniform(1, i as u8, k, fill.clone())).collect();
    Configuration::from_parts(k, nodes, edges).expect("skeletons are well formed")
}

/// For each slot of the skeleton, the universe indices every obligated stack
/// satisfies. `None` if some obligation is impossible.
pub fn allowed_slots(inst: &OvInstance, stacks: &[Stack], universe: &[CoordArray]) -> Option<Vec<(super::SlotRef, Vec<usize>)>> {
    let k = inst.k();
    let c = skeleton_config(k, stacks, ());
    let mut allowed: HashMap<super::SlotRef, Vec<usize>> =
        c.all_slots().into_iter().map(|r| (r, (0..universe.len()).collect())).collect();
    for (pos, r) in c.obligations() {
        let r = r?;
        let s = &c.nodes()[pos].stack;
        if s.len() > k - 1 {
            return None;
        }
        allowed.get_mut(&r).unwrap().retain(|&i| satisfies_unchecked(s, &universe[i], inst));
    }
    let mut out: Vec<_> = allowed.into_iter().collect();
    out.sort();
    Some(out)
}

/// Every valid canonical size-k configuration whose slots come from `universe`.
pub fn enumerate_valid(inst: &OvInstance, universe: &[CoordArray]) -> Vec<ConcreteConfig> {
    let k = inst.k();
    let mut out = Vec::new();
    for stacks in skeletons(k, inst.n()) {
        let Some(allowed) = allowed_slots(inst, &stacks, universe) else { continue };
        if allowed.iter().any(|(_, a)| a.is_empty()) {
            continue;
        }
        let blank = skeleton_config(k, &stacks, CoordArray::default());
        let mut idx = vec![0usize; allowed.len()];
        'outer: loop {
            let mut c = blank.clone();
            for (i, (r, a)) in allowed.iter().enumerate() {
                *c.slot_value_mut(*r) = universe[a[idx[i]]].clone();
            }
            out.push(c);
            for (i, (_, a)) in allowed.iter().enumerate() {
                idx[i] += 1;
                if idx[i] < a.len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
    }
    out
}

/// Number of valid labeled configurations (all label assignments counted)
/// with slots from `universe`.
pub fn count_valid_labeled(inst: &OvInstance, universe: &[CoordArray]) -> u128 {
    let k = inst.k();
    let nl = num_labels(k) as u128;
    let mut total = 0u128;
    for stacks in skeletons(k, inst.n()) {
        let Some(allowed) = allowed_slots(inst, &stacks, universe) else { continue };
        let labelings: u128 = (0..stacks.len() as u128).map(|i| nl - i).product();
        total += labelings * allowed.iter().map(|(_, a)| a.len() as u128).product::<u128>();
    }
    total
}

fn all_constraints(a: u8, b: u8, k: usize, universe: &[CoordArray]) -> Vec<EdgeConstraint<CoordArray>> {
    let slots = 2 * k_prime(k) + 1;
    let u = universe.len();
    let total = u.pow(slots as u32);
    let template = EdgeConstraint::uniform(a, b, k, CoordArray::default());
    let refs = template.slots();
    (0..total)
        .map(|mut code| {
            let mut e = template.clone();
            for s in &refs {
                *e.slot_mut(*s) = universe[code % u].clone();
                code /= u;
            }
            e
        })
        .collect()
}

/// Full-operation neighbours (weight 1) and the flip partner (weight 0) of a
/// valid configuration, canonicalized.
pub fn explicit_neighbors(c: &ConcreteConfig, inst: &OvInstance, universe: &[CoordArray]) -> Vec<(ConcreteConfig, u8)> {
    let k = c.k();
    let mut insertions = Vec::new();
    for node in c.labels() {
        for b in 0..inst.n() {
            insertions.push(Insertion::Vector { node, b });
        }
    }
    if let Some(label) = c.fresh_label() {
        for constraint in all_constraints(label, c.root(), k, universe) {
            insertions.push(Insertion::Node { label, second_largest: false, constraint: constraint.clone() });
            if c.num_nodes() >= 2 {
                insertions.push(Insertion::Node { label, second_largest: true, constraint });
            }
        }
    }
    let mut out = Vec::new();
    for ins in insertions {
        let Ok(mid) = c.insert(&ins) else { continue };
        if !mid.is_valid(inst) {
            continue;
        }
        let flipped = mid.flip().ok().filter(|f| f.is_valid(inst));
        for pre in std::iter::once(&mid).chain(flipped.as_ref()) {
            for nd in pre.nodes() {
                for deletion in [Deletion::Vector { node: nd.label }, Deletion::Node { label: nd.label }] {
                    let Ok(end) = pre.delete(&deletion) else { continue };
                    if (c.num_nodes() >= 2 || end.num_nodes() >= 2) && end.is_valid(inst) {
                        out.push((end.canonical(), 1));
                    }
                }
            }
        }
    }
    if let Ok(f) = c.flip() {
        if c.is_valid(inst) && f.is_valid(inst) {
            out.push((f.canonical(), 0));
        }
    }
    out
}

/// 0/1 breadth-first distances from `start`, up to `max_depth`.
pub fn explicit_distances(
    inst: &OvInstance,
    universe: &[CoordArray],
    start: &ConcreteConfig,
    max_depth: usize,
) -> HashMap<ConcreteConfig, usize> {
    let mut dist: HashMap<ConcreteConfig, usize> = HashMap::new();
    let s = start.canonical();
    dist.insert(s.clone(), 0);
    let mut dq = VecDeque::from([(s, 0usize)]);
    while let Some((c, dc)) = dq.pop_front() {
        if dist[&c] < dc {
            continue;
        }
        for (nb, w) in explicit_neighbors(&c, inst, universe) {
            let nd = dc + w as usize;
            if nd > max_depth {
                continue;
            }
            if dist.get(&nb).is_none_or(|&old| nd < old) {
                dist.insert(nb.clone(), nd);
                if w == 0 {
                    dq.push_front((nb, nd));
                } else {
                    dq.push_back((nb, nd));
                }
            }
        }
    }
    dist
}
