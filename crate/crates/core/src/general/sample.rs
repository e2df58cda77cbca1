//! Random valid configurations and vertex counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ops::{apply_full_op, Deletion, FullOp, Insertion};
use super::{k_prime, min_root, num_labels, ConcreteConfig, Configuration, EdgeConstraint, Node, SlotRef};
use crate::ov::{OvError, OvInstance};
use crate::stack::{common_coord_array, CoordArray, Stack};

/// A random valid size-k configuration. Each slot gets a common array of the
/// (at most two) stacks it constrains, which exists whenever those stacks
/// contain no k orthogonal vectors.
pub fn random_valid_configuration(inst: &OvInstance, seed: u64, retries: usize) -> Result<ConcreteConfig, OvError> {
    let k = inst.k();
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..retries.max(1) {
        let t = rng.gen_range(1..=k_prime(k).min(k));
        let spare = k - t - min_root(k);
        let mut sizes = vec![0usize; t];
        sizes[0] = min_root(k);
        for _ in 0..spare {
            let i = rng.gen_range(0..t);
            sizes[i] += 1;
        }
        let mut labels: Vec<u8> = (1..=num_labels(k) as u8).collect();
        labels.shuffle(&mut rng);
        let nodes: Vec<Node> = (0..t)
            .map(|i| Node { label: labels[i], stack: Stack::from_slice(&(0..sizes[i]).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>()) })
            .collect();
        let edges = (1..t).map(|i| EdgeConstraint::uniform(labels[0], labels[i], k, CoordArray::default())).collect();
        let mut c = Configuration::from_parts(k, nodes, edges).expect("well formed");
        if let Some(c) = fill_common(&mut c, inst) {
            if c.is_valid(inst) {
                return Ok(c);
            }
        }
    }
    Err(OvError::GenerationFailed(format!("no valid configuration after {retries} attempts")))
}

fn fill_common(c: &mut ConcreteConfig, inst: &OvInstance) -> Option<ConcreteConfig> {
    let mut owners: std::collections::BTreeMap<SlotRef, Vec<usize>> = c.all_slots().into_iter().map(|r| (r, Vec::new())).collect();
    for (pos, r) in c.obligations() {
        owners.get_mut(&r?)?.push(pos);
    }
    for (r, pos) in owners {
        let s = &c.nodes()[pos.first().copied().unwrap_or(0)].stack;
        let t = &c.nodes()[pos.get(1).copied().unwrap_or(pos.first().copied().unwrap_or(0))].stack;
        *c.slot_value_mut(r) = common_coord_array(s, t, inst).ok()?;
    }
    Some(c.clone())
}

/// Every valid full operation on `h` that inserts an existing vector or a
/// node whose constraint is filled with common arrays of the stacks it will
/// constrain (before or after the flip). Not exhaustive over constraints.
pub fn valid_full_ops(h: &ConcreteConfig, inst: &OvInstance) -> Vec<FullOp<CoordArray>> {
    let k = h.k();
    let mut insertions = Vec::new();
    for node in h.labels() {
        for b in 0..inst.n() {
            insertions.push(Insertion::Vector { node, b });
        }
    }
    if let Some(label) = h.fresh_label() {
        for second_largest in [false, true] {
            let blank = EdgeConstraint::uniform(label, h.root(), k, CoordArray::uniform(0, k - 1));
            let ins = Insertion::Node { label, second_largest, constraint: blank };
            let Ok(mid) = h.insert(&ins) else { continue };
            let mut fills = Vec::new();
            for pre in std::iter::once(mid.clone()).chain(mid.flip().ok()) {
                let mut c = pre.clone();
                if fill_leaf(&mut c, label, inst).is_some() {
                    fills.push(c.edge_of(label).unwrap().clone());
                }
            }
            fills.dedup();
            for constraint in fills {
                insertions.push(Insertion::Node { label, second_largest, constraint });
            }
        }
    }
    let mut out = Vec::new();
    for insertion in insertions {
        let Ok(mid) = h.insert(&insertion) else { continue };
        for flip in [false, true] {
            for nd in mid.nodes() {
                for deletion in [Deletion::Vector { node: nd.label }, Deletion::Node { label: nd.label }] {
                    let op = FullOp { insertion: insertion.clone(), flip, deletion };
                    if apply_full_op(h, &op, inst).is_ok() {
                        out.push(op);
                    }
                }
            }
        }
    }
    out
}

fn fill_leaf(c: &mut ConcreteConfig, leaf: super::Label, inst: &OvInstance) -> Option<()> {
    let mut owners: std::collections::BTreeMap<SlotRef, Vec<usize>> = std::collections::BTreeMap::new();
    for (pos, r) in c.obligations() {
        let Some(r) = r else { continue };
        if r.leaf == leaf {
            owners.entry(r).or_default().push(pos);
        }
    }
    for (r, pos) in owners {
        let s = &c.nodes()[pos[0]].stack;
        let t = &c.nodes()[*pos.get(1).unwrap_or(&pos[0])].stack;
        *c.slot_value_mut(r) = common_coord_array(s, t, inst).ok()?;
    }
    Some(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexCount {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// Labeled ordered stars, `sum_t (2k')!/(2k'-t)!`.
    pub labeled_orders: u128,
    /// Exponent of `d` if every slot were a single coordinate: `(k'-1)(2k'+1)`.
    pub slot_exponent: usize,
    /// Exponent of `d` with slots in `[d]^{k-1}`: `(k-1)(k'-1)(2k'+1)`.
    pub array_exponent: usize,
    /// Upper bound counting every skeleton with every slot free.
    pub bound: f64,
    /// Same bound with slots drawn from a universe of the given size.
    pub universe_size: usize,
    pub universe_bound: f64,
    /// Exact count of valid labeled configurations over the universe.
    pub exact: Option<u128>,
}

/// Skeleton-by-skeleton upper bound on valid size-k configurations, and an
/// exact count when `universe` is given.
pub fn count_vertices_bound(inst: &OvInstance, universe: Option<&[CoordArray]>) -> VertexCount {
    let k = inst.k();
    let (n, d) = (inst.n(), inst.d());
    let kp = k_prime(k);
    let nl = num_labels(k) as u128;
    let per_edge = 2 * kp + 1;
    let usize_ = universe.map(|u| u.len()).unwrap_or(0);
    let mut labeled_orders = 0u128;
    let mut bound = 0f64;
    let mut ubound = 0f64;
    for t in 1..=kp.min(k) {
        let orders: u128 = (0..t as u128).map(|i| nl - i).product();
        labeled_orders += orders;
        let fillings = compositions_with_root(k - t, t, min_root(k)) as f64 * (n as f64).powi((k - t) as i32);
        let slots = (per_edge * (t - 1)) as i32;
        bound += orders as f64 * fillings * (d as f64).powi((k - 1) as i32 * slots);
        ubound += orders as f64 * fillings * (usize_ as f64).powi(slots);
    }
    VertexCount {
        k,
        n,
        d,
        labeled_orders,
        slot_exponent: (kp - 1) * per_edge,
        array_exponent: (k - 1) * (kp - 1) * per_edge,
        bound,
        universe_size: usize_,
        universe_bound: ubound,
        exact: universe.map(|u| super::explicit::count_valid_labeled(inst, u)),
    }
}

/// Ways to split `total` vectors over `t` ordered stacks with the first holding at least `min_first`.
fn compositions_with_root(total: usize, t: usize, min_first: usize) -> u128 {
    if total < min_first {
        return 0;
    }
    let rest = total - min_first;
    // stars and bars: rest items into t bins
    binom((rest + t - 1) as u128, (t - 1) as u128)
}

fn binom(n: u128, r: u128) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}
