//! Short paths between any two valid configurations when no k vectors are
//! orthogonal.

use super::ops::{inverse_full_op, replay_path, Deletion, FullOp, Insertion, PathStep};
use super::{k_prime, min_root, num_labels, ConcreteConfig, EdgeConstraint, Label};
use crate::ov::OvInstance;
use crate::stack::{common_coord_array, satisfies_unchecked, CoordArray, Stack};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NoCaseError {
    #[error("path construction failed: {0}")]
    PathConstructionFailed(String),
    #[error("no common coordinate array: {0}")]
    NoCommonCoordinate(String),
}

fn fail<R>(msg: impl Into<String>) -> Result<R, NoCaseError> {
    Err(NoCaseError::PathConstructionFailed(msg.into()))
}

/// The joining constraint between root `v1` of `h` and root `v1'` of `hp`.
/// The two configurations must use disjoint labels.
pub fn build_z(h: &ConcreteConfig, hp: &ConcreteConfig, inst: &OvInstance) -> Result<EdgeConstraint<CoordArray>, NoCaseError> {
    let kp = k_prime(h.k());
    let r = &h.nodes()[0].stack;
    let rp = &hp.nodes()[0].stack;
    let cc = |s: &Stack, t: &Stack| {
        let x = common_coord_array(s, t, inst).map_err(|e| NoCaseError::NoCommonCoordinate(e.to_string()))?;
        if !(satisfies_unchecked(s, &x, inst) && satisfies_unchecked(t, &x, inst)) {
            return fail(format!("{x} is not satisfied by {s} and {t}"));
        }
        Ok(x)
    };
    let side = |root: &Stack, other: &ConcreteConfig| -> Result<Vec<CoordArray>, NoCaseError> {
        (1..=kp)
            .map(|i| match other.nodes().get(i - 1) {
                Some(n) => cc(root, &n.stack),
                None => cc(root, root),
            })
            .collect()
    };
    Ok(EdgeConstraint { ends: [h.root(), hp.root()], sides: [side(r, hp)?, side(rp, h)?], star: cc(r, rp)? })
}

/// Operations taking `h` to the two-node configuration rooted at `h`'s root
/// whose leaf is `other_root`, carrying `z`.
fn half_path(h: &ConcreteConfig, other_root: Label, other_stack: &Stack, z: &EdgeConstraint<CoordArray>) -> Vec<FullOp<CoordArray>> {
    let k = h.k();
    let lo = (k - 2) / 2;
    let mut ins = vec![Insertion::Node { label: other_root, second_largest: false, constraint: z.clone() }];
    ins.extend(other_stack.iter().take(lo).map(|&b| Insertion::Vector { node: other_root, b: b as usize }));
    let mut del = Vec::new();
    for n in h.nodes()[1..].iter().rev() {
        del.extend(std::iter::repeat(Deletion::Vector { node: n.label }).take(n.stack.len()));
        del.push(Deletion::Node { label: n.label });
    }
    let root = &h.nodes()[0];
    del.extend(std::iter::repeat(Deletion::Vector { node: root.label }).take(root.stack.len().saturating_sub(min_root(k))));
    ins.into_iter().zip(del).map(|(insertion, deletion)| FullOp { insertion, flip: false, deletion }).collect()
}

/// A path of at most `k` operations (flips weigh zero) from `h` to a
/// configuration equivalent to `hp`. Labels of `hp` are first moved off the
/// labels of `h`; the returned path ends at that relabeled copy.
pub fn no_case_path(h: &ConcreteConfig, hp: &ConcreteConfig, inst: &OvInstance) -> Result<Vec<PathStep<CoordArray>>, NoCaseError> {
    let k = h.k();
    if hp.k() != k || inst.k() != k {
        return fail("mismatched k");
    }
    if h.size() != k || hp.size() != k {
        return fail("both configurations must have size k");
    }
    if !h.is_valid(inst) || !hp.is_valid(inst) {
        return fail("both configurations must be valid");
    }
    let nl = num_labels(k);
    let mut pi: Vec<Label> = vec![0; nl + 1];
    let mut free = (1..=nl as Label).filter(|l| h.position(*l).is_none());
    for l in hp.labels() {
        pi[l as usize] = free.next().expect("at most 2k' labels in use");
    }
    let taken = pi.clone();
    let mut unused = (1..=nl as Label).filter(|l| !taken.contains(l));
    for slot in pi.iter_mut().skip(1) {
        if *slot == 0 {
            *slot = unused.next().unwrap();
        }
    }
    let hp = hp.permute(&pi);

    let z = build_z(h, &hp, inst).map_err(|e| NoCaseError::PathConstructionFailed(e.to_string()))?;
    let fwd = half_path(h, hp.root(), &hp.nodes()[0].stack, &z);
    let back = half_path(&hp, h.root(), &h.nodes()[0].stack, &z);

    let mut path: Vec<PathStep<CoordArray>> = fwd.into_iter().map(PathStep::Op).collect();
    if k % 2 == 0 {
        path.push(PathStep::Flip);
    } else {
        let b = hp.nodes()[0].stack[(k - 2) / 2] as usize;
        path.push(PathStep::Op(FullOp {
            insertion: Insertion::Vector { node: hp.root(), b },
            flip: true,
            deletion: Deletion::Vector { node: h.root() },
        }));
    }
    let mut cur = hp.clone();
    let mut configs = vec![cur.clone()];
    for op in &back {
        cur = cur.trace(op).map_err(|e| NoCaseError::PathConstructionFailed(e.to_string()))?.pop().unwrap();
        configs.push(cur.clone());
    }
    for (i, op) in back.iter().enumerate().rev() {
        let inv = inverse_full_op(&configs[i], op).map_err(|e| NoCaseError::PathConstructionFailed(e.to_string()))?;
        path.push(PathStep::Op(inv));
    }

    let ops = path.iter().map(|s| s.weight()).sum::<usize>();
    if ops > k {
        return fail(format!("{ops} operations exceed k = {k}"));
    }
    let visited = replay_path(h, &path, inst).map_err(|(i, e)| NoCaseError::PathConstructionFailed(format!("step {i}: {e}")))?;
    if !visited.last().unwrap().equivalent(&hp) {
        return fail("path does not end at the target");
    }
    Ok(path)
}
