//! Stacks of vector indices, k-coordinate arrays, and the satisfaction relation.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::ov::{ind, OvError, OvInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StackError {
    #[error("stack of length {len} exceeds k-1 = {max}")]
    StackTooLong { len: usize, max: usize },
    #[error("coordinate array has length {len}, expected {expected}")]
    BadArrayLength { len: usize, expected: usize },
    #[error("vector index {index} out of range for n = {n}")]
    VectorOutOfRange { index: usize, n: usize },
    #[error("coordinate {coord} out of range for d = {d}")]
    CoordOutOfRange { coord: usize, d: usize },
    #[error(transparent)]
    Ov(#[from] OvError),
}

/// Ordered tuple of vector indices, bottom first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stack(pub SmallVec<[u32; 8]>);

impl Stack {
    pub fn new() -> Self {
        Stack(SmallVec::new())
    }

    pub fn from_slice(items: &[usize]) -> Self {
        Stack(items.iter().map(|&i| i as u32).collect())
    }

    pub fn push(&mut self, b: usize) {
        self.0.push(b as u32);
    }

    /// `S + b`.
    pub fn pushed(&self, b: usize) -> Self {
        let mut s = self.clone();
        s.push(b);
        s
    }

    /// The stack with its top element removed; the empty stack stays empty.
    pub fn popped(&self) -> Self {
        let mut s = self.clone();
        s.0.pop();
        s
    }

    pub fn top(&self) -> Option<usize> {
        self.0.last().map(|&i| i as usize)
    }

    /// Bottom `len` entries.
    pub fn substack(&self, len: usize) -> Self {
        Stack(self.0[..len.min(self.0.len())].iter().copied().collect())
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i as usize).collect()
    }

    /// True if `prefix` equals the bottom `prefix.len()` entries.
    pub fn has_prefix(&self, prefix: &[u32]) -> bool {
        self.0.len() >= prefix.len() && &self.0[..prefix.len()] == prefix
    }
}

impl Deref for Stack {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `S ∘ T`.
pub fn concat(s: &Stack, t: &Stack) -> Stack {
    let mut out = s.clone();
    out.0.extend_from_slice(&t.0);
    out
}

/// Element of `[d]^{k-1}`, stored 0-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoordArray(pub SmallVec<[u8; 8]>);

impl CoordArray {
    pub fn from_slice(coords: &[usize]) -> Self {
        CoordArray(coords.iter().map(|&c| c as u8).collect())
    }

    /// Builds from 1-based coordinates, as printed.
    pub fn from_one_based(coords: &[usize]) -> Self {
        CoordArray(coords.iter().map(|&c| (c - 1) as u8).collect())
    }

    pub fn uniform(c: usize, len: usize) -> Self {
        CoordArray(std::iter::repeat(c as u8).take(len).collect())
    }

    /// Mixed-radix rank in `[d]^{len}`, first coordinate least significant.
    pub fn rank(&self, d: usize) -> usize {
        self.0.iter().rev().fold(0usize, |acc, &c| acc * d + c as usize)
    }

    pub fn unrank(mut r: usize, d: usize, len: usize) -> Self {
        let mut v = SmallVec::new();
        for _ in 0..len {
            v.push((r % d) as u8);
            r /= d;
        }
        CoordArray(v)
    }
}

impl Deref for CoordArray {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for CoordArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// All of `[d]^{len}` in rank order.
pub fn all_arrays(d: usize, len: usize) -> impl Iterator<Item = CoordArray> {
    let total = d.pow(len as u32);
    (0..total).map(move |r| CoordArray::unrank(r, d, len))
}

fn check(stack: &Stack, x: &CoordArray, inst: &OvInstance) -> Result<(), StackError> {
    let max = inst.k() - 1;
    if x.len() != max {
        return Err(StackError::BadArrayLength { len: x.len(), expected: max });
    }
    if stack.len() > max {
        return Err(StackError::StackTooLong { len: stack.len(), max });
    }
    if let Some(&a) = stack.iter().find(|&&a| a as usize >= inst.n()) {
        return Err(StackError::VectorOutOfRange { index: a as usize, n: inst.n() });
    }
    if let Some(&c) = x.iter().find(|&&c| c as usize >= inst.d()) {
        return Err(StackError::CoordOutOfRange { coord: c as usize, d: inst.d() });
    }
    Ok(())
}

/// Does `S` satisfy `x`?
///
/// Equivalent chain-free criterion: letting `Z_h` be the positions `i` with
/// `a_h[x[i]] = 0`, the stack satisfies `x` iff `|Z_1 ∪ … ∪ Z_h| <= h - 1`
/// for every `h`.
pub fn satisfies(stack: &Stack, x: &CoordArray, inst: &OvInstance) -> Result<bool, StackError> {
    check(stack, x, inst)?;
    Ok(satisfies_unchecked(stack, x, inst))
}

#[inline]
pub(crate) fn satisfies_unchecked(stack: &[u32], x: &[u8], inst: &OvInstance) -> bool {
    let mut zeros = 0u32;
    for (h, &a) in stack.iter().enumerate() {
        let v = inst.vector(a as usize);
        for (i, &c) in x.iter().enumerate() {
            if !v.get(c as usize) {
                zeros |= 1 << i;
            }
        }
        if zeros.count_ones() as usize > h {
            return false;
        }
    }
    true
}

/// Literal search for a chain `[k-1] = I_1 ⊃ … ⊃ I_s` with `|I_h| = k-h`.
pub fn satisfies_bruteforce(stack: &Stack, x: &CoordArray, inst: &OvInstance) -> Result<bool, StackError> {
    check(stack, x, inst)?;
    let m = inst.k() - 1;
    let full = (1u32 << m) - 1;
    Ok(stack.is_empty() || chain(stack, x, inst, 0, full))
}

fn chain(stack: &Stack, x: &CoordArray, inst: &OvInstance, h: usize, set: u32) -> bool {
    let v = inst.vector(stack[h] as usize);
    let ok = (0..x.len()).filter(|i| set >> i & 1 == 1).all(|i| v.get(x[i] as usize));
    if !ok {
        return false;
    }
    if h + 1 == stack.len() {
        return true;
    }
    (0..x.len())
        .filter(|i| set >> i & 1 == 1)
        .any(|i| chain(stack, x, inst, h + 1, set & !(1 << i)))
}

/// A coordinate array satisfied by both stacks: `x[l] = ind(a_1..a_{k-l}, b_1..b_l)`,
/// where entries beyond a stack's length are skipped.
pub fn common_coord_array(s: &Stack, t: &Stack, inst: &OvInstance) -> Result<CoordArray, StackError> {
    let m = inst.k() - 1;
    for st in [s, t] {
        if st.len() > m {
            return Err(StackError::StackTooLong { len: st.len(), max: m });
        }
    }
    let mut coords = SmallVec::new();
    for l in 1..=m {
        let mut idx: Vec<usize> = s.iter().take(m + 1 - l).map(|&a| a as usize).collect();
        idx.extend(t.iter().take(l).map(|&b| b as usize));
        coords.push(ind(inst, &idx)? as u8);
    }
    Ok(CoordArray(coords))
}

/// Whether `(a_1..a_j)` and `(a_k..a_{j+1})` both satisfy `x`.
///
/// Stacks longer than `k-1` (only at `j = 0` or `j = k`) satisfy nothing.
pub fn yes1_conflict(j: usize, tuple: &[usize], x: &CoordArray, inst: &OvInstance) -> bool {
    let k = tuple.len();
    let left = Stack::from_slice(&tuple[..j]);
    let right: Stack = Stack::from_slice(&tuple[j..].iter().rev().copied().collect::<Vec<_>>());
    let sat = |s: &Stack| s.len() < k && satisfies_unchecked(s, x, inst);
    sat(&left) && sat(&right)
}
