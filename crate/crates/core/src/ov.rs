//! k-OV instances: bit-vectors, the brute-force orthogonality oracle, the
//! shared-coordinate selector, generators with planted solutions and the
//! plain-text instance format.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported vector dimension (vectors are packed into a `u64`).
pub const MAX_DIM: usize = 64;

/// Default probability that a random coordinate is 1.
pub const DEFAULT_DENSITY: f64 = 0.8;

/// Default number of resampling attempts per generated vector.
pub const DEFAULT_RETRIES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OvError {
    #[error("vectors {0:?} share no all-ones coordinate")]
    NoCommonCoordinate(Vec<usize>),
    #[error("instance generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("malformed instance file: {0}")]
    Parse(String),
}

/// A binary vector of dimension at most [`MAX_DIM`]; bit `c` is coordinate `c`
/// (0-based internally, printed 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVector(pub u64);

impl BitVector {
    pub fn ones(d: usize) -> Self {
        BitVector(full_mask(d))
    }

    #[inline]
    pub fn get(self, coord: usize) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut w = 0u64;
        for (c, &b) in bits.iter().enumerate() {
            if b {
                w |= 1 << c;
            }
        }
        BitVector(w)
    }
}

#[inline]
pub(crate) fn full_mask(d: usize) -> u64 {
    if d >= 64 {
        u64::MAX
    } else {
        (1u64 << d) - 1
    }
}

/// A k-OV instance: `n` vectors of dimension `d` and the reduction parameter `k`.
///
/// Vector indices `0..n` are the identities used everywhere else in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvInstance {
    k: usize,
    d: usize,
    vectors: Vec<BitVector>,
}

impl OvInstance {
    pub fn new(k: usize, d: usize, vectors: Vec<BitVector>) -> Result<Self, OvError> {
        if k < 2 {
            return Err(OvError::Invalid(format!("k must be at least 2, got {k}")));
        }
        if d == 0 || d > MAX_DIM {
            return Err(OvError::Invalid(format!("d must lie in 1..={MAX_DIM}, got {d}")));
        }
        if vectors.is_empty() {
            return Err(OvError::Invalid("an instance needs at least one vector".into()));
        }
        let mask = full_mask(d);
        if let Some(v) = vectors.iter().find(|v| v.0 & !mask != 0) {
            return Err(OvError::Invalid(format!("vector {:#b} has bits beyond d={d}", v.0)));
        }
        Ok(OvInstance { k, d, vectors })
    }

    /// Builds an instance from rows of 0/1 values.
    pub fn from_rows(k: usize, rows: &[&[u8]]) -> Result<Self, OvError> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(OvError::Invalid("rows have different lengths".into()));
        }
        let vectors = rows
            .iter()
            .map(|r| BitVector::from_bits(&r.iter().map(|&b| b != 0).collect::<Vec<_>>()))
            .collect();
        OvInstance::new(k, d, vectors)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[BitVector] {
        &self.vectors
    }

    #[inline]
    pub fn vector(&self, i: usize) -> BitVector {
        self.vectors[i]
    }

    #[inline]
    pub fn bit(&self, i: usize, coord: usize) -> bool {
        self.vectors[i].get(coord)
    }

    /// Coordinate-wise AND of the referenced vectors (all-ones for an empty list).
    pub fn and_of(&self, indices: &[usize]) -> u64 {
        indices
            .iter()
            .fold(full_mask(self.d), |acc, &i| acc & self.vectors[i].0)
    }

    pub fn is_orthogonal(&self, indices: &[usize]) -> bool {
        self.and_of(indices) == 0
    }

    /// Same instance with a different reduction parameter.
    pub fn with_k(&self, k: usize) -> Result<Self, OvError> {
        OvInstance::new(k, self.d, self.vectors.clone())
    }
}

/// Indices of an orthogonal tuple; repetition is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvWitness {
    pub indices: Vec<usize>,
}

/// Searches for `j` vectors (repetition allowed) whose AND is zero.
///
/// Tuples are scanned as non-decreasing index sequences in lexicographic order,
/// so the first witness found is the lexicographically smallest one.
pub fn solve_kov_bruteforce(inst: &OvInstance, j: usize) -> Option<OvWitness> {
    if j == 0 {
        return None;
    }
    let mut chosen = Vec::with_capacity(j);
    if search_tuple(inst, j, 0, full_mask(inst.d), &mut chosen) {
        Some(OvWitness { indices: chosen })
    } else {
        None
    }
}

fn search_tuple(inst: &OvInstance, j: usize, from: usize, acc: u64, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == j {
        return acc == 0;
    }
    for i in from..inst.n() {
        chosen.push(i);
        if search_tuple(inst, j, i, acc & inst.vectors[i].0, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Returns `true` if some tuple of size `j` (with repetition) is orthogonal.
pub fn has_j_orthogonal(inst: &OvInstance, j: usize) -> bool {
    solve_kov_bruteforce(inst, j).is_some()
}

/// Smallest coordinate where every referenced vector has a 1.
pub fn ind(inst: &OvInstance, indices: &[usize]) -> Result<usize, OvError> {
    let and = inst.and_of(indices);
    if and == 0 {
        Err(OvError::NoCommonCoordinate(indices.to_vec()))
    } else {
        Ok(and.trailing_zeros() as usize)
    }
}

/// Knobs shared by the random generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub density: f64,
    pub retries: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { density: DEFAULT_DENSITY, retries: DEFAULT_RETRIES }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize, density: f64) -> BitVector {
    let mut w = 0u64;
    for c in 0..d {
        if rng.gen_bool(density) {
            w |= 1 << c;
        }
    }
    BitVector(w)
}

/// True if some multiset of at most `j` vectors drawn from `vectors` and
/// containing the last one is orthogonal.
fn last_creates_orthogonal(vectors: &[BitVector], d: usize, j: usize) -> bool {
    let last = vectors.len() - 1;
    fn rec(vectors: &[BitVector], left: usize, from: usize, acc: u64) -> bool {
        if acc == 0 {
            return true;
        }
        if left == 0 {
            return false;
        }
        (from..vectors.len()).any(|i| rec(vectors, left - 1, i, acc & vectors[i].0))
    }
    j >= 1 && rec(vectors, j - 1, 0, full_mask(d) & vectors[last].0)
}

/// Random instance with no orthogonal tuple of any size `<= k`.
///
/// The last vector is always the all-ones vector; the others are dense random
/// vectors, each resampled until the set stays free of orthogonal tuples.
pub fn generate_no_instance(
    k: usize,
    d: usize,
    n: usize,
    seed: u64,
    params: GenParams,
) -> Result<OvInstance, OvError> {
    if n == 0 {
        return Err(OvError::Invalid("n must be at least 1".into()));
    }
    if d == 0 || d > MAX_DIM {
        return Err(OvError::Invalid(format!("d must lie in 1..={MAX_DIM}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = vec![BitVector::ones(d)];
    while vectors.len() < n {
        let mut placed = false;
        for _ in 0..params.retries.max(1) {
            vectors.push(random_vector(&mut rng, d, params.density));
            if !last_creates_orthogonal(&vectors, d, k) {
                placed = true;
                break;
            }
            vectors.pop();
        }
        if !placed {
            return Err(OvError::GenerationFailed(format!(
                "could not extend a {k}-OV no-instance past {} vectors (d={d})",
                vectors.len()
            )));
        }
    }
    // all-ones goes last so that random vectors keep the low indices
    vectors.rotate_left(1);
    let inst = OvInstance::new(k, d, vectors)?;
    debug_assert!((1..=k).all(|j| !has_j_orthogonal(&inst, j)));
    Ok(inst)
}

/// Random instance with a planted orthogonal `k`-tuple at indices `0..k` and
/// no orthogonal `(k-1)`-tuple.
///
/// The planted vectors partition the coordinates into `k` nonempty holes: vector
/// `i` is zero exactly on its hole. Coordinate `i < k` belongs to vector `i`
/// (so `d == k` gives the one-hole instance); extra coordinates go to random
/// planted vectors. Padding vectors are dense random vectors resampled until
/// the `(k-1)`-freeness check passes.
pub fn generate_yes_instance(
    k: usize,
    d: usize,
    n: usize,
    seed: u64,
    params: GenParams,
) -> Result<(OvInstance, OvWitness), OvError> {
    if k < 2 || d < k || d > MAX_DIM {
        return Err(OvError::Invalid(format!(
            "a planted {k}-tuple without smaller orthogonal tuples needs k <= d <= {MAX_DIM} (d={d})"
        )));
    }
    if n < k {
        return Err(OvError::Invalid(format!("n={n} cannot hold a planted {k}-tuple")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holes: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
    for c in k..d {
        holes[rng.gen_range(0..k)] |= 1 << c;
    }
    let mut vectors: Vec<BitVector> = holes.iter().map(|h| BitVector(full_mask(d) & !h)).collect();
    while vectors.len() < n {
        let mut placed = false;
        for _ in 0..params.retries.max(1) {
            vectors.push(random_vector(&mut rng, d, params.density));
            if !last_creates_orthogonal(&vectors, d, k - 1) {
                placed = true;
                break;
            }
            vectors.pop();
        }
        if !placed {
            return Err(OvError::GenerationFailed(format!(
                "could not pad the planted instance past {} vectors",
                vectors.len()
            )));
        }
    }
    let inst = OvInstance::new(k, d, vectors)?;
    let witness = OvWitness { indices: (0..k).collect() };
    debug_assert!(inst.is_orthogonal(&witness.indices));
    debug_assert!(!has_j_orthogonal(&inst, k - 1));
    Ok((inst, witness))
}

impl fmt::Display for OvInstance {
    /// Instance file format: `k d n`, then one line of `d` characters per vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.k, self.d, self.n())?;
        for v in &self.vectors {
            let line: String = (0..self.d).map(|c| if v.get(c) { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for OvInstance {
    type Err = OvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| OvError::Parse("empty file".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| OvError::Parse(format!("header `{header}`: {e}"))))
            .collect::<Result<_, _>>()?;
        let [k, d, n] = fields[..] else {
            return Err(OvError::Parse(format!("header must be `k d n`, got `{header}`")));
        };
        let mut vectors = Vec::with_capacity(n);
        for (row, line) in lines.by_ref().take(n).enumerate() {
            let line = line.trim();
            if line.len() != d {
                return Err(OvError::Parse(format!("row {row} has {} characters, expected {d}", line.len())));
            }
            let mut bits = Vec::with_capacity(d);
            for ch in line.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    other => return Err(OvError::Parse(format!("row {row}: unexpected character `{other}`"))),
                }
            }
            vectors.push(BitVector::from_bits(&bits));
        }
        if vectors.len() != n {
            return Err(OvError::Parse(format!("expected {n} rows, found {}", vectors.len())));
        }
        if lines.next().is_some() {
            return Err(OvError::Parse("trailing rows after the declared vectors".into()));
        }
        OvInstance::new(k, d, vectors).map_err(|e| OvError::Parse(e.to_string()))
    }
}
