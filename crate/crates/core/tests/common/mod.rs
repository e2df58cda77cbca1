#![allow(dead_code)]

use ovdiam::general::ops::{Deletion, Insertion};
use ovdiam::general::sample::valid_full_ops;
use ovdiam::general::root_removal::{min_ops_to_remove_root, scenario_shapes, Role};
use ovdiam::general::{apply_full_op, inverse_full_op, num_labels, random_valid_configuration, ConcreteConfig, Label};
use ovdiam::ov::{generate_no_instance, generate_yes_instance, has_j_orthogonal, GenParams};
use ovdiam::stack::{all_arrays, common_coord_array, satisfies, yes1_conflict};
use ovdiam::{BitVector, CoordArray, OvInstance, Stack};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub cases: usize,
    pub failures: usize,
    pub first: Option<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    pub fn merge(&mut self, o: Tally) {
        self.cases += o.cases;
        self.failures += o.failures;
        if self.first.is_none() {
            self.first = o.first;
        }
    }

    pub fn assert_clean(&self, name: &str) {
        assert_eq!(self.failures, 0, "{name}: {} of {} failed, first: {:?}", self.failures, self.cases, self.first);
    }
}

pub fn sat(s: &Stack, x: &CoordArray, inst: &OvInstance) -> bool {
    satisfies(s, x, inst).unwrap()
}

pub fn random_stack(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Stack {
    Stack::from_slice(&(0..len).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>())
}

/// Random stack of length below `k`.
pub fn random_stack_below(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Stack {
    let len = rng.gen_range(0..k);
    random_stack(rng, n, len)
}

pub fn random_array(rng: &mut ChaCha8Rng, d: usize, len: usize) -> CoordArray {
    CoordArray::from_slice(&(0..len).map(|_| rng.gen_range(0..d)).collect::<Vec<_>>())
}

/// All stacks over `[n]` of length exactly `len`.
pub fn stacks_of_len(n: usize, len: usize) -> Vec<Stack> {
    let mut out = vec![Stack::new()];
    for _ in 0..len {
        out = out.iter().flat_map(|s| (0..n).map(move |b| s.pushed(b))).collect();
    }
    out
}

pub fn stacks_up_to(n: usize, len: usize) -> Vec<Stack> {
    (0..=len).flat_map(|l| stacks_of_len(n, l)).collect()
}

/// No-instances from the generator over a small grid of shapes.
pub fn no_instances(k: usize, count: usize) -> Vec<OvInstance> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count {
        let d = k + (seed as usize % 2);
        let n = 3 + (seed as usize % 2);
        if let Ok(i) = generate_no_instance(k, d, n, seed, GenParams::default()) {
            out.push(i);
        }
        seed += 1;
    }
    out
}

/// Every set of distinct vectors in `{0,1}^d` with no orthogonal tuple of size
/// at most `k` (repetition allowed), up to `max_n` vectors.
pub fn all_small_no_instances(k: usize, d: usize, max_n: usize) -> Vec<OvInstance> {
    let vs: Vec<u64> = (1..1u64 << d).collect();
    let mut out = Vec::new();
    for mask in 1u64..1 << vs.len() {
        if mask.count_ones() as usize > max_n {
            continue;
        }
        let chosen: Vec<BitVector> = (0..vs.len()).filter(|i| mask >> i & 1 == 1).map(|i| BitVector(vs[i])).collect();
        let inst = OvInstance::new(k, d, chosen).unwrap();
        if (1..=k).all(|j| !has_j_orthogonal(&inst, j)) {
            out.push(inst);
        }
    }
    out
}

pub fn prefix_closure(cases: usize, seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // exhaustive micro-case: k=4, d=3, the all-ones-free table instance
    let micro = OvInstance::from_rows(4, &[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1], &[1, 1, 1]]).unwrap();
    for s in stacks_up_to(4, 3) {
        for x in all_arrays(3, 3) {
            if sat(&s, &x, &micro) {
                for l in 0..=s.len() {
                    t.check(sat(&s.substack(l), &x, &micro), || format!("{s} {x} prefix {l}"));
                }
            }
        }
    }
    let mut hits = 0;
    while hits < cases {
        let k = rng.gen_range(4..=7);
        let d = rng.gen_range(2..=6);
        let n = rng.gen_range(1..=5);
        let vecs = (0..n).map(|_| BitVector(rng.gen_range(0..1u64 << d))).collect();
        let inst = OvInstance::new(k, d, vecs).unwrap();
        let s = random_stack_below(&mut rng, n, k);
        let x = random_array(&mut rng, d, k - 1);
        if !sat(&s, &x, &inst) {
            continue;
        }
        hits += 1;
        for l in 0..=s.len() {
            t.check(sat(&s.substack(l), &x, &inst), || format!("{s} {x} prefix {l}"));
        }
    }
    t
}

/// Both inputs satisfy the common array, over all stack pairs of generated
/// no-instances (k=4, n <= 4, d <= 4), then random pairs at larger k.
pub fn common_array_both(instances: usize, random_cases: usize, seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut made = 0;
    let mut s0 = 0;
    while made < instances {
        let d = 3 + (s0 as usize % 2);
        let n = 2 + (s0 as usize % 3);
        s0 += 1;
        let Ok(inst) = generate_no_instance(4, d, n, s0, GenParams::default()) else { continue };
        made += 1;
        let all = stacks_up_to(n, 3);
        for s in &all {
            for u in &all {
                let x = common_coord_array(s, u, &inst);
                t.check(x.as_ref().is_ok_and(|x| sat(s, x, &inst) && sat(u, x, &inst)), || format!("{inst:?} {s} {u} {x:?}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<OvInstance> = (5..=7).flat_map(|k| no_instances(k, 4)).collect();
    for _ in 0..random_cases {
        let inst = pool.choose(&mut rng).unwrap();
        let k = inst.k();
        let s = random_stack_below(&mut rng, inst.n(), k);
        let u = random_stack_below(&mut rng, inst.n(), k);
        let x = common_coord_array(&s, &u, inst);
        t.check(x.as_ref().is_ok_and(|x| sat(&s, x, inst) && sat(&u, x, inst)), || format!("{s} {u} {x:?}"));
    }
    t
}

/// No split of the planted tuple has both halves satisfying a common array,
/// for every j in 0..=k and every x in [d]^{k-1}.
pub fn planted_split(seeds: u64) -> Tally {
    let mut t = Tally::default();
    for seed in 0..seeds {
        for (k, d, n) in [(4, 4, 4), (4, 4, 6), (5, 5, 5)] {
            let Ok((inst, w)) = generate_yes_instance(k, d, n, seed, GenParams::default()) else { continue };
            let mut tuple = w.indices.clone();
            if seed % 2 == 1 {
                tuple.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
            for j in 0..=k {
                for x in all_arrays(d, k - 1) {
                    t.check(!yes1_conflict(j, &tuple, &x, &inst), || format!("{inst:?} j={j} x={x}"));
                }
            }
        }
    }
    t
}

/// The three implications for k=5 stacks, exhaustively over every 5-OV
/// no-instance of distinct vectors at d <= 3 with at most `max_n` vectors.
pub fn k5_implications(max_n: usize) -> Tally {
    let mut t = Tally::default();
    for d in 1..=3 {
        for inst in all_small_no_instances(5, d, max_n) {
            let n = inst.n();
            let xs: Vec<CoordArray> = all_arrays(d, 4).collect();
            let s = |v: &[usize]| Stack::from_slice(v);
            for x in &xs {
                let ok1: Vec<bool> = (0..n).map(|a| sat(&s(&[a]), x, &inst)).collect();
                let mut ok2 = vec![vec![false; n]; n];
                for a in 0..n {
                    for b in 0..n {
                        ok2[a][b] = sat(&s(&[a, b]), x, &inst);
                    }
                }
                for a in 0..n {
                    for b in 0..n {
                        if !ok2[a][b] {
                            continue;
                        }
                        for a2 in 0..n {
                            if ok1[a2] {
                                t.check(sat(&s(&[a, b, a2]), x, &inst) && sat(&s(&[a2, a, b]), x, &inst), || {
                                    format!("(i) {inst:?} a={a} b={b} a'={a2} x={x}")
                                });
                            }
                            for b2 in 0..n {
                                if ok2[a2][b2] {
                                    t.check(sat(&s(&[a, b, b2]), x, &inst), || format!("(ii) {inst:?} {a} {b} {a2} {b2} x={x}"));
                                }
                            }
                        }
                    }
                }
                for e2 in 0..n {
                    for a2 in 0..n {
                        for b2 in 0..n {
                            if !sat(&s(&[e2, a2, b2]), x, &inst) {
                                continue;
                            }
                            for a in 0..n {
                                if ok1[a] {
                                    t.check(sat(&s(&[a, a2, b2]), x, &inst), || format!("(iii) {inst:?} {e2} {a2} {b2} {a} x={x}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    t
}

/// Pool of (instance, valid configuration) pairs for k in 4..=7.
pub fn config_pool(per_k: usize, seed: u64) -> Vec<(OvInstance, ConcreteConfig)> {
    let mut out = Vec::new();
    for k in 4..=7 {
        let insts = no_instances(k, 3);
        for i in 0..per_k {
            let inst = &insts[i % insts.len()];
            let c = random_valid_configuration(inst, seed * 7919 + (k * 1000 + i) as u64, 100).unwrap();
            out.push((inst.clone(), c));
        }
    }
    out
}

pub fn random_perm(rng: &mut ChaCha8Rng, k: usize) -> Vec<Label> {
    let nl = num_labels(k) as Label;
    let mut p: Vec<Label> = (1..=nl).collect();
    p.shuffle(rng);
    std::iter::once(0).chain(p).collect()
}

pub fn deletions_keep_edges(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (inst, h) in pool {
        let mut cur = h.clone();
        t.check(cur.is_edge_satisfying(inst), || format!("start {cur}"));
        loop {
            let mut dels = Vec::new();
            for nd in cur.nodes() {
                for d in [Deletion::Vector { node: nd.label }, Deletion::Node { label: nd.label }] {
                    if let Ok(e) = cur.delete(&d) {
                        dels.push(e);
                    }
                }
            }
            let Some(next) = dels.choose(&mut rng).cloned() else { break };
            t.check(next.is_edge_satisfying(inst), || format!("{cur} -> {next}"));
            cur = next;
        }
    }
    t
}

pub fn full_op_inverse(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (inst, h) in pool {
        let ops = valid_full_ops(h, inst);
        let Some(op) = ops.choose(&mut rng) else { continue };
        let end = apply_full_op(h, op, inst).unwrap();
        let back = inverse_full_op(h, op).and_then(|inv| apply_full_op(&end, &inv, inst));
        t.check(back.as_ref() == Ok(h), || format!("{h} via {op:?} gave {back:?}"));
    }
    t
}

pub fn perm_composition(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (_, h) in pool {
        let p = random_perm(&mut rng, h.k());
        let q = random_perm(&mut rng, h.k());
        let pq: Vec<Label> = (0..p.len()).map(|l| p[q[l] as usize]).collect();
        t.check(h.permute(&q).permute(&p) == h.permute(&pq), || format!("{h} {p:?} {q:?}"));
    }
    t
}

/// Every legal half-operation on H has a counterpart on π(H) ending at π(H').
pub fn perm_half_ops(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (inst, h) in pool {
        let p = random_perm(&mut rng, h.k());
        let ph = h.permute(&p);
        let mut ins = vec![Insertion::Vector { node: h.root(), b: rng.gen_range(0..inst.n()) }];
        if let Some(label) = h.fresh_label() {
            let x = CoordArray::uniform(0, h.k() - 1);
            for second_largest in [false, true] {
                let constraint = ovdiam::EdgeConstraint::uniform(h.root(), label, h.k(), x.clone());
                ins.push(Insertion::Node { label, second_largest, constraint });
            }
        }
        for i in &ins {
            if let Ok(hh) = h.insert(i) {
                t.check(ph.insert(&i.permute(&p)) == Ok(hh.permute(&p)), || format!("{h} {i:?}"));
            }
        }
        for nd in h.nodes() {
            for d in [Deletion::Vector { node: nd.label }, Deletion::Node { label: nd.label }] {
                if let Ok(hh) = h.delete(&d) {
                    t.check(ph.delete(&d.permute(&p)) == Ok(hh.permute(&p)), || format!("{h} {d:?}"));
                }
            }
        }
        if let Ok(hh) = h.flip() {
            t.check(ph.flip() == Ok(hh.permute(&p)), || format!("{h} flip"));
        }
    }
    t
}

pub fn perm_validity(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (inst, h) in pool {
        let p = random_perm(&mut rng, h.k());
        t.check(h.permute(&p).is_valid(inst) == h.is_valid(inst), || format!("{h} {p:?}"));
        // invalid configurations stay invalid too
        let mut bad = h.clone();
        if let Some(r) = bad.all_slots().first().copied() {
            *bad.slot_value_mut(r) = random_array(&mut rng, inst.d(), h.k() - 1);
            t.check(bad.permute(&p).is_valid(inst) == bad.is_valid(inst), || format!("{bad} {p:?}"));
        }
    }
    t
}

pub fn perm_full_ops(pool: &[(OvInstance, ConcreteConfig)], seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (inst, h) in pool {
        let ops = valid_full_ops(h, inst);
        let Some(op) = ops.choose(&mut rng) else { continue };
        let p = random_perm(&mut rng, h.k());
        let end = apply_full_op(h, op, inst).unwrap();
        let pend = apply_full_op(&h.permute(&p), &op.permute(&p), inst);
        t.check(pend == Ok(end.permute(&p)), || format!("{h} {op:?} {p:?}"));
    }
    t
}

/// Size-only search from every scenario shape, k in 4..=`max_k`.
pub fn root_removal(max_k: usize) -> Tally {
    let mut t = Tally::default();
    for k in 4..=max_k {
        for s in scenario_shapes(k) {
            let r = min_ops_to_remove_root(k, &s, 4 * k);
            t.check(r.min_ops.is_some_and(|m| m >= k - 1), || format!("k={k} {s:?} {:?}", r.min_ops));
        }
    }
    t
}

/// The k=7 example: a root with three vectors, the kept empty leaf and two
/// more empty leaves.
pub fn k7_root_example() -> (Option<usize>, usize, usize) {
    let s = vec![(Role::Target, 3), (Role::Kept, 0), (Role::Other, 0), (Role::Other, 0)];
    let r = min_ops_to_remove_root(7, &s, 28);
    (r.min_ops, r.deletions.vector_deletions, r.deletions.node_deletions)
}

/// Fast criterion against the literal chain search over every stack of
/// length below k on the instance holding all of `{0,1}^d`.
pub fn oracle_equivalence(k: usize, d: usize) -> Tally {
    let mut t = Tally::default();
    let inst = OvInstance::new(k, d, (0..1u64 << d).map(BitVector).collect()).unwrap();
    let xs: Vec<CoordArray> = all_arrays(d, k - 1).collect();
    for s in stacks_up_to(inst.n(), k - 1) {
        for x in &xs {
            let fast = satisfies(&s, x, &inst).unwrap();
            let slow = ovdiam::stack::satisfies_bruteforce(&s, x, &inst).unwrap();
            t.check(fast == slow, || format!("{s} {x}: fast {fast} chain {slow}"));
        }
    }
    t
}
