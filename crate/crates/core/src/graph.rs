//! Compact undirected graphs and the distance algorithms used for verification.
//!
//! Adjacency is CSR with optional {0,1} weights. A graph may additionally
//! carry a clique cover: vertices sharing a group id are pairwise adjacent with
//! weight 1, without the `O(m^2)` edges being stored.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NO_GROUP: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("operation needs a 0/1-weighted graph")]
    NotWeighted,
    #[error("malformed graph dump at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Cliques {
    group_of: Vec<u32>,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Option<Vec<u8>>,
    cliques: Option<Cliques>,
}

/// Collects edges, then freezes them into a [`Graph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    n: usize,
    edges: Vec<(u32, u32, u8)>,
    weighted: bool,
    group_of: Option<Vec<u32>>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder { n, ..Default::default() }
    }

    pub fn weighted(n: usize) -> Self {
        GraphBuilder { n, weighted: true, ..Default::default() }
    }

    pub fn add_vertex(&mut self) -> u32 {
        self.n += 1;
        (self.n - 1) as u32
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Adds `{u, v}` with weight 1. Self-loops are dropped.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        self.add_weighted_edge(u, v, 1);
    }

    pub fn add_weighted_edge(&mut self, u: u32, v: u32, w: u8) {
        assert!(w <= 1, "weights are 0 or 1");
        assert!((u as usize) < self.n && (v as usize) < self.n, "edge endpoint out of range");
        if u == v {
            return;
        }
        if w == 0 {
            self.weighted = true;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.push((a, b, w));
    }

    /// Declares the clique cover: `group_of[v]` is the group of `v` or [`NO_GROUP`].
    pub fn set_groups(&mut self, group_of: Vec<u32>) {
        assert_eq!(group_of.len(), self.n);
        self.group_of = Some(group_of);
    }

    pub fn build(mut self) -> Graph {
        // parallel edges keep their lightest weight
        self.edges.sort_unstable();
        self.edges.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);
        if let Some(groups) = &self.group_of {
            // pairs inside a clique group are already adjacent
            self.edges.retain(|&(a, b, w)| w == 0 || groups[a as usize] == NO_GROUP || groups[a as usize] != groups[b as usize]);
        }
        let mut deg = vec![0usize; self.n + 1];
        for &(a, b, _) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0usize; self.n + 1];
        for v in 0..self.n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[self.n]];
        let mut weights = if self.weighted { Some(vec![1u8; offsets[self.n]]) } else { None };
        for &(a, b, w) in &self.edges {
            for (x, y) in [(a, b), (b, a)] {
                let slot = fill[x as usize];
                targets[slot] = y;
                if let Some(ws) = weights.as_mut() {
                    ws[slot] = w;
                }
                fill[x as usize] += 1;
            }
        }
        for v in 0..self.n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        if let Some(ws) = weights.as_mut() {
            // re-align weights with the sorted targets
            let mut lookup: std::collections::HashMap<(u32, u32), u8> = std::collections::HashMap::new();
            for &(a, b, w) in &self.edges {
                lookup.insert((a, b), w);
            }
            for v in 0..self.n {
                for slot in offsets[v]..offsets[v + 1] {
                    let u = targets[slot];
                    let key = if (v as u32) < u { (v as u32, u) } else { (u, v as u32) };
                    ws[slot] = lookup[&key];
                }
            }
        }
        let cliques = self.group_of.map(|group_of| {
            let ngroups = group_of.iter().filter(|&&g| g != NO_GROUP).map(|&g| g as usize + 1).max().unwrap_or(0);
            let mut offsets = vec![0usize; ngroups + 1];
            for &g in &group_of {
                if g != NO_GROUP {
                    offsets[g as usize + 1] += 1;
                }
            }
            for g in 0..ngroups {
                offsets[g + 1] += offsets[g];
            }
            let mut fill = offsets.clone();
            let mut members = vec![0u32; offsets[ngroups]];
            for (v, &g) in group_of.iter().enumerate() {
                if g != NO_GROUP {
                    members[fill[g as usize]] = v as u32;
                    fill[g as usize] += 1;
                }
            }
            Cliques { group_of, offsets, members }
        });
        Graph { offsets, targets, weights, cliques }
    }
}

impl Graph {
    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Undirected edge count, counting each clique group of size `m` as `m(m-1)/2` edges.
    pub fn num_edges(&self) -> u64 {
        let explicit = self.targets.len() as u64 / 2;
        let implicit: u64 = self.cliques.as_ref().map_or(0, |c| {
            c.offsets.windows(2).map(|w| (w[1] - w[0]) as u64).map(|m| m * m.saturating_sub(1) / 2).sum()
        });
        explicit + implicit
    }

    pub fn num_explicit_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn has_cliques(&self) -> bool {
        self.cliques.is_some()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbor_weights(&self, v: usize) -> Option<&[u8]> {
        self.weights.as_ref().map(|w| &w[self.offsets[v]..self.offsets[v + 1]])
    }

    pub fn group(&self, v: usize) -> Option<u32> {
        self.cliques.as_ref().and_then(|c| (c.group_of[v] != NO_GROUP).then_some(c.group_of[v]))
    }

    pub fn group_members(&self, g: u32) -> &[u32] {
        let c = self.cliques.as_ref().expect("graph has no clique groups");
        &c.members[c.offsets[g as usize]..c.offsets[g as usize + 1]]
    }

    /// Every adjacency of `v` including clique partners, with weights.
    pub fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(u32, u8)) {
        let ws = self.neighbor_weights(v);
        for (i, &u) in self.neighbors(v).iter().enumerate() {
            f(u, ws.map_or(1, |w| w[i]));
        }
        if let Some(g) = self.group(v) {
            for &u in self.group_members(g) {
                if u as usize != v {
                    f(u, 1);
                }
            }
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
            || (u != v && self.group(u).is_some() && self.group(u) == self.group(v))
    }

    /// All edges as `(u, v, w)` with `u < v`, clique groups expanded.
    pub fn edges(&self) -> Vec<(u32, u32, u8)> {
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            self.for_each_neighbor(v, |u, w| {
                if (v as u32) < u {
                    out.push((v as u32, u, w));
                }
            });
        }
        out.sort_unstable();
        out.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);
        out
    }

    /// Copy with clique groups turned into explicit edges.
    pub fn materialized(&self) -> Graph {
        let mut b = if self.is_weighted() { GraphBuilder::weighted(self.num_vertices()) } else { GraphBuilder::new(self.num_vertices()) };
        for (u, v, w) in self.edges() {
            b.add_weighted_edge(u, v, w);
        }
        b.build()
    }
}

/// Distance value for unreachable vertices is `V`.
pub fn infinity(g: &Graph) -> u32 {
    g.num_vertices() as u32
}

/// Hop distances from `source`, ignoring weights.
pub fn bfs(g: &Graph, source: usize) -> Vec<u32> {
    let n = g.num_vertices();
    let inf = n as u32;
    let mut dist = vec![inf; n];
    let mut expanded = vec![false; g.cliques.as_ref().map_or(0, |c| c.offsets.len() - 1)];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source as u32);
    while let Some(v) = queue.pop_front() {
        let v = v as usize;
        let dv = dist[v] + 1;
        for &u in g.neighbors(v) {
            if dist[u as usize] == inf {
                dist[u as usize] = dv;
                queue.push_back(u);
            }
        }
        if let Some(gid) = g.group(v) {
            if !expanded[gid as usize] {
                expanded[gid as usize] = true;
                for &u in g.group_members(gid) {
                    if dist[u as usize] == inf {
                        dist[u as usize] = dv;
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    dist
}

/// Shortest paths under {0,1} weights with a deque.
pub fn zero_one_bfs(g: &Graph, source: usize) -> Result<Vec<u32>, GraphError> {
    if !g.is_weighted() {
        return Err(GraphError::NotWeighted);
    }
    let n = g.num_vertices();
    let inf = n as u32;
    let mut dist = vec![inf; n];
    let mut deque = VecDeque::new();
    dist[source] = 0;
    deque.push_back(source as u32);
    while let Some(v) = deque.pop_front() {
        let v = v as usize;
        let dv = dist[v];
        g.for_each_neighbor(v, |u, w| {
            let nd = dv + w as u32;
            if nd < dist[u as usize] {
                dist[u as usize] = nd;
                if w == 0 {
                    deque.push_front(u);
                } else {
                    deque.push_back(u);
                }
            }
        });
    }
    Ok(dist)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Quotient by the components of weight-0 edges.
///
/// Returns the unweighted quotient and `map[v]` = quotient vertex of `v`.
/// Quotient vertices are numbered by the smallest original vertex they contain.
pub fn contract_zero_edges(g: &Graph) -> Result<(Graph, Vec<u32>), GraphError> {
    if !g.is_weighted() {
        return Err(GraphError::NotWeighted);
    }
    let n = g.num_vertices();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for v in 0..n {
        let ws = g.neighbor_weights(v).unwrap();
        for (i, &u) in g.neighbors(v).iter().enumerate() {
            if ws[i] == 0 {
                let (a, b) = (find(&mut parent, v as u32), find(&mut parent, u));
                if a != b {
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
    }
    let mut map = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut root_id = vec![u32::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v as u32) as usize;
        if root_id[r] == u32::MAX {
            root_id[r] = next;
            next += 1;
        }
        map[v] = root_id[r];
    }
    let mut b = GraphBuilder::new(next as usize);
    for (u, v, w) in g.edges() {
        if w == 1 {
            b.add_edge(map[u as usize], map[v as usize]);
        }
    }
    Ok((b.build(), map))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiameterMode {
    Full,
    Targeted(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiameterResult {
    pub diameter: u32,
    pub witness: (u32, u32),
    /// Number of sources whose eccentricity was computed.
    pub sources: usize,
}

/// Eccentricity of `v` (error if some vertex is unreachable).
pub fn eccentricity(g: &Graph, v: usize) -> Result<(u32, u32), GraphError> {
    let dist = if g.is_weighted() { zero_one_bfs(g, v)? } else { bfs(g, v) };
    let inf = infinity(g);
    let mut best = (0u32, v as u32);
    for (u, &d) in dist.iter().enumerate() {
        if d == inf {
            return Err(GraphError::Disconnected);
        }
        if d > best.0 {
            best = (d, u as u32);
        }
    }
    Ok(best)
}

/// Exact diameter (full mode) or the largest eccentricity among the given sources.
///
/// Weighted graphs are contracted first. Full mode uses bit-parallel
/// multi-source BFS in blocks of up to 512 sources.
pub fn exact_diameter(g: &Graph, mode: &DiameterMode) -> Result<DiameterResult, GraphError> {
    if g.num_vertices() == 0 {
        return Err(GraphError::Empty);
    }
    if g.is_weighted() {
        let (q, map) = contract_zero_edges(g)?;
        let qmode = match mode {
            DiameterMode::Full => DiameterMode::Full,
            DiameterMode::Targeted(s) => DiameterMode::Targeted(s.iter().map(|&v| map[v as usize]).collect()),
        };
        let r = exact_diameter(&q, &qmode)?;
        let rep = |qv: u32| map.iter().position(|&m| m == qv).unwrap() as u32;
        return Ok(DiameterResult { witness: (rep(r.witness.0), rep(r.witness.1)), ..r });
    }
    match mode {
        DiameterMode::Targeted(sources) => {
            let eccs: Vec<Result<(u32, u32), GraphError>> =
                sources.par_iter().map(|&s| eccentricity(g, s as usize)).collect();
            let mut best = DiameterResult { diameter: 0, witness: (sources.first().copied().unwrap_or(0), sources.first().copied().unwrap_or(0)), sources: sources.len() };
            for (i, e) in eccs.into_iter().enumerate() {
                let (d, far) = e?;
                if d > best.diameter {
                    best.diameter = d;
                    best.witness = (sources[i], far);
                }
            }
            Ok(best)
        }
        DiameterMode::Full => {
            let ecc = all_eccentricities(g)?;
            let (src, &d) = ecc.iter().enumerate().max_by_key(|&(i, &e)| (e, std::cmp::Reverse(i))).unwrap();
            let (_, far) = eccentricity(g, src)?;
            Ok(DiameterResult { diameter: d, witness: (src as u32, far), sources: ecc.len() })
        }
    }
}

/// Eccentricity of every vertex of an unweighted graph.
pub fn all_eccentricities(g: &Graph) -> Result<Vec<u32>, GraphError> {
    let n = g.num_vertices();
    let words = n.div_ceil(64).clamp(1, 8);
    let block = words * 64;
    let mut ecc = vec![0u32; n];
    let mut start = 0;
    while start < n {
        let count = block.min(n - start);
        msbfs_block(g, start, count, words, &mut ecc[start..start + count])?;
        start += count;
    }
    Ok(ecc)
}

fn msbfs_block(g: &Graph, start: usize, count: usize, words: usize, out: &mut [u32]) -> Result<(), GraphError> {
    let n = g.num_vertices();
    let ngroups = g.cliques.as_ref().map_or(0, |c| c.offsets.len() - 1);
    let mut reach = vec![0u64; n * words];
    for s in 0..count {
        reach[(start + s) * words + s / 64] |= 1 << (s % 64);
    }
    // columns past `count` start out complete
    let mut full_cols = vec![0u64; words];
    for s in count..words * 64 {
        full_cols[s / 64] |= 1 << (s % 64);
    }
    let mut done = full_cols.clone();
    if n == 1 {
        out[0] = 0;
        return Ok(());
    }
    let mut next = vec![0u64; n * words];
    let mut group_or = vec![0u64; ngroups * words];
    let mut round = 0u32;
    loop {
        round += 1;
        if ngroups > 0 {
            group_or.iter_mut().for_each(|w| *w = 0);
            let c = g.cliques.as_ref().unwrap();
            for gid in 0..ngroups {
                let acc = &mut group_or[gid * words..(gid + 1) * words];
                for &m in &c.members[c.offsets[gid]..c.offsets[gid + 1]] {
                    let r = &reach[m as usize * words..(m as usize + 1) * words];
                    for w in 0..words {
                        acc[w] |= r[w];
                    }
                }
            }
        }
        next.par_chunks_mut(words).enumerate().for_each(|(v, nv)| {
            nv.copy_from_slice(&reach[v * words..(v + 1) * words]);
            for &u in g.neighbors(v) {
                let r = &reach[u as usize * words..(u as usize + 1) * words];
                for w in 0..words {
                    nv[w] |= r[w];
                }
            }
            if let Some(gid) = g.group(v) {
                let r = &group_or[gid as usize * words..(gid as usize + 1) * words];
                for w in 0..words {
                    nv[w] |= r[w];
                }
            }
        });
        let mut all = vec![u64::MAX; words];
        let mut changed = false;
        for v in 0..n {
            for w in 0..words {
                let nv = next[v * words + w];
                all[w] &= nv;
                changed |= nv != reach[v * words + w];
            }
        }
        for w in 0..words {
            let newly = all[w] & !done[w];
            let mut bits = newly;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out[w * 64 + b] = round;
                bits &= bits - 1;
            }
            done[w] |= newly;
        }
        std::mem::swap(&mut reach, &mut next);
        if done.iter().all(|&w| w == u64::MAX) {
            return Ok(());
        }
        if !changed {
            return Err(GraphError::Disconnected);
        }
    }
}

/// Folklore 2-approximation: the eccentricity of vertex 0.
pub fn two_approx(g: &Graph) -> Result<u32, GraphError> {
    if g.num_vertices() == 0 {
        return Err(GraphError::Empty);
    }
    Ok(eccentricity(g, 0)?.0)
}

/// Writes the `p diam V E` dump; clique groups are written as explicit edges.
pub fn write_dump(g: &Graph, mut out: impl Write) -> std::io::Result<()> {
    let edges = g.edges();
    writeln!(out, "p diam {} {}", g.num_vertices(), edges.len())?;
    let mut buf = String::new();
    for (u, v, w) in edges {
        buf.clear();
        let _ = writeln!(buf, "e {u} {v} {w}");
        out.write_all(buf.as_bytes())?;
    }
    Ok(())
}

/// Reads a `p diam V E` dump. The graph is 0/1-weighted iff some edge has weight 0.
pub fn read_dump(input: impl BufRead) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let perr = |msg: &str| GraphError::Parse { line: lineno, msg: msg.to_string() };
        match toks.first() {
            None => continue,
            Some(&"c") => continue,
            Some(&"p") => {
                if header.is_some() {
                    return Err(perr("duplicate header"));
                }
                if toks.len() != 4 || toks[1] != "diam" {
                    return Err(perr("expected `p diam V E`"));
                }
                let v = toks[2].parse().map_err(|_| perr("bad vertex count"))?;
                let e = toks[3].parse().map_err(|_| perr("bad edge count"))?;
                header = Some((v, e));
            }
            Some(&"e") => {
                let (nv, _) = header.ok_or_else(|| perr("edge before header"))?;
                if toks.len() != 4 {
                    return Err(perr("expected `e u v w`"));
                }
                let u: u32 = toks[1].parse().map_err(|_| perr("bad endpoint"))?;
                let v: u32 = toks[2].parse().map_err(|_| perr("bad endpoint"))?;
                let w: u8 = toks[3].parse().map_err(|_| perr("bad weight"))?;
                if u as usize >= nv || v as usize >= nv {
                    return Err(perr("endpoint out of range"));
                }
                if w > 1 {
                    return Err(perr("weight must be 0 or 1"));
                }
                edges.push((u, v, w));
            }
            Some(_) => return Err(perr("unknown line type")),
        }
    }
    let (nv, ne) = header.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    if edges.len() != ne {
        return Err(GraphError::Parse { line: 0, msg: format!("header declares {ne} edges, found {}", edges.len()) });
    }
    let weighted = edges.iter().any(|e| e.2 == 0);
    let mut b = if weighted { GraphBuilder::weighted(nv) } else { GraphBuilder::new(nv) };
    for (u, v, w) in edges {
        b.add_weighted_edge(u, v, w);
    }
    Ok(b.build())
}

/// `source,target,distance` rows for the given pairs; unreachable pairs print `inf`.
pub fn distances_csv(g: &Graph, pairs: &[(u32, u32)], mut out: impl Write) -> Result<(), GraphError> {
    writeln!(out, "source,target,distance")?;
    let mut cache: Option<(u32, Vec<u32>)> = None;
    let inf = infinity(g);
    for &(s, t) in pairs {
        if cache.as_ref().map(|c| c.0) != Some(s) {
            let d = if g.is_weighted() { zero_one_bfs(g, s as usize)? } else { bfs(g, s as usize) };
            cache = Some((s, d));
        }
        let d = cache.as_ref().unwrap().1[t as usize];
        if d == inf {
            writeln!(out, "{s},{t},inf")?;
        } else {
            writeln!(out, "{s},{t},{d}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> Graph {
        let mut b = GraphBuilder::new(n);
        for i in 1..n {
            b.add_edge(i as u32 - 1, i as u32);
        }
        b.build()
    }

    fn cycle(n: usize) -> Graph {
        let mut b = GraphBuilder::new(n);
        for i in 0..n {
            b.add_edge(i as u32, ((i + 1) % n) as u32);
        }
        b.build()
    }

    fn random_graph(n: usize, p: f64, zero_p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::weighted(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    b.add_weighted_edge(u as u32, v as u32, if rng.gen_bool(zero_p) { 0 } else { 1 });
                }
            }
        }
        b.build()
    }

    fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
        let n = g.num_vertices();
        let inf = u32::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for v in 0..n {
            d[v][v] = 0;
            g.for_each_neighbor(v, |u, w| d[v][u as usize] = d[v][u as usize].min(w as u32));
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][m] + d[m][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn bfs_basics() {
        assert_eq!(bfs(&path(1), 0), vec![0]);
        assert_eq!(bfs(&path(3), 0), vec![0, 1, 2]);
        let mut b = GraphBuilder::new(3);
        b.add_edge(0, 1);
        assert_eq!(bfs(&b.build(), 0), vec![0, 1, 3]);
    }

    #[test]
    fn bfs_matches_floyd_warshall() {
        for seed in 0..20 {
            let g = random_graph(40, 0.08, 0.0, seed);
            let g = {
                let mut b = GraphBuilder::new(g.num_vertices());
                for (u, v, _) in g.edges() {
                    b.add_edge(u, v);
                }
                b.build()
            };
            let fw = floyd_warshall(&g);
            for s in 0..g.num_vertices() {
                let d = bfs(&g, s);
                for t in 0..g.num_vertices() {
                    let expect = if fw[s][t] >= u32::MAX / 4 { infinity(&g) } else { fw[s][t] };
                    assert_eq!(d[t], expect);
                }
            }
        }
    }

    #[test]
    fn zero_one_bfs_matches_contraction() {
        for seed in 0..200 {
            let n = 2 + (seed as usize * 37) % 255;
            let g = random_graph(n, (3.0 / n as f64).min(1.0), 0.3, seed);
            let (q, map) = contract_zero_edges(&g).unwrap();
            assert!(!q.is_weighted());
            let src = (seed as usize) % n;
            let d01 = zero_one_bfs(&g, src).unwrap();
            let dq = bfs(&q, map[src] as usize);
            for v in 0..n {
                let a = if d01[v] == n as u32 { None } else { Some(d01[v]) };
                let b = if dq[map[v] as usize] == q.num_vertices() as u32 { None } else { Some(dq[map[v] as usize]) };
                assert_eq!(a, b, "seed {seed} vertex {v}");
            }
        }
    }

    #[test]
    fn zero_one_edge_cases() {
        let mut b = GraphBuilder::weighted(3);
        b.add_weighted_edge(0, 1, 0);
        b.add_weighted_edge(1, 2, 0);
        let g = b.build();
        assert_eq!(zero_one_bfs(&g, 0).unwrap(), vec![0, 0, 0]);
        let (q, map) = contract_zero_edges(&g).unwrap();
        assert_eq!(q.num_vertices(), 1);
        assert_eq!(map, vec![0, 0, 0]);

        let mut b = GraphBuilder::weighted(3);
        b.add_weighted_edge(0, 1, 1);
        b.add_weighted_edge(1, 2, 1);
        let g = b.build();
        assert_eq!(zero_one_bfs(&g, 0).unwrap(), bfs(&g, 0));
        assert_eq!(contract_zero_edges(&g).unwrap().0.num_vertices(), 3);
        assert!(zero_one_bfs(&path(2), 0).is_err());
    }

    #[test]
    fn diameter_examples() {
        let r = exact_diameter(&cycle(5), &DiameterMode::Full).unwrap();
        assert_eq!(r.diameter, 2);
        assert_eq!(exact_diameter(&path(1), &DiameterMode::Full).unwrap().diameter, 0);
        assert_eq!(exact_diameter(&path(7), &DiameterMode::Full).unwrap().witness, (0, 6));
        let mut b = GraphBuilder::new(3);
        b.add_edge(0, 1);
        assert!(matches!(exact_diameter(&b.build(), &DiameterMode::Full), Err(GraphError::Disconnected)));
        assert_eq!(exact_diameter(&path(7), &DiameterMode::Targeted(vec![3])).unwrap().diameter, 3);
    }

    #[test]
    fn diameter_matches_oracles() {
        for seed in 0..30 {
            let n = 10 + seed as usize * 2;
            let g = random_graph(n, 0.15, 0.0, seed + 1000);
            let g = {
                let mut b = GraphBuilder::new(n);
                for i in 1..n {
                    b.add_edge(i as u32 - 1, i as u32);
                }
                for (u, v, _) in g.edges() {
                    b.add_edge(u, v);
                }
                b.build()
            };
            let fw = floyd_warshall(&g);
            let fw_d = fw.iter().flatten().copied().max().unwrap();
            let full = exact_diameter(&g, &DiameterMode::Full).unwrap();
            let by_bfs = (0..n).map(|s| *bfs(&g, s).iter().max().unwrap()).max().unwrap();
            assert_eq!(full.diameter, fw_d);
            assert_eq!(full.diameter, by_bfs);
            let (a, b) = full.witness;
            assert_eq!(fw[a as usize][b as usize], fw_d);
            let approx = two_approx(&g).unwrap();
            assert!(approx <= fw_d && 2 * approx >= fw_d);
        }
    }

    #[test]
    fn multi_block_eccentricities() {
        let g = cycle(700);
        let ecc = all_eccentricities(&g).unwrap();
        assert!(ecc.iter().all(|&e| e == 350));
    }

    #[test]
    fn clique_groups_behave_like_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 60;
            let mut b = GraphBuilder::new(n);
            for _ in 0..40 {
                b.add_edge(rng.gen_range(0..n as u32), rng.gen_range(0..n as u32));
            }
            let groups: Vec<u32> = (0..n).map(|_| if rng.gen_bool(0.7) { rng.gen_range(0..5) } else { NO_GROUP }).collect();
            b.set_groups(groups);
            let g = b.build();
            let m = g.materialized();
            assert!(!m.has_cliques());
            assert_eq!(g.num_edges(), m.num_edges());
            for s in 0..n {
                assert_eq!(bfs(&g, s), bfs(&m, s));
            }
            match (all_eccentricities(&g), all_eccentricities(&m)) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => panic!("connectivity disagreement"),
            }
        }
    }

    #[test]
    fn star_two_approx() {
        let mut b = GraphBuilder::new(5);
        for v in 1..5 {
            b.add_edge(0, v);
        }
        assert_eq!(two_approx(&b.build()).unwrap(), 1);
        let mut b = GraphBuilder::new(5);
        for v in 0..4 {
            b.add_edge(4, v);
        }
        assert_eq!(two_approx(&b.build()).unwrap(), 2);
        assert_eq!(two_approx(&path(1)).unwrap(), 0);
    }

    #[test]
    fn dump_round_trip() {
        let g = random_graph(30, 0.2, 0.3, 9);
        let mut buf = Vec::new();
        write_dump(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("p diam 30 "));
        let h = read_dump(&buf[..]).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert!(read_dump(&b"p diam 2 1\ne 0 5 1\n"[..]).is_err());
        assert!(read_dump(&b"e 0 1 1\n"[..]).is_err());
        assert!(read_dump(&b"p diam 2 2\ne 0 1 1\n"[..]).is_err());
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        distances_csv(&path(3), &[(0, 2), (1, 0)], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "source,target,distance\n0,2,2\n1,0,1\n");
    }
}
