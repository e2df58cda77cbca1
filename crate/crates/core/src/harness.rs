//! End-to-end verification pipelines and their JSON reports.
//!
//! Verdicts are functions of the recorded measurements only, so a report read
//! back from disk can be re-judged with [`VerifyReport::derive_verdicts`].

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::general::certify::{yes_case_bound, Certificate, CertifyError, CertifyParams, DEFAULT_CAP};
use crate::general::{no_case_path, random_valid_configuration};
use crate::graph::{bfs, exact_diameter, two_approx, DiameterMode, Graph, GraphError};
use crate::ov::{has_j_orthogonal, solve_kov_bruteforce, OvInstance, OvWitness, DEFAULT_RETRIES};
use crate::small::{SmallError, SmallGadget, UNREACHED};

pub const SCHEMA_VERSION: u32 = 1;

/// Above this many vertices the small gadgets are searched implicitly.
pub const DEFAULT_FULL_CAP: usize = 2_000_000;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("input error: {0}")]
    Input(String),
    #[error("unsupported report schema version {0}")]
    Schema(u32),
    #[error(transparent)]
    Small(#[from] SmallError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    No,
    Yes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub kind: InstanceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionStats {
    pub vertices: u64,
    /// `None` when the graph was only searched implicitly.
    pub edges: Option<u64>,
    pub l1: u64,
    pub l2: u64,
    pub build_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DiameterFinding {
    /// BFS from every vertex.
    Exact { diameter: u32, witness: (u32, u32) },
    /// Largest eccentricity over `sources` vertices; a lower bound on D.
    Targeted { max_eccentricity: u32, sources: usize, witness: (u32, u32) },
    /// Certified `lower <= D <= upper` from a few eccentricities and the
    /// triangle inequality.
    Bracket { lower: u32, upper: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallFindings {
    pub diameter: Option<DiameterFinding>,
    pub endpoints: Option<(u32, u32)>,
    pub endpoint_distance: Option<u32>,
    pub two_approx: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoPathFindings {
    pub pairs: usize,
    /// Operation count (flips weigh zero) of each constructed path.
    pub lengths: Vec<usize>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YesBoundFindings {
    pub budget: usize,
    pub cap: usize,
    /// `None` when the cap was hit.
    pub certificate: Option<Certificate>,
    pub budget_exceeded: bool,
    /// First depth at which the target appeared in the sweep.
    pub first_reach_depth: Option<usize>,
    pub sweep_limit: usize,
    /// The sweep ran to its limit or found the target.
    #[serde(default)]
    pub sweep_done: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Failing this verdict means an expected bound was contradicted (exit code 1).
    pub gating: bool,
    pub inconclusive: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub instance: InstanceDescriptor,
    /// `oracle[j-1]` says whether j vectors (repetition allowed) are orthogonal.
    pub oracle: Vec<bool>,
    pub witness: Option<Vec<usize>>,
    pub construction: Option<ConstructionStats>,
    pub small: Option<SmallFindings>,
    pub no_paths: Option<NoPathFindings>,
    pub yes_bound: Option<YesBoundFindings>,
    pub verdicts: Vec<Verdict>,
}

/// Process exit code for a report: 0 pass, 1 bound violated, 3 inconclusive.
pub fn exit_code(verdicts: &[Verdict]) -> i32 {
    if verdicts.iter().any(|v| v.gating && !v.pass && !v.inconclusive) {
        1
    } else if verdicts.iter().any(|v| v.gating && v.inconclusive) {
        3
    } else {
        0
    }
}

fn verdict(name: &str, pass: bool, gating: bool, detail: String) -> Verdict {
    Verdict { name: name.into(), pass, gating, inconclusive: false, detail }
}

impl VerifyReport {
    fn new(inst: &OvInstance, seed: Option<u64>) -> Result<(Self, Option<OvWitness>), HarnessError> {
        let k = inst.k();
        let oracle: Vec<bool> = (1..=k).map(|j| has_j_orthogonal(inst, j)).collect();
        let kind = if oracle[k - 1] { InstanceKind::Yes } else { InstanceKind::No };
        let witness = if kind == InstanceKind::Yes { solve_kov_bruteforce(inst, k) } else { None };
        let report = VerifyReport {
            schema_version: SCHEMA_VERSION,
            instance: InstanceDescriptor { k, d: inst.d(), n: inst.n(), seed, kind },
            oracle,
            witness: witness.as_ref().map(|w| w.indices.clone()),
            construction: None,
            small: None,
            no_paths: None,
            yes_bound: None,
            verdicts: Vec::new(),
        };
        Ok((report, witness))
    }

    /// Recomputes every verdict from the recorded measurements.
    pub fn derive_verdicts(&self) -> Vec<Verdict> {
        let k = self.instance.k;
        let mut out = Vec::new();
        if let (Some(c), Some(_)) = (&self.construction, &self.small) {
            let (n, d) = (self.instance.n as u64, self.instance.d as u64);
            let l1_bound = n.pow(k as u32 - 1);
            let l2_bound = n.pow(k as u32 - 2) * d.pow(2 * (k as u32 - 1));
            out.push(verdict("l1-count", c.l1 <= l1_bound, false, format!("|L1| = {} vs n^{} = {l1_bound}", c.l1, k - 1)));
            out.push(verdict(
                "l2-count",
                c.l2 <= l2_bound,
                false,
                format!("|L2| = {} vs n^{} d^{} = {l2_bound}", c.l2, k - 2, 2 * (k - 1)),
            ));
        }
        if let Some(s) = &self.small {
            match self.instance.kind {
                InstanceKind::No => {
                    let bound = k as u32;
                    let v = match &s.diameter {
                        Some(DiameterFinding::Exact { diameter, .. }) => {
                            verdict("no-case-diameter", *diameter <= bound, true, format!("D = {diameter}, bound {bound}"))
                        }
                        Some(DiameterFinding::Bracket { lower, upper }) => Verdict {
                            inconclusive: *upper > bound && *lower <= bound,
                            ..verdict("no-case-diameter", *upper <= bound, true, format!("D in [{lower}, {upper}], bound {bound}"))
                        },
                        Some(DiameterFinding::Targeted { max_eccentricity, sources, .. }) => Verdict {
                            inconclusive: *max_eccentricity <= bound,
                            ..verdict(
                                "no-case-diameter",
                                false,
                                true,
                                format!("max eccentricity {max_eccentricity} over {sources} sources, bound {bound}"),
                            )
                        },
                        None => Verdict { inconclusive: true, ..verdict("no-case-diameter", false, true, "not measured".into()) },
                    };
                    out.push(v);
                }
                InstanceKind::Yes => {
                    let bound = 2 * k as u32 - 1;
                    let v = match s.endpoint_distance {
                        Some(dist) => verdict("yes-case-distance", dist >= bound, true, format!("endpoint distance {dist}, bound {bound}")),
                        None => Verdict { inconclusive: true, ..verdict("yes-case-distance", false, true, "not measured".into()) },
                    };
                    out.push(v);
                }
            }
            if let (Some(est), Some(dm)) = (s.two_approx, &s.diameter) {
                let (lo, hi) = match dm {
                    DiameterFinding::Exact { diameter, .. } => (*diameter, *diameter),
                    DiameterFinding::Bracket { lower, upper } => (*lower, *upper),
                    DiameterFinding::Targeted { max_eccentricity, .. } => (*max_eccentricity, u32::MAX),
                };
                let pass = hi != u32::MAX && hi.div_ceil(2) <= est && est <= lo;
                out.push(verdict("two-approx", pass, false, format!("estimate {est}, D in [{lo}, {hi}]")));
            }
        }
        if let Some(p) = &self.no_paths {
            let worst = p.lengths.iter().copied().max().unwrap_or(0);
            let pass = p.failures.is_empty() && worst <= k && p.lengths.len() == p.pairs;
            out.push(verdict(
                "no-case-paths",
                pass,
                true,
                format!("{} of {} paths, longest {worst}, {} failures", p.lengths.len(), p.pairs, p.failures.len()),
            ));
        }
        if let Some(y) = &self.yes_bound {
            let v = match &y.certificate {
                None => Verdict {
                    inconclusive: true,
                    ..verdict("yes-case-bound", false, true, format!("state cap {} exceeded", y.cap))
                },
                Some(c) => verdict(
                    "yes-case-bound",
                    !c.reached && c.prefix_check,
                    true,
                    format!("reached {} within {} ops, {} states, prefix check {}", c.reached, c.budget, c.total_states, c.prefix_check),
                ),
            };
            out.push(v);
            out.push(match y.first_reach_depth {
                Some(f) => verdict("yes-first-reach", f >= 2 * k - 1, false, format!("first reached at depth {f}")),
                None if y.sweep_done => verdict("yes-first-reach", true, false, format!("not reached up to depth {}", y.sweep_limit)),
                None => Verdict {
                    inconclusive: true,
                    ..verdict("yes-first-reach", false, false, format!("sweep to depth {} did not finish", y.sweep_limit))
                },
            });
        }
        out
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(&self.verdicts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Parses a report and rejects unknown schema versions.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let version = v.get("schema_version").and_then(|x| x.as_u64()).ok_or_else(|| HarnessError::Input("missing schema_version".into()))?;
        if version != SCHEMA_VERSION as u64 {
            return Err(HarnessError::Schema(version as u32));
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Re-derives verdicts and checks they match the stored ones.
    pub fn replay_matches(&self) -> bool {
        self.derive_verdicts() == self.verdicts
    }
}

#[derive(Debug, Clone)]
pub struct SmallParams {
    /// Largest vertex count for which the graph is built and the diameter
    /// computed from every vertex.
    pub full_cap: usize,
    /// Sources for the targeted diameter of large no-instance gadgets.
    pub targeted_l1: bool,
}

impl Default for SmallParams {
    fn default() -> Self {
        SmallParams { full_cap: DEFAULT_FULL_CAP, targeted_l1: true }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Builds the k=4 or k=5 gadget and checks the applicable gap.
pub fn verify_small(inst: &OvInstance, seed: Option<u64>, params: &SmallParams) -> Result<VerifyReport, HarnessError> {
    let k = inst.k();
    if k != 4 && k != 5 {
        return Err(HarnessError::Input(format!("small gadgets exist for k = 4 and k = 5, not {k}")));
    }
    let (mut report, witness) = VerifyReport::new(inst, seed)?;
    if report.instance.kind == InstanceKind::Yes && report.oracle[k - 2] {
        return Err(HarnessError::Input(format!("instance has {} orthogonal vectors; the gap needs none", k - 1)));
    }
    let t = Instant::now();
    let gadget = SmallGadget::index(inst)?;
    let v = gadget.num_vertices();
    let mut findings = SmallFindings { diameter: None, endpoints: None, endpoint_distance: None, two_approx: None };
    if let Some(w) = &witness {
        findings.endpoints = Some(gadget.endpoint_pair(w)?);
    }
    if v <= params.full_cap {
        let g = gadget.build_graph();
        report.construction = Some(stats(&gadget, Some(&g), ms(t)));
        let r = exact_diameter(&g, &DiameterMode::Full)?;
        findings.diameter = Some(DiameterFinding::Exact { diameter: r.diameter, witness: r.witness });
        findings.two_approx = Some(two_approx(&g)?);
        if let Some((a, b)) = findings.endpoints {
            findings.endpoint_distance = Some(bfs(&g, a as usize)[b as usize]);
        }
    } else {
        report.construction = Some(stats(&gadget, None, ms(t)));
        let (ecc0, d0) = implicit_ecc(&gadget, 0)?;
        findings.two_approx = Some(ecc0);
        match findings.endpoints {
            Some((a, b)) => {
                let (ecca, da) = implicit_ecc(&gadget, a)?;
                findings.endpoint_distance = Some(da[b as usize] as u32);
                let upper = d0.iter().zip(&da).map(|(&x, &y)| (ecc0 + x as u32).min(ecca + y as u32)).max().unwrap_or(0);
                findings.diameter = Some(DiameterFinding::Bracket { lower: ecc0.max(ecca), upper });
            }
            None if params.targeted_l1 => {
                let mut best = (ecc0, (0u32, 0u32));
                for s in 0..gadget.num_l1() as u32 {
                    let (e, dist) = implicit_ecc(&gadget, s)?;
                    if e > best.0 {
                        let far = dist.iter().position(|&x| x as u32 == e).unwrap() as u32;
                        best = (e, (s, far));
                    }
                }
                findings.diameter =
                    Some(DiameterFinding::Targeted { max_eccentricity: best.0, sources: gadget.num_l1() + 1, witness: best.1 });
            }
            None => {}
        }
    }
    report.small = Some(findings);
    report.verdicts = report.derive_verdicts();
    Ok(report)
}

fn stats(gadget: &SmallGadget, g: Option<&Graph>, build_ms: f64) -> ConstructionStats {
    ConstructionStats {
        vertices: gadget.num_vertices() as u64,
        edges: g.map(|g| g.num_edges()),
        l1: gadget.num_l1() as u64,
        l2: gadget.num_l2() as u64,
        build_ms,
    }
}

fn implicit_ecc(gadget: &SmallGadget, source: u32) -> Result<(u32, Vec<u8>), HarnessError> {
    let dist = gadget.implicit_bfs(source);
    if dist.contains(&UNREACHED) {
        return Err(GraphError::Disconnected.into());
    }
    let ecc = dist.iter().copied().max().unwrap_or(0) as u32;
    Ok((ecc, dist))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneralMode {
    NoPaths,
    YesBound,
}

#[derive(Debug, Clone)]
pub struct GeneralParams {
    pub pairs: usize,
    pub seed: u64,
    /// Defaults to `2k - 2`.
    pub budget: Option<usize>,
    pub cap: usize,
    /// Deepest layer tried when looking for the first reaching depth.
    pub sweep_limit: Option<usize>,
}

impl Default for GeneralParams {
    fn default() -> Self {
        GeneralParams { pairs: 100, seed: 0, budget: None, cap: DEFAULT_CAP, sweep_limit: None }
    }
}

/// General-k checks: short paths on no-instances, or the symbolic lower
/// bound on a yes-instance.
pub fn verify_general(inst: &OvInstance, mode: GeneralMode, params: &GeneralParams) -> Result<VerifyReport, HarnessError> {
    let k = inst.k();
    if k < 3 {
        return Err(HarnessError::Input("k must be at least 3".into()));
    }
    let (mut report, witness) = VerifyReport::new(inst, Some(params.seed))?;
    match mode {
        GeneralMode::NoPaths => {
            if report.instance.kind != InstanceKind::No {
                return Err(HarnessError::Input(format!("no-paths needs an instance without {k} orthogonal vectors")));
            }
            let mut f = NoPathFindings { pairs: params.pairs, lengths: Vec::new(), failures: Vec::new() };
            for i in 0..params.pairs as u64 {
                let s = params.seed.wrapping_mul(1_000_003).wrapping_add(2 * i);
                let h = random_valid_configuration(inst, s, DEFAULT_RETRIES).map_err(|e| HarnessError::Input(e.to_string()))?;
                let hp = random_valid_configuration(inst, s + 1, DEFAULT_RETRIES).map_err(|e| HarnessError::Input(e.to_string()))?;
                match no_case_path(&h, &hp, inst) {
                    Ok(p) => f.lengths.push(p.iter().map(|s| s.weight()).sum()),
                    Err(e) => f.failures.push(format!("pair {i}: {e}")),
                }
            }
            report.no_paths = Some(f);
        }
        GeneralMode::YesBound => {
            let Some(w) = witness else {
                return Err(HarnessError::Input(format!("yes-bound needs {k} orthogonal vectors")));
            };
            let budget = params.budget.unwrap_or(2 * k - 2);
            let sweep_limit = params.sweep_limit.unwrap_or(2 * k + 1);
            let cp = CertifyParams { budget, cap: params.cap, ..Default::default() };
            let mut y = YesBoundFindings { budget, cap: params.cap, certificate: None, budget_exceeded: false, first_reach_depth: None, sweep_limit, sweep_done: false };
            match yes_case_bound(inst, &w, &cp) {
                Ok(c) => {
                    y.first_reach_depth = c.first_reach_depth;
                    y.sweep_done = c.reached || sweep_limit <= budget;
                    y.certificate = Some(c);
                }
                Err(CertifyError::BudgetExceeded { .. }) => y.budget_exceeded = true,
                Err(e) => return Err(HarnessError::Input(e.to_string())),
            }
            if y.certificate.as_ref().is_some_and(|c| !c.reached) && sweep_limit > budget {
                let sp = CertifyParams { budget: sweep_limit, cap: params.cap, ..Default::default() };
                if let Ok(c) = yes_case_bound(inst, &w, &sp) {
                    y.first_reach_depth = c.first_reach_depth;
                    y.sweep_done = true;
                }
            }
            report.yes_bound = Some(y);
        }
    }
    report.verdicts = report.derive_verdicts();
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub seed: u64,
    pub vertices: u64,
    pub edges: u64,
    pub l1: u64,
    pub l2: u64,
    pub build_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub k: usize,
    pub d: usize,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln V` against `ln n` over per-n means.
    pub slope: f64,
    /// Every row satisfies `V <= n^{k-1} + n^{k-2} d^{2(k-1)}`.
    pub within_bound: bool,
}

/// Builds no-instance gadgets for each `n` and seed and fits the growth rate.
pub fn scaling(k: usize, d: usize, ns: &[usize], seeds: &[u64]) -> Result<ScalingReport, HarnessError> {
    if k != 4 && k != 5 {
        return Err(HarnessError::Input(format!("scaling runs for k = 4 or 5, not {k}")));
    }
    let mut rows = Vec::new();
    for &n in ns {
        for &seed in seeds {
            let inst = crate::ov::generate_no_instance(k, d, n, seed, Default::default()).map_err(|e| HarnessError::Input(e.to_string()))?;
            let t = Instant::now();
            let gadget = SmallGadget::index(&inst)?;
            let g = gadget.build_graph();
            rows.push(ScalingRow {
                n,
                seed,
                vertices: gadget.num_vertices() as u64,
                edges: g.num_edges(),
                l1: gadget.num_l1() as u64,
                l2: gadget.num_l2() as u64,
                build_ms: ms(t),
            });
        }
    }
    let within_bound = rows.iter().all(|r| {
        let n = r.n as u64;
        r.vertices <= n.pow(k as u32 - 1) + n.pow(k as u32 - 2) * (d as u64).pow(2 * (k as u32 - 1))
    });
    let slope = loglog_slope(&rows);
    Ok(ScalingReport { k, d, rows, slope, within_bound })
}

pub fn loglog_slope(rows: &[ScalingRow]) -> f64 {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort();
    ns.dedup();
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let vs: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.vertices as f64).collect();
            ((n as f64).ln(), (vs.iter().sum::<f64>() / vs.len() as f64).ln())
        })
        .collect();
    slope(&pts)
}

/// Least-squares slope through `(x, y)` points.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,seed,vertices,edges,l1,l2,build_ms\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{},{},{:.3}\n", r.n, r.seed, r.vertices, r.edges, r.l1, r.l2, r.build_ms));
        }
        s
    }
}
