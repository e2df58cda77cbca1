use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ovdiam::graph::{exact_diameter, read_dump, two_approx, write_dump, DiameterMode};
use ovdiam::harness::{self, GeneralMode, GeneralParams, HarnessError, SmallParams, VerifyReport};
use ovdiam::ov::{generate_no_instance, generate_yes_instance, has_j_orthogonal, solve_kov_bruteforce, GenParams, OvError};
use ovdiam::small::build_small_graph;
use ovdiam::OvInstance;

const PASS: u8 = 0;
const INPUT: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "ovdiam", version, about = "Build and verify OV-to-Diameter gadget graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    No,
    Yes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Exact,
    TwoApprox,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    NoPaths,
    YesBound,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance.
    Gen {
        kind: Kind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report which j admit j orthogonal vectors.
    Solve { instance: PathBuf },
    /// Build the k=4 or k=5 gadget graph and write it as a `p diam` dump.
    Build {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diameter of a dumped graph.
    Diam {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Exact)]
        algo: Algo,
    },
    /// Check the diameter gap of the k=4 or k=5 gadget.
    VerifySmall {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest vertex count searched from every vertex.
        #[arg(long, default_value_t = harness::DEFAULT_FULL_CAP)]
        full_cap: usize,
    },
    /// Check the general-k construction.
    VerifyGeneral {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = ovdiam::general::certify::DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertex and edge counts of no-instance gadgets as n grows.
    Scaling {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-judge a saved report.
    Report { report: PathBuf },
}

struct Fail(u8, String);

impl From<HarnessError> for Fail {
    fn from(e: HarnessError) -> Self {
        Fail(INPUT, e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(INPUT, e.to_string())
    }
}

fn ov_fail(e: OvError) -> Fail {
    match e {
        OvError::GenerationFailed(m) => Fail(INCONCLUSIVE, m),
        e => Fail(INPUT, e.to_string()),
    }
}

fn read_instance(path: &Path) -> Result<OvInstance, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail(INPUT, format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e: OvError| Fail(INPUT, format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn finish_report(r: &VerifyReport, out: &Option<PathBuf>) -> Result<u8, Fail> {
    if let Some(p) = out {
        r.write(p)?;
    }
    for v in &r.verdicts {
        let tag = if v.inconclusive { "INCONCLUSIVE" } else if v.pass { "PASS" } else { "FAIL" };
        println!("{tag:<12} {:<18} {}", v.name, v.detail);
    }
    Ok(r.exit_code() as u8)
}

fn run(cmd: Cmd) -> Result<u8, Fail> {
    match cmd {
        Cmd::Gen { kind, k, d, n, seed, out } => {
            let p = GenParams::default();
            let inst = match kind {
                Kind::No => generate_no_instance(k, d, n, seed, p).map_err(ov_fail)?,
                Kind::Yes => generate_yes_instance(k, d, n, seed, p).map_err(ov_fail)?.0,
            };
            emit(&out, &inst.to_string())?;
            Ok(PASS)
        }
        Cmd::Solve { instance } => {
            let inst = read_instance(&instance)?;
            let rows: Vec<serde_json::Value> = (1..=inst.k())
                .map(|j| {
                    let w = if has_j_orthogonal(&inst, j) { solve_kov_bruteforce(&inst, j) } else { None };
                    serde_json::json!({
                        "j": j,
                        "orthogonal": w.is_some(),
                        "witness": w.map(|w| w.indices.iter().map(|i| i + 1).collect::<Vec<_>>()),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).unwrap());
            Ok(PASS)
        }
        Cmd::Build { instance, out } => {
            let inst = read_instance(&instance)?;
            let (g, gadget) = build_small_graph(&inst).map_err(|e| Fail(INPUT, e.to_string()))?;
            match &out {
                Some(p) => write_dump(&g, std::io::BufWriter::new(fs::File::create(p)?))?,
                None => write_dump(&g, std::io::BufWriter::new(std::io::stdout().lock()))?,
            }
            eprintln!("V = {} E = {} (L1 {}, L2 {})", g.num_vertices(), g.num_edges(), gadget.num_l1(), gadget.num_l2());
            Ok(PASS)
        }
        Cmd::Diam { graph, algo } => {
            let f = fs::File::open(&graph).map_err(|e| Fail(INPUT, format!("{}: {e}", graph.display())))?;
            let g = read_dump(BufReader::new(f)).map_err(|e| Fail(INPUT, e.to_string()))?;
            match algo {
                Algo::Exact => {
                    let r = exact_diameter(&g, &DiameterMode::Full).map_err(|e| Fail(INPUT, e.to_string()))?;
                    println!("diameter {} witness {} {}", r.diameter, r.witness.0, r.witness.1);
                }
                Algo::TwoApprox => {
                    let e = two_approx(&g).map_err(|e| Fail(INPUT, e.to_string()))?;
                    println!("estimate {e} source 0");
                }
            }
            Ok(PASS)
        }
        Cmd::VerifySmall { instance, out, full_cap } => {
            let inst = read_instance(&instance)?;
            let r = harness::verify_small(&inst, None, &SmallParams { full_cap, ..Default::default() })?;
            finish_report(&r, &out)
        }
        Cmd::VerifyGeneral { instance, mode, pairs, seed, budget, cap, out } => {
            let inst = read_instance(&instance)?;
            let mode = match mode {
                Mode::NoPaths => GeneralMode::NoPaths,
                Mode::YesBound => GeneralMode::YesBound,
            };
            let params = GeneralParams { pairs, seed, budget, cap, ..Default::default() };
            let r = harness::verify_general(&inst, mode, &params)?;
            finish_report(&r, &out)
        }
        Cmd::Scaling { k, d, n, seeds, out } => {
            if n.is_empty() {
                return Err(Fail(INPUT, "--n needs at least one value".into()));
            }
            let r = harness::scaling(k, d, &n, &seeds)?;
            emit(&out, &r.to_csv())?;
            eprintln!("slope {:.3} within bound {}", r.slope, r.within_bound);
            Ok(PASS)
        }
        Cmd::Report { report } => {
            let r = VerifyReport::read(&report)?;
            let derived = r.derive_verdicts();
            let same = derived == r.verdicts;
            println!("replay {}", if same { "matches" } else { "differs" });
            let rr = VerifyReport { verdicts: derived, ..r };
            let code = finish_report(&rr, &None)?;
            Ok(if same { code } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    if let Some(t) = std::env::var("DIAM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
