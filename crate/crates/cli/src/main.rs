use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stww::bipartize::bipartize;
use stww::bounds::{exact_tww_bruteforce, greedy_sequence_with, TieBreak, BRUTEFORCE_LIMIT};
use stww::bwmc::{estimate_bounds, solve_bwmc_traced};
use stww::cnf::{format_decimal, format_rational, parse_dimacs, serialize_dimacs, ParsedCnf};
use stww::error::{EncodeError, SolverError};
use stww::generators::{
    gen_grid, gen_hitting_set_formula, gen_partitioned_clique_formula, gen_random_ksat, gen_subdivided_clique,
    random_partite_graph, PartiteGraph, SignPolicy,
};
use stww::oracle::{bsat_oracle, bwmc_oracle};
use stww::sequence::{verify, ContractionSequence};
use stww::solver::{exact_tww_via_solver, ExternalSolver, SOLVER_ENV};
use stww::trigraph::{incidence_graph, SignedTrigraph};

const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_ENV: u8 = 71;

#[derive(Parser)]
#[command(name = "stww", version, about = "Signed twin-width of CNF formulas and bounded-ones weighted model counting")]
struct Cli {
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a sequence and report its width
    Verify {
        /// DIMACS formula or signed edge list
        input: PathBuf,
        seq: PathBuf,
        /// require every step to merge two vertices of the same side
        #[arg(long)]
        bipartite: bool,
    },
    /// Turn a sequence into a bipartite one
    Bipartize {
        input: PathBuf,
        seq: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Greedy upper bound
    Greedy {
        input: PathBuf,
        #[arg(long)]
        bipartite: bool,
        /// smallest | largest | a seed
        #[arg(long, default_value = "smallest")]
        tie: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact bipartite width via a SAT solver (or brute force)
    Exact {
        input: PathBuf,
        /// solver command, given the DIMACS file as last argument
        #[arg(long, env = SOLVER_ENV)]
        solver: Option<String>,
        /// seconds per solver call
        #[arg(long)]
        timeout: Option<f64>,
        /// exhaustive search instead of a solver (small graphs only)
        #[arg(long, conflicts_with = "solver")]
        bruteforce: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Weighted count of models with at most K ones
    Bwmc {
        cnf: PathBuf,
        seq: PathBuf,
        #[arg(short, allow_negative_numbers = true)]
        k: i64,
        /// per-level profile counts against the closed-form bound
        #[arg(long)]
        stats: bool,
    },
    /// Brute-force reference answers
    Oracle {
        #[arg(value_enum)]
        problem: OracleProblem,
        cnf: PathBuf,
        #[arg(short, allow_negative_numbers = true)]
        k: i64,
    },
    /// Generate instances
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleProblem {
    Bwmc,
    Bsat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Signs {
    Positive,
    Alternating,
    Random,
}

#[derive(Args)]
struct SignArgs {
    #[arg(long, value_enum, default_value = "positive")]
    signs: Signs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SignArgs {
    fn policy(&self) -> SignPolicy {
        match self.signs {
            Signs::Positive => SignPolicy::AllPositive,
            Signs::Alternating => SignPolicy::Alternating,
            Signs::Random => SignPolicy::Random(self.seed),
        }
    }
}

#[derive(Subcommand)]
enum GenCmd {
    /// d-dimensional grid as a signed edge list
    Grid {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        side: usize,
        #[command(flatten)]
        signs: SignArgs,
    },
    /// subdivided clique as a signed edge list
    Subclique {
        #[arg(short)]
        d: usize,
        /// subdivisions per clique edge, comma separated, lexicographic pairs
        #[arg(long, value_delimiter = ',')]
        counts: Vec<usize>,
        #[command(flatten)]
        signs: SignArgs,
    },
    /// hitting-set formula
    Hitset {
        #[arg(long)]
        universe: usize,
        /// sets as `1,2;2,3`
        #[arg(long)]
        sets: String,
        #[arg(short)]
        k: usize,
    },
    /// partitioned-clique formula, from explicit parts/edges or at random
    Partclique {
        /// parts as `1,2;3,4`
        #[arg(long, required_unless_present = "random")]
        parts: Option<String>,
        /// edges as `1-3,2-4`
        #[arg(long, default_value = "")]
        edges: String,
        /// random graph: parts, part size, edge probability
        #[arg(long, num_args = 3, value_names = ["D", "SIZE", "P"])]
        random: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// random formula with fixed clause width
    Ksat {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Failure classes with their exit codes.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Env(anyhow::Error),
    /// input is well-formed but the sequence is not valid
    Invalid(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, text: &str, value: Value) {
        if self.json {
            println!("{value}");
        } else {
            println!("{text}");
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_cnf(path: &Path) -> anyhow::Result<ParsedCnf> {
    let parsed = parse_dimacs(&read(path)?).with_context(|| format!("{}", path.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed)
}

/// A DIMACS formula (as its incidence graph) or a signed edge list.
fn load_graph(path: &Path) -> anyhow::Result<SignedTrigraph> {
    let text = read(path)?;
    let is_graph = text
        .lines()
        .map(str::trim)
        .find(|l| l.starts_with("p "))
        .is_some_and(|l| l.split_whitespace().nth(1) == Some("graph"));
    if is_graph {
        SignedTrigraph::parse_edge_list(&text).with_context(|| format!("{}", path.display()))
    } else {
        Ok(incidence_graph(&load_cnf(path)?.formula))
    }
}

fn load_seq(path: &Path) -> anyhow::Result<ContractionSequence> {
    ContractionSequence::parse_tws(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn write_or_print(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_width(mut seq: ContractionSequence, width: usize) -> ContractionSequence {
    seq.declared_width = Some(width);
    seq
}

fn run(cli: Cli) -> Outcome {
    let out = Out { json: cli.json };
    match cli.command {
        Cmd::Verify { input, seq, bipartite } => {
            let g = load_graph(&input)?;
            let seq = load_seq(&seq)?;
            let report = verify(&g, &seq, bipartite);
            if let Some((step, reason)) = &report.failure {
                return Err(Failure::Invalid(format!("step {step}: {reason}")));
            }
            if let Some(d) = seq.declared_width {
                if let Some(step) = report.first_step_exceeding(d) {
                    return Err(Failure::Invalid(format!(
                        "step {step} has red degree {} above declared width {d}",
                        report.per_step_max_red[step]
                    )));
                }
            }
            out.emit(
                &format!("width {}", report.width),
                json!({
                    "width": report.width,
                    "steps": seq.len(),
                    "bipartite": report.is_bipartite_sequence,
                    "final_vertices": report.final_vertices,
                }),
            );
        }
        Cmd::Bipartize { input, seq, output } => {
            let g = load_graph(&input)?;
            let seq = load_seq(&seq)?;
            let r = bipartize(&g, &seq).map_err(|e| Failure::Invalid(e.to_string()))?;
            let width = verify(&g, &r.seq, true).width;
            let text = with_width(r.seq, width).to_tws();
            summary(&out, output.as_deref(), &text, json!({"input_width": r.input_width, "output_width": width}), &format!("input width {}\noutput width {width}", r.input_width))?;
        }
        Cmd::Greedy { input, bipartite, tie, output } => {
            let g = load_graph(&input)?;
            let tie = match tie.as_str() {
                "smallest" => TieBreak::Smallest,
                "largest" => TieBreak::Largest,
                s => TieBreak::Seeded(s.parse().map_err(|_| Failure::Usage(anyhow!("bad --tie `{s}`")))?),
            };
            let seq = greedy_sequence_with(&g, bipartite, tie);
            let width = verify(&g, &seq, bipartite).width;
            let text = with_width(seq, width).to_tws();
            summary(&out, output.as_deref(), &text, json!({"width": width}), &format!("width {width}"))?;
        }
        Cmd::Exact { input, solver, timeout, bruteforce, output } => {
            let g = load_graph(&input)?;
            if bruteforce {
                if g.num_vertices() > BRUTEFORCE_LIMIT {
                    return Err(Failure::Usage(anyhow!(
                        "brute force is limited to {BRUTEFORCE_LIMIT} vertices, graph has {}",
                        g.num_vertices()
                    )));
                }
                let (width, seq) = exact_tww_bruteforce(&g, true).map_err(|e| Failure::Data(e.into()))?;
                let text = with_width(seq, width).to_tws();
                return summary(&out, output.as_deref(), &text, json!({"width": width, "exact": true}), &width.to_string());
            }
            let Some(cmd) = solver else {
                return Err(Failure::Env(anyhow!("no SAT solver given; use --solver or set {SOLVER_ENV}")));
            };
            let solver = ExternalSolver::new(&cmd, timeout.map(Duration::from_secs_f64))
                .map_err(|e| Failure::Usage(e.into()))?;
            let r = exact_tww_via_solver(&g, &solver).map_err(|e| match e {
                EncodeError::Solver(SolverError::Spawn { .. }) => Failure::Env(e.into()),
                EncodeError::Solver(_) => Failure::Env(e.into()),
                other => Failure::Data(other.into()),
            })?;
            let shown = if r.exact { r.width.to_string() } else { format!("*{}", r.width) };
            let text = with_width(r.seq, r.width).to_tws();
            summary(&out, output.as_deref(), &text, json!({"width": r.width, "exact": r.exact}), &shown)?;
        }
        Cmd::Bwmc { cnf, seq, k, stats } => {
            let parsed = load_cnf(&cnf)?;
            let seq = load_seq(&seq)?;
            if let Some(warn) = feasibility_warning(&parsed, &seq, k) {
                eprintln!("warning: {warn}");
            }
            let o = solve_bwmc_traced(&parsed.formula, &parsed.weights, k, &seq, |_, _| {}).map_err(|e| match e {
                stww::error::BwmcError::NegativeBudget(_) => Failure::Usage(e.into()),
                stww::error::BwmcError::Sequence(_) | stww::error::BwmcError::InconsistentStep { .. } => {
                    Failure::Invalid(e.to_string())
                }
                other => Failure::Data(other.into()),
            })?;
            let kk = k.max(0) as usize;
            let levels: Vec<Value> = o
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "level": l.level,
                        "regions": l.regions,
                        "profiles": l.profiles,
                        "large_case_regions": l.large_case_regions,
                        "bound": estimate_bounds(l.level, kk, o.width).s_n.to_string(),
                    })
                })
                .collect();
            if stats && !out.json {
                for l in &levels {
                    eprintln!(
                        "level {} regions {} profiles {} large {} bound {}",
                        l["level"], l["regions"], l["profiles"], l["large_case_regions"], l["bound"].as_str().unwrap()
                    );
                }
            }
            let exact = format_rational(&o.value);
            let mut value = json!({
                "value": exact,
                "decimal": format_decimal(&o.value, 6),
                "width": o.width,
                "t": o.t,
                "max_profiles": o.levels.iter().map(|l| l.profiles).max().unwrap_or(0),
            });
            if stats {
                value["levels"] = Value::Array(levels);
            }
            out.emit(
                &format!("{exact}\n{}", format_decimal(&o.value, 6)),
                value,
            );
        }
        Cmd::Oracle { problem, cnf, k } => {
            let parsed = load_cnf(&cnf)?;
            match problem {
                OracleProblem::Bwmc => {
                    let v = bwmc_oracle(&parsed.formula, &parsed.weights, k).map_err(|e| Failure::Usage(e.into()))?;
                    let exact = format_rational(&v);
                    out.emit(
                        &format!("{exact}\n{}", format_decimal(&v, 6)),
                        json!({"value": exact, "decimal": format_decimal(&v, 6)}),
                    );
                }
                OracleProblem::Bsat => {
                    let m = bsat_oracle(&parsed.formula, k);
                    let witness: Option<Vec<i64>> = m.as_ref().map(|a| {
                        (1..=a.num_vars() as u32)
                            .map(|v| if a.value(v) { v as i64 } else { -(v as i64) })
                            .collect()
                    });
                    out.emit(&m.is_some().to_string(), json!({"satisfiable": m.is_some(), "model": witness}));
                }
            }
        }
        Cmd::Gen { family } => generate(family)?,
    }
    Ok(())
}

/// Sequence to `output` (or stdout), summary to stdout (or stderr when the
/// sequence took stdout). With `--json` the summary carries the sequence.
fn summary(out: &Out, output: Option<&Path>, seq_text: &str, mut value: Value, text: &str) -> Outcome {
    if out.json {
        if let Some(p) = output {
            write_or_print(Some(p), seq_text)?;
        } else {
            value["sequence"] = Value::String(seq_text.to_string());
        }
        println!("{value}");
        return Ok(());
    }
    write_or_print(output, seq_text)?;
    if output.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

/// Warns when the worst-case profile bound is far out of reach.
fn feasibility_warning(parsed: &ParsedCnf, seq: &ContractionSequence, k: i64) -> Option<String> {
    let g = incidence_graph(&parsed.formula);
    let width = verify(&g, seq, true).width;
    let est = estimate_bounds(g.num_vertices(), k.max(0) as usize, width);
    (est.s_n > stww::bwmc::BigUint::from(10u64).pow(12)).then(|| {
        format!(
            "worst-case profile bound {} (t = {}) is huge; actual records are usually far smaller",
            est.s_n, est.t
        )
    })
}


fn parse_list(text: &str, what: &str) -> Result<Vec<Vec<u32>>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|group| {
            group
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(anyhow!("bad {what} `{group}`")))
        })
        .collect()
}

fn generate(family: GenCmd) -> Outcome {
    let bad = |e: stww::error::GenError| Failure::Usage(e.into());
    match family {
        GenCmd::Grid { dim, side, signs } => {
            let g = gen_grid(dim, side, signs.policy()).map_err(bad)?;
            print!("{}", g.to_edge_list());
        }
        GenCmd::Subclique { d, counts, signs } => {
            let counts = if counts.is_empty() { vec![0; d * d.saturating_sub(1) / 2] } else { counts };
            let s = gen_subdivided_clique(d, &counts, signs.policy()).map_err(bad)?;
            let branch: Vec<String> = s.branch.iter().map(|v| v.to_string()).collect();
            println!("c branch {}", branch.join(" "));
            print!("{}", s.graph.to_edge_list());
        }
        GenCmd::Hitset { universe, sets, k } => {
            let sets = parse_list(&sets, "set")?;
            let (f, k) = gen_hitting_set_formula(universe, &sets, k).map_err(bad)?;
            println!("c k {k}");
            print!("{}", serialize_dimacs(&f, None));
        }
        GenCmd::Partclique { parts, edges, random, seed } => {
            let g = match random {
                Some(r) => {
                    let d: usize = r[0].parse().map_err(|_| Failure::Usage(anyhow!("bad D `{}`", r[0])))?;
                    let s: usize = r[1].parse().map_err(|_| Failure::Usage(anyhow!("bad SIZE `{}`", r[1])))?;
                    let p: f64 = r[2]
                        .parse()
                        .ok()
                        .filter(|p| (0.0..=1.0).contains(p))
                        .ok_or_else(|| Failure::Usage(anyhow!("bad P `{}`", r[2])))?;
                    random_partite_graph(d, s, p, seed).map_err(bad)?
                }
                None => {
                    let parts = parse_list(parts.as_deref().unwrap_or(""), "part")?;
                    let mut es = Vec::new();
                    for e in edges.split(',').filter(|s| !s.trim().is_empty()) {
                        let (u, v) = e
                            .split_once('-')
                            .and_then(|(u, v)| Some((u.trim().parse().ok()?, v.trim().parse().ok()?)))
                            .ok_or_else(|| Failure::Usage(anyhow!("bad edge `{e}`")))?;
                        es.push((u, v));
                    }
                    PartiteGraph::new(parts, es).map_err(bad)?
                }
            };
            let (f, k) = gen_partitioned_clique_formula(&g);
            println!("c k {k}");
            print!("{}", serialize_dimacs(&f, None));
        }
        GenCmd::Ksat { vars, width, clauses, seed } => {
            let f = gen_random_ksat(vars, width, clauses, seed).map_err(bad)?;
            print!("{}", serialize_dimacs(&f, None));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(e) => (EXIT_USAGE, format!("{e:#}")),
                Failure::Data(e) => (EXIT_DATA, format!("{e:#}")),
                Failure::Env(e) => (EXIT_ENV, format!("{e:#}")),
                Failure::Invalid(m) => (EXIT_INVALID, format!("invalid sequence: {m}")),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
