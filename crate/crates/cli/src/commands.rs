//! Subcommand bodies. Each returns the process exit code or a [`Failure`].

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use dynnet_core::analysis::{
    bounds_for, build_rounds_graph, build_strict_sets, max_out_degree_witness, verify_strict_inequalities,
    StrictRoundsGraph,
};
use dynnet_core::constructions::construct as build_schedule;
use dynnet_core::format::SequenceFile;
use dynnet_core::search::{exact_worst_case, greedy_adversary, GreedyPolicy, SearchConfig};
use dynnet_core::verify::{verify_grid, GridSpec};
use dynnet_core::{run, Error, Graph, Model, ModelSpec, NodeSet, Objective, RoundSequence};

use crate::{Certificate, ObjectiveArg};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ObjectiveNotReached { .. } => 3,
            Error::Unbounded | Error::MemoryBudgetExceeded { .. } | Error::Io(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn objective_of(arg: ObjectiveArg, k: usize) -> Objective {
    match arg {
        ObjectiveArg::Broadcast => Objective::Broadcast,
        ObjectiveArg::Cover => Objective::Cover(k),
        ObjectiveArg::Kbroadcast => Objective::KBroadcast(k),
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    // A closed pipe downstream is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn load(path: &Path) -> Result<RoundSequence, Failure> {
    Ok(SequenceFile::read(path)?.to_sequence()?)
}

pub fn simulate(path: &Path, objective: ObjectiveArg, k: Option<usize>, json: bool) -> CmdResult {
    let seq = load(path)?;
    let objective = objective_of(objective, k.unwrap_or(seq.spec().k));
    if objective.k() == 0 || objective.k() > seq.spec().n {
        return Err(Failure { code: 2, message: format!("objective parameter k must lie in 1..={}", seq.spec().n) });
    }
    let outcome = run(&seq, objective);
    if json {
        let value = match &outcome {
            Ok(res) => serde_json::json!({ "reached": true, "result": res }),
            Err(Error::ObjectiveNotReached { rounds, final_product }) => serde_json::json!({
                "reached": false,
                "objective": objective,
                "rounds": rounds,
                "final_product": final_product,
            }),
            Err(_) => serde_json::Value::Null,
        };
        if !value.is_null() {
            print_json(&value)?;
        }
    } else {
        let shown = match &outcome {
            Ok(res) => res.time,
            Err(Error::ObjectiveNotReached { rounds, .. }) => *rounds,
            Err(_) => 0,
        };
        print!("{}", table(&seq, objective, shown));
    }
    match outcome {
        Ok(res) => {
            if !json {
                println!("{objective} reached at round {} (witness {})", res.time, res.witness);
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Err(e.into()),
    }
}

/// One line per round: edges of the raw graph, largest out-row of the
/// product and whether the objective holds.
fn table(seq: &RoundSequence, objective: Objective, rounds: usize) -> String {
    let n = seq.spec().n;
    let mut s = format!("{:>5} {:>6} {:>8} {:>6}\n", "round", "edges", "max_out", "holds");
    let Ok(mut product) = Graph::identity(n) else { return s };
    for (i, raw) in seq.iter().take(rounds).enumerate() {
        let Ok(next) = product.product(&raw.with_self_loops()) else { break };
        product = next;
        let max_out = product.out_rows().iter().map(|r| r.len()).max().unwrap_or(0);
        let holds = objective.holds(&product);
        let _ = writeln!(s, "{:>5} {:>6} {:>8} {:>6}", i + 1, raw.without_self_loops().edge_count(), max_out, holds);
    }
    s
}

pub fn search(
    model: Model,
    n: usize,
    k: usize,
    objective: Option<ObjectiveArg>,
    threads: Option<usize>,
    mem_cap: usize,
    allow_large: bool,
) -> CmdResult {
    let spec = ModelSpec::new(model, n, if model == Model::Trees { 1 } else { k })?;
    let objective = objective.map_or_else(|| Objective::natural_for(&spec), |o| objective_of(o, spec.k));
    let config = SearchConfig { threads, mem_cap, allow_large };
    let result = exact_worst_case(&spec, objective, &config)?;
    print_json(&result.to_json())?;
    Ok(ExitCode::SUCCESS)
}

pub fn construct(model: Model, n: usize, k: usize, out: &Path) -> CmdResult {
    let spec = ModelSpec::new(model, n, if model == Model::Trees { 1 } else { k })?;
    let (c, objective) = build_schedule(&spec)?;
    SequenceFile::from_sequence(&c.seq, None).write(out)?;
    println!("wrote {} rounds to {}; {objective} forced until round {}", c.seq.rounds().len(), out.display(), c.claimed_time);
    Ok(ExitCode::SUCCESS)
}

pub fn greedy(model: Model, n: usize, k: usize, policy: GreedyPolicy, horizon: usize, seed: u64, out: &Path) -> CmdResult {
    let spec = ModelSpec::new(model, n, if model == Model::Trees { 1 } else { k })?;
    let objective = Objective::natural_for(&spec);
    let g = greedy_adversary(&spec, objective, horizon, policy, seed)?;
    SequenceFile::from_sequence(&g.sequence, Some(seed)).write(out)?;
    match g.reached_at {
        Some(t) => println!("{objective} reached at round {t}; sequence written to {}", out.display()),
        None => println!("{objective} not reached within {horizon} rounds; sequence written to {}", out.display()),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(grid: &str, samples: usize, seed: u64, threads: Option<usize>, json: bool) -> CmdResult {
    let grid: GridSpec = grid.parse()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    let report = pool.install(|| verify_grid(&grid, samples, seed));
    if json {
        print_json(&serde_json::to_value(&report).map_err(Error::from)?)?;
    } else {
        for e in &report.entries {
            let status = if e.passed() { "ok" } else { "FAIL" };
            let spec = format!("{}(n={},k={})", e.spec.model, e.spec.n, e.spec.k);
            println!("{status:<4} {:<22} {spec:<20} {}/{} {}", e.check, e.instances - e.failures, e.instances, e.detail);
        }
        let failed = report.failures().count();
        println!("{} checks, {failed} failed", report.entries.len());
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn analyze(
    path: &Path,
    certificate: Certificate,
    avoid: &[usize],
    k: Option<usize>,
    tprime: Option<usize>,
    dot: Option<&Path>,
) -> CmdResult {
    let seq = load(path)?;
    let spec = *seq.spec();
    let default_len = seq.len().unwrap_or_else(|| bounds_for(&spec).upper_int);
    let t_prime = tprime.unwrap_or(default_len);
    let (value, dot_text, ok) = match certificate {
        Certificate::RoundsGraph => {
            if let Some(&bad) = avoid.iter().find(|&&p| p >= spec.n) {
                return Err(Error::NodeOutOfRange { node: bad, n: spec.n }.into());
            }
            let avoid: NodeSet = avoid.iter().copied().collect();
            let needed = dynnet_core::analysis::trees_upper(spec.n) + avoid.len();
            let trace = seq.to_trace(needed.max(t_prime))?;
            let rg = build_rounds_graph(&trace, avoid)?;
            let (id, degree) = max_out_degree_witness(&rg);
            let broadcast = rg.witness_has_broadcast(&trace, id);
            let ok = degree >= spec.n && broadcast;
            let value = serde_json::json!({
                "certificate": "rounds-graph",
                "n": spec.n,
                "avoid": avoid,
                "round_count": rg.round_count,
                "threshold": rg.threshold,
                "roots": rg.roots,
                "edge_count": rg.edge_count(),
                "witness": { "node": rg.node(id), "process": rg.process_of(id), "out_degree": degree, "has_broadcast": broadcast },
                "passed": ok,
            });
            (value, rg.to_dot(), ok)
        }
        Certificate::StrictSets => {
            let k = k.unwrap_or(spec.k);
            let trace = seq.to_trace(t_prime)?;
            let tr = build_strict_sets(&trace, k, t_prime)?;
            let report = verify_strict_inequalities(&trace, &tr);
            let ok = report.complete && report.passed();
            let value = serde_json::json!({
                "certificate": "strict-sets",
                "trace": tr,
                "report": report,
                "passed": ok,
            });
            (value, StrictRoundsGraph::from_trace(&tr).to_dot(), ok)
        }
    };
    if let Some(dot) = dot {
        std::fs::write(dot, dot_text).map_err(Error::from)?;
    }
    print_json(&value)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn bounds(grid: &str) -> CmdResult {
    let grid: GridSpec = grid.parse()?;
    println!("model,n,k,lower,upper_real,upper_int");
    for spec in grid.specs() {
        let b = bounds_for(&spec);
        println!("{},{},{},{},{:.6},{}", b.model, b.n, b.k, b.lower, b.upper_real, b.upper_int);
    }
    Ok(ExitCode::SUCCESS)
}
