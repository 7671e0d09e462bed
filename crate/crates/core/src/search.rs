//! Exact worst-case objective times by memoized search over product graphs,
//! and greedy adversaries for sizes beyond exhaustive reach.
//!
//! The value of a product `G` is `f(G) = 0` when the objective holds and
//! `1 + max_H f(G ∘ (H + loops))` otherwise, with `H` ranging over the
//! family. Products only gain edges, so the recursion is well founded as
//! long as every move makes progress; a move that leaves `G` unchanged is
//! reported as [`Error::Unbounded`].

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use dashmap::DashMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissemination::{Objective, RoundSequence};
use crate::error::{Error, Result};
use crate::families::{
    enumerate_k_forests, enumerate_k_rooted_minimal, enumerate_rooted_trees, random_member, Model, ModelSpec,
    DEFAULT_EXTRA_DENSITY,
};
use crate::format::SequenceFile;
use crate::graph::{compose_row, Graph};
use crate::nodeset::NodeSet;

/// Largest tree size searched without `allow_large`.
pub const SEARCH_MAX_TREES: usize = 6;
/// Largest forest or k-rooted size searched without `allow_large`.
pub const SEARCH_MAX_OTHER: usize = 5;
/// Hard limit: the memo key packs the n×n matrix into 64 bits.
pub const SEARCH_MAX_PACKED: usize = 8;
/// Largest size accepted by [`exact_worst_case_naive`].
pub const NAIVE_MAX: usize = 3;
pub const DEFAULT_MEM_CAP: usize = 2 << 30;
/// Environment variable overriding the default memo cap (bytes).
pub const MEM_CAP_ENV: &str = "DYNNET_MEM_CAP";
/// Estimated memo cost per entry, map overhead included.
const BYTES_PER_ENTRY: usize = 32;

/// Memo cap from `DYNNET_MEM_CAP`, or 2 GiB.
pub fn mem_cap_from_env() -> usize {
    std::env::var(MEM_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MEM_CAP)
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Memo budget in bytes.
    pub mem_cap: usize,
    /// Lifts the size guards up to the enumeration limits.
    pub allow_large: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { threads: None, mem_cap: mem_cap_from_env(), allow_large: false }
    }
}

/// The adversary's moves for `spec`. k-rooted moves are the minimal members
/// (unions of k trees with distinct roots); extra edges never slow
/// dissemination down.
pub fn search_moves(spec: &ModelSpec, allow_large: bool) -> Result<Vec<Graph>> {
    let guard = match spec.model {
        Model::Trees => SEARCH_MAX_TREES,
        _ => SEARCH_MAX_OTHER,
    };
    let limit = if allow_large { SEARCH_MAX_PACKED } else { guard };
    if spec.n > limit {
        return Err(Error::Guard { what: "exact search", n: spec.n, max: limit });
    }
    match spec.model {
        Model::Trees => Ok(enumerate_rooted_trees(spec.n)?.collect()),
        Model::KForests => enumerate_k_forests(spec.n, spec.k),
        Model::KRooted => enumerate_k_rooted_minimal(spec.n, spec.k),
    }
}

type Rows = [NodeSet; SEARCH_MAX_PACKED];

fn rows_of(g: &Graph) -> Rows {
    let mut rows = [NodeSet::EMPTY; SEARCH_MAX_PACKED];
    rows[..g.n()].copy_from_slice(g.out_rows());
    rows
}

/// Memoized evaluator of `f` for one family and objective.
pub struct Searcher {
    n: usize,
    objective: Objective,
    moves: Vec<Graph>,
    move_rows: Vec<Rows>,
    memo: DashMap<u64, u8>,
    visited: AtomicU64,
    hits: AtomicU64,
    entries: AtomicUsize,
    mem_cap: usize,
}

impl Searcher {
    pub fn new(spec: &ModelSpec, objective: Objective, config: &SearchConfig) -> Result<Self> {
        let moves = search_moves(spec, config.allow_large)?;
        Self::with_moves(spec.n, objective, moves, config.mem_cap)
    }

    /// A searcher over an explicit move set of raw graphs.
    pub fn with_moves(n: usize, objective: Objective, moves: Vec<Graph>, mem_cap: usize) -> Result<Self> {
        if n == 0 || n > SEARCH_MAX_PACKED {
            return Err(Error::Guard { what: "exact search", n, max: SEARCH_MAX_PACKED });
        }
        if let Some(g) = moves.iter().find(|g| g.n() != n) {
            return Err(Error::SizeMismatch { left: n, right: g.n() });
        }
        let move_rows = moves.iter().map(|g| rows_of(&g.with_self_loops())).collect();
        Ok(Searcher {
            n,
            objective,
            moves,
            move_rows,
            memo: DashMap::new(),
            visited: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            entries: AtomicUsize::new(0),
            mem_cap,
        })
    }

    pub fn moves(&self) -> &[Graph] {
        &self.moves
    }

    pub fn states_visited(&self) -> u64 {
        self.visited.load(Ordering::Relaxed)
    }

    pub fn memo_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    /// Worst-case remaining time from the product `g`.
    pub fn value(&self, g: &Graph) -> Result<usize> {
        if g.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: g.n() });
        }
        self.f(&rows_of(g)).map(usize::from)
    }

    /// Like [`Searcher::value`], with the first level of moves in parallel.
    pub fn value_parallel(&self, g: &Graph) -> Result<usize> {
        if g.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: g.n() });
        }
        let state = rows_of(g);
        if let Some(v) = self.lookup(&state) {
            return Ok(v.into());
        }
        let v = if self.objective.witness_in_rows(&state[..self.n]).is_some() {
            0
        } else {
            let best = self
                .move_rows
                .par_iter()
                .map(|mv| self.child(&state, mv).and_then(|c| self.f(&c)))
                .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;
            best + 1
        };
        self.store(&state, v)?;
        Ok(v.into())
    }

    fn key(&self, state: &Rows) -> u64 {
        state[..self.n].iter().enumerate().fold(0, |acc, (x, r)| acc | (r.bits() << (x * self.n)))
    }

    fn lookup(&self, state: &Rows) -> Option<u8> {
        let v = self.memo.get(&self.key(state)).map(|v| *v);
        if v.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        v
    }

    fn store(&self, state: &Rows, v: u8) -> Result<()> {
        self.visited.fetch_add(1, Ordering::Relaxed);
        if self.memo.insert(self.key(state), v).is_none() {
            let entries = self.entries.fetch_add(1, Ordering::Relaxed) + 1;
            if entries.saturating_mul(BYTES_PER_ENTRY) > self.mem_cap {
                return Err(Error::MemoryBudgetExceeded { cap: self.mem_cap });
            }
        }
        Ok(())
    }

    fn child(&self, state: &Rows, mv: &Rows) -> Result<Rows> {
        let mut next = [NodeSet::EMPTY; SEARCH_MAX_PACKED];
        for x in 0..self.n {
            next[x] = compose_row(state[x], &mv[..self.n]);
        }
        if next == *state {
            return Err(Error::Unbounded);
        }
        Ok(next)
    }

    fn f(&self, state: &Rows) -> Result<u8> {
        if let Some(v) = self.lookup(state) {
            return Ok(v);
        }
        let v = if self.objective.witness_in_rows(&state[..self.n]).is_some() {
            0
        } else {
            let mut best = 0;
            for mv in &self.move_rows {
                best = best.max(self.f(&self.child(state, mv)?)?);
            }
            best + 1
        };
        self.store(state, v)?;
        Ok(v)
    }

    /// A maximizing sequence of raw moves from `start`: at each step the
    /// first move whose child has value one less.
    pub fn optimal_sequence(&self, start: &Graph) -> Result<Vec<Graph>> {
        let mut state = rows_of(start);
        let mut v = self.f(&state)?;
        let mut seq = Vec::with_capacity(v.into());
        while v > 0 {
            let mut advanced = false;
            for (mv, raw) in self.move_rows.iter().zip(&self.moves) {
                let next = self.child(&state, mv)?;
                if self.f(&next)? == v - 1 {
                    seq.push(raw.clone());
                    state = next;
                    v -= 1;
                    advanced = true;
                    break;
                }
            }
            assert!(advanced, "some move realizes the maximum");
        }
        Ok(seq)
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub spec: ModelSpec,
    pub objective: Objective,
    /// Exact worst-case objective time.
    pub value: usize,
    /// One sequence of raw graphs achieving `value`.
    pub optimal_sequence: RoundSequence,
    pub states_visited: u64,
    pub memo_hits: u64,
}

impl SearchResult {
    /// JSON report; the sequence is embedded in sequence-file form.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "objective": self.objective,
            "value": self.value,
            "states_visited": self.states_visited,
            "memo_hits": self.memo_hits,
            "optimal_sequence": SequenceFile::from_sequence(&self.optimal_sequence, None),
        })
    }
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Exact worst-case time of `objective` against the family `spec`.
pub fn exact_worst_case(spec: &ModelSpec, objective: Objective, config: &SearchConfig) -> Result<SearchResult> {
    let searcher = Searcher::new(spec, objective, config)?;
    let start = Graph::identity(spec.n)?;
    let value = with_pool(config.threads, || searcher.value_parallel(&start))??;
    let moves = searcher.optimal_sequence(&start)?;
    debug_assert_eq!(moves.len(), value);
    Ok(SearchResult {
        spec: *spec,
        objective,
        value,
        optimal_sequence: RoundSequence::new(*spec, moves)?,
        states_visited: searcher.states_visited(),
        memo_hits: searcher.memo_hits(),
    })
}

/// Plain recursion without a memo table, for cross-checking at tiny `n`.
pub fn exact_worst_case_naive(spec: &ModelSpec, objective: Objective) -> Result<usize> {
    if spec.n > NAIVE_MAX {
        return Err(Error::Guard { what: "unmemoized search", n: spec.n, max: NAIVE_MAX });
    }
    let moves: Vec<Graph> = search_moves(spec, false)?.iter().map(Graph::with_self_loops).collect();
    fn go(g: &Graph, objective: Objective, moves: &[Graph]) -> Result<usize> {
        if objective.holds(g) {
            return Ok(0);
        }
        let mut best = 0;
        for mv in moves {
            let next = g.product(mv)?;
            if next == *g {
                return Err(Error::Unbounded);
            }
            best = best.max(go(&next, objective, moves)?);
        }
        Ok(best + 1)
    }
    go(&Graph::identity(spec.n)?, objective, &moves)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GreedyPolicy {
    /// Fewest new edges in the product.
    MinNewEdges,
    /// Smallest maximum out-row of the product.
    MinMaxOutRow,
}

impl GreedyPolicy {
    pub fn metric(self, before: &Graph, after: &Graph) -> usize {
        match self {
            GreedyPolicy::MinNewEdges => after.edge_count() - before.edge_count(),
            GreedyPolicy::MinMaxOutRow => after.out_rows().iter().map(|r| r.len()).max().unwrap_or(0),
        }
    }
}

/// Candidates per round when the family is too large to enumerate.
pub const GREEDY_SAMPLES: usize = 256;

#[derive(Clone, Debug)]
pub struct GreedyRun {
    pub sequence: RoundSequence,
    /// Policy metric of the product after each chosen round.
    pub metrics: Vec<usize>,
    /// Round at which the objective was reached, if within the horizon.
    pub reached_at: Option<usize>,
}

fn greedy_candidates(spec: &ModelSpec) -> Option<Vec<Graph>> {
    let enumerable = match spec.model {
        Model::Trees => spec.n <= 6,
        Model::KForests => spec.n <= 5,
        Model::KRooted => spec.n <= 4,
    };
    enumerable.then(|| search_moves(spec, true).ok()).flatten()
}

/// A raw graph with its looped form and its serialized tie-break key.
fn candidate(raw: Graph) -> (Graph, Graph, String) {
    let looped = raw.with_self_loops();
    let key = serde_json::to_string(&raw).expect("graphs always serialize");
    (raw, looped, key)
}

/// Picks each round's graph to minimize `policy` on the next product; ties go
/// to the smallest serialized graph. Stops once the objective holds.
pub fn greedy_adversary(
    spec: &ModelSpec,
    objective: Objective,
    horizon: usize,
    policy: GreedyPolicy,
    seed: u64,
) -> Result<GreedyRun> {
    if horizon == 0 {
        return Err(Error::InvalidSpec("greedy horizon must be at least 1".into()));
    }
    let fixed: Option<Vec<(Graph, Graph, String)>> = greedy_candidates(spec)
        .map(|gs| gs.into_iter().map(candidate).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut product = Graph::identity(spec.n)?;
    let mut rounds = Vec::new();
    let mut metrics = Vec::new();
    let mut reached_at = objective.holds(&product).then_some(0);
    while reached_at.is_none() && rounds.len() < horizon {
        let sampled;
        let candidates = match &fixed {
            Some(c) => c,
            None => {
                sampled = (0..GREEDY_SAMPLES)
                    .map(|_| candidate(random_member(spec, DEFAULT_EXTRA_DENSITY, &mut rng)))
                    .collect::<Vec<_>>();
                &sampled
            }
        };
        let (raw, next, metric) = candidates
            .iter()
            .map(|(raw, looped, key)| {
                let next = product.product_unchecked(looped);
                (policy.metric(&product, &next), key, raw, next)
            })
            .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
            .map(|(m, _, raw, next)| (raw.clone(), next, m))
            .expect("families are nonempty");
        product = next;
        rounds.push(raw);
        metrics.push(metric);
        if objective.holds(&product) {
            reached_at = Some(rounds.len());
        }
    }
    Ok(GreedyRun { sequence: RoundSequence::new(*spec, rounds)?, metrics, reached_at })
}
