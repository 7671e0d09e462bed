//! The strict-sets certificate for covers on k-forests.
//!
//! A set `A = {(a_i, t_i)}` of (process, round) pairs is strict at round `t`
//! when the sets `I_t^{t_i}(a_i)` are pairwise disjoint. Starting from
//! `A_n = {(i, t')}`, each step finds the largest round `t^(s)` at which
//! `A_{s+1}` is not strict, picks a process `p_s` heard by two members and
//! merges them into `(p_s, t^(s) − 1)`. Every `A_s` covers `[n]` from its
//! rounds to `t'`, so `A_k` is a cover of size `k` and the gaps
//! `Δ_s = t^(s) − t^(s−1)` bound `t'`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{alpha, floor_beta_n, BETA};
use crate::error::{Error, Result};
use crate::families::parent_array;
use crate::graph::compose_row;
use crate::nodeset::NodeSet;
use crate::trace::ProductTrace;

pub type Pair = (usize, usize);

/// One set `A_s` with the round `t^(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrictLevel {
    pub s: usize,
    /// `A_s`, sorted.
    pub set: Vec<Pair>,
    /// `t^(s)`; `t'` for `s = n`.
    pub round: usize,
    /// `p_s`, absent for `s = n`.
    pub pivot: Option<usize>,
    /// Pairs of `A_{s+1}` dropped to form `A_s`.
    pub removed: Vec<Pair>,
    /// `(p_s, t^(s) − 1)` when it was not already in `A_{s+1}`.
    pub added: Option<Pair>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictSetsTrace {
    pub n: usize,
    pub k: usize,
    pub t_prime: usize,
    /// Levels `s = n, n−1, …` down to `k` when complete.
    pub levels: Vec<StrictLevel>,
    /// False when some `A_{s+1}` stayed strict down to round 1.
    pub complete: bool,
}

impl StrictSetsTrace {
    pub fn level(&self, s: usize) -> Option<&StrictLevel> {
        let idx = self.n.checked_sub(s)?;
        self.levels.get(idx)
    }

    /// `t^(s)`.
    pub fn round(&self, s: usize) -> Option<usize> {
        self.level(s).map(|l| l.round)
    }

    /// `Δ_s = t^(s) − t^(s−1)` for `k < s ≤ n`.
    pub fn delta(&self, s: usize) -> Option<i64> {
        (s > self.k).then(|| Some(self.round(s)? as i64 - self.round(s - 1)? as i64)).flatten()
    }

    /// `(Δ_{k+1}, …, Δ_n)` for a complete trace.
    pub fn deltas(&self) -> Vec<i64> {
        (self.k + 1..=self.n).filter_map(|s| self.delta(s)).collect()
    }
}

/// First violation of strictness at round `t`: the smallest process heard by
/// two members, with the two smallest such member indices.
fn violation(sets: &[NodeSet]) -> Option<(usize, usize, usize)> {
    let (mut seen, mut dup) = (NodeSet::EMPTY, NodeSet::EMPTY);
    for &s in sets {
        dup = dup.union(seen.intersection(s));
        seen = seen.union(s);
    }
    let p = dup.first()?;
    let mut holders = (0..sets.len()).filter(|&i| sets[i].contains(p));
    Some((p, holders.next()?, holders.next()?))
}

/// In-sets `I_t^{t_i}(a_i)` for `t` running downward from `max t_i + 1` to 1.
struct BackwardScan<'a> {
    trace: &'a ProductTrace,
    set: &'a [Pair],
    t: usize,
    sets: Vec<NodeSet>,
}

impl<'a> BackwardScan<'a> {
    fn new(trace: &'a ProductTrace, set: &'a [Pair]) -> Self {
        let top = set.iter().map(|&(_, ti)| ti).max().unwrap_or(0) + 1;
        let sets = set.iter().map(|&(a, ti)| if ti + 1 == top { NodeSet::singleton(a) } else { NodeSet::EMPTY }).collect();
        BackwardScan { trace, set, t: top, sets }
    }

    /// Moves to round `t − 1`; false at round 1.
    fn step(&mut self) -> bool {
        if self.t <= 1 {
            return false;
        }
        self.t -= 1;
        let t = self.t;
        for (cur, &(a, ti)) in self.sets.iter_mut().zip(self.set) {
            if t == ti + 1 {
                *cur = NodeSet::singleton(a);
            } else if t <= ti {
                *cur = compose_row(*cur, self.trace.round(t).in_rows());
            }
        }
        true
    }
}

/// Runs the backward construction from `A_n = {(i, t')}` down to `A_k`.
pub fn build_strict_sets(trace: &ProductTrace, k: usize, t_prime: usize) -> Result<StrictSetsTrace> {
    let n = trace.n();
    if k == 0 || k > n {
        return Err(Error::InvalidSpec(format!("k = {k} must lie in 1..={n}")));
    }
    if t_prime == 0 || t_prime > trace.len() {
        return Err(Error::RoundOutOfRange { round: t_prime, len: trace.len() });
    }
    let mut set: BTreeSet<Pair> = (0..n).map(|i| (i, t_prime)).collect();
    let mut levels = vec![StrictLevel {
        s: n,
        set: set.iter().copied().collect(),
        round: t_prime,
        pivot: None,
        removed: vec![],
        added: None,
    }];
    for s in (k..n).rev() {
        let members: Vec<Pair> = set.iter().copied().collect();
        let mut scan = BackwardScan::new(trace, &members);
        let found = loop {
            if let Some(v) = violation(&scan.sets) {
                break Some(v);
            }
            if !scan.step() {
                break None;
            }
        };
        let Some((p, i, j)) = found else {
            return Ok(StrictSetsTrace { n, k, t_prime, levels, complete: false });
        };
        let t_s = scan.t;
        let q = (p, t_s - 1);
        let (removed, added) = if set.contains(&q) {
            let qi = members.binary_search(&q).expect("q is a member");
            let drop = if i != qi { i } else { j };
            (vec![members[drop]], None)
        } else {
            (vec![members[i], members[j]], Some(q))
        };
        for r in &removed {
            set.remove(r);
        }
        if let Some(q) = added {
            set.insert(q);
        }
        levels.push(StrictLevel { s, set: set.iter().copied().collect(), round: t_s, pivot: Some(p), removed, added });
    }
    Ok(StrictSetsTrace { n, k, t_prime, levels, complete: true })
}

/// The strict rounds graph on vertices `k+1..=n`: an edge `(u, s)` of weight
/// `2s − k − u` whenever `s ≤ u ≤ min(2s − k − 1, n)`.
#[derive(Clone, Debug, Serialize)]
pub struct StrictRoundsGraph {
    pub n: usize,
    pub k: usize,
    /// `(tail, head, weight)`.
    pub edges: Vec<(usize, usize, u64)>,
    /// Vertex weights `Δ_s`, when built from a trace.
    pub deltas: Option<Vec<i64>>,
}

impl StrictRoundsGraph {
    pub fn new(n: usize, k: usize) -> Self {
        let mut edges = Vec::new();
        for s in k + 1..=n {
            for u in s..=(2 * s - k - 1).min(n) {
                edges.push((u, s, (2 * s - k - u) as u64));
            }
        }
        StrictRoundsGraph { n, k, edges, deltas: None }
    }

    pub fn from_trace(tr: &StrictSetsTrace) -> Self {
        let mut g = Self::new(tr.n, tr.k);
        g.deltas = Some(tr.deltas());
        g
    }

    pub fn weighted_out_degree(&self, s: usize) -> u64 {
        self.edges.iter().filter(|e| e.0 == s).map(|e| e.2).sum()
    }

    pub fn weighted_in_degree(&self, s: usize) -> u64 {
        self.edges.iter().filter(|e| e.1 == s).map(|e| e.2).sum()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strict_rounds {\n");
        for s in self.k + 1..=self.n {
            match &self.deltas {
                Some(d) => {
                    let _ = writeln!(out, "  {s} [label=\"{s} (Δ={})\"];", d[s - self.k - 1]);
                }
                None => {
                    let _ = writeln!(out, "  {s};");
                }
            }
        }
        for &(u, s, w) in &self.edges {
            let _ = writeln!(out, "  {u} -> {s} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// One family of inequalities evaluated on a trace.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// `lhs <= rhs`, `lhs >= rhs` or `lhs == rhs`.
    pub relation: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Instance with the least slack: `(where, lhs, rhs)`.
    pub tightest: Option<(String, i64, i64)>,
    pub first_failure: Option<(String, i64, i64)>,
}

impl InequalityCheck {
    fn new(name: &'static str, relation: &'static str) -> Self {
        InequalityCheck { name, relation, instances: 0, failures: 0, tightest: None, first_failure: None }
    }

    fn record(&mut self, at: impl FnOnce() -> String, lhs: i64, rhs: i64) {
        self.instances += 1;
        let slack = match self.relation {
            "<=" => rhs - lhs,
            ">=" => lhs - rhs,
            _ => -(lhs - rhs).abs(),
        };
        let failed = if self.relation == "==" { lhs != rhs } else { slack < 0 };
        let tighter = self.tightest.as_ref().is_none_or(|&(_, l, r)| {
            let old = match self.relation {
                "<=" => r - l,
                ">=" => l - r,
                _ => -(l - r).abs(),
            };
            slack < old
        });
        if failed || tighter {
            let at = at();
            if failed {
                self.failures += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some((at.clone(), lhs, rhs));
                }
            }
            if tighter {
                self.tightest = Some((at, lhs, rhs));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictReport {
    pub n: usize,
    pub k: usize,
    pub t_prime: usize,
    pub complete: bool,
    pub deltas: Vec<i64>,
    pub checks: Vec<InequalityCheck>,
}

impl StrictReport {
    pub fn passed(&self) -> bool {
        self.complete && self.checks.iter().all(InequalityCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn in_sets_at(trace: &ProductTrace, set: &[Pair], t: usize) -> Vec<NodeSet> {
    set.iter().map(|&(a, ti)| trace.in_set_unchecked(t, ti, a)).collect()
}

/// Root of the tree holding `x` in round `t`, if that round is a forest.
fn tree_root_of(trace: &ProductTrace, t: usize, x: usize) -> Option<usize> {
    let parents = parent_array(trace.round(t))?;
    let mut v = x;
    while let Some(p) = parents[v] {
        v = p;
    }
    Some(v)
}

/// Evaluates every inequality of the certificate on `tr`, which must have
/// been built from `trace`.
pub fn verify_strict_inequalities(trace: &ProductTrace, tr: &StrictSetsTrace) -> StrictReport {
    let (n, k) = (tr.n, tr.k);
    let ni = n as i64;
    let lowest = tr.n + 1 - tr.levels.len();
    let set = |s: usize| &tr.level(s).expect("level exists").set;
    let t = |s: usize| tr.round(s).expect("level exists");
    let deltas: Vec<i64> = tr.deltas();
    let delta = |s: usize| deltas[s - k - 1];
    let mut checks = Vec::new();

    let mut size = InequalityCheck::new("set-size", "==");
    let mut cover = InequalityCheck::new("cover", "==");
    let mut before = InequalityCheck::new("round-before-members", "<=");
    let mut strict_own = InequalityCheck::new("strict-after-own-round", "==");
    for s in lowest..=n {
        let a = set(s);
        size.record(|| format!("s={s}"), a.len() as i64, s as i64);
        let covered = a.iter().fold(NodeSet::EMPTY, |acc, &(ai, ti)| {
            acc.union(trace.out_set_unchecked(ti + 1, tr.t_prime, ai))
        });
        cover.record(|| format!("s={s}"), covered.len() as i64, ni);
        for &(ai, ti) in a {
            before.record(|| format!("s={s}, pair=({ai},{ti})"), t(s) as i64, ti as i64 + 1);
        }
        let strict = violation(&in_sets_at(trace, a, t(s) + 1)).is_none();
        strict_own.record(|| format!("s={s}"), strict as i64, 1);
    }

    let mut monotone = InequalityCheck::new("rounds-monotone", "<=");
    for s in lowest..n {
        monotone.record(|| format!("s={s}"), t(s) as i64, t(s + 1) as i64);
    }

    let mut inter = InequalityCheck::new("intersection", ">=");
    let mut large = InequalityCheck::new("large-set", ">=");
    for s in lowest..=n {
        let a: BTreeSet<Pair> = set(s).iter().copied().collect();
        for u in s..=n {
            let common = set(u).iter().filter(|p| a.contains(p)).count() as i64;
            let want = 2 * s as i64 - u as i64;
            inter.record(|| format!("s={s}, u={u}"), common, want);
            let big = a.iter().filter(|&&(_, ti)| t(u) <= ti + 1).count() as i64;
            large.record(|| format!("s={s}, u={u}"), big, want);
        }
    }

    let mut volume = InequalityCheck::new("volume", "<=");
    let mut degree = InequalityCheck::new("weighted-in-degree", "<=");
    let mut cumulative = InequalityCheck::new("cumulative-volume", "<=");
    let mut out_volume = InequalityCheck::new("out-edge-volume", "<=");
    let mut total = InequalityCheck::new("total-gap", "<=");
    let mut increments = InequalityCheck::new("strict-increments", "<=");
    let mut roots = InequalityCheck::new("root-in-neighbors", "<=");
    if tr.complete {
        let graph = StrictRoundsGraph::from_trace(tr);
        for s in k + 1..=n {
            let s_s: i64 = in_sets_at(trace, set(s), t(s - 1) + 1).iter().map(|x| x.len() as i64).sum();
            volume.record(|| format!("s={s}"), s_s, ni);
            let sum: i64 = (s..=(2 * s - k - 1).min(n)).map(|u| (2 * s - k - u) as i64 * delta(u)).sum();
            degree.record(|| format!("s={s}"), sum, ni);
        }
        for u in k + 1..=n {
            let bound = (u - k) as i64 * ni;
            let vol: i64 = (k + 1..=u).map(|s| delta(s) * alpha(s, k).expect("s > k") as i64).sum();
            cumulative.record(|| format!("u={u}"), vol, bound);
            let out: i64 = graph.edges.iter().filter(|e| e.0 <= u).map(|&(s, _, w)| delta(s) * w as i64).sum();
            out_volume.record(|| format!("u={u}"), out, bound);
        }
        total.record(|| "sum".into(), deltas.iter().sum(), floor_beta_n(n) as i64);

        // Every strict (A_s, t): at most k members of I = {i : t ≤ t_i + 1}
        // fail to grow between rounds t and t − 1.
        for s in k + 1..=n {
            let members = set(s);
            let mut scan = BackwardScan::new(trace, members);
            loop {
                let cur_t = scan.t;
                let strict = violation(&scan.sets).is_none();
                let current = scan.sets.clone();
                if !scan.step() {
                    break;
                }
                if strict && cur_t >= 2 {
                    let eligible: Vec<usize> = (0..members.len()).filter(|&i| cur_t <= members[i].1 + 1).collect();
                    let stuck = eligible.iter().filter(|&&i| scan.sets[i].len() <= current[i].len()).count();
                    increments.record(|| format!("s={s}, t={cur_t}"), stuck as i64, k as i64);
                }
            }
        }
    }

    // Each round whose root (of the tree holding x) x has not heard of
    // adds a member to x's in-set.
    let round_roots: Vec<Option<Vec<usize>>> = (1..=tr.t_prime)
        .map(|t| (0..n).map(|x| tree_root_of(trace, t, x)).collect::<Option<Vec<_>>>())
        .collect();
    for x in 0..n {
        for t2 in 1..=tr.t_prime {
            let mut heard = NodeSet::singleton(x);
            for t1 in (1..=t2).rev() {
                heard = compose_row(heard, trace.round(t1).in_rows());
                let missed = (t1..=t2)
                    .filter(|&t| round_roots[t - 1].as_ref().is_none_or(|r| !heard.contains(r[x])))
                    .count() as i64;
                roots.record(|| format!("x={x}, t1={t1}, t2={t2}"), missed + 1, heard.len() as i64);
            }
        }
    }

    checks.extend([
        size, cover, before, strict_own, monotone, inter, large, volume, degree, cumulative, out_volume, total,
        increments, roots,
    ]);
    StrictReport { n, k, t_prime: tr.t_prime, complete: tr.complete, deltas, checks }
}

/// Outcome of the real-valued gap lemma: from
/// `Σ_{s≤u} δ_s α_s ≤ (u−k)n` for all `u` follows `Σ δ_s ≤ βn`.
#[derive(Clone, Debug, Serialize)]
pub struct LittleDeltasReport {
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    pub sum: f64,
    pub bound: f64,
}

impl LittleDeltasReport {
    /// The implication holds on this input.
    pub fn holds(&self) -> bool {
        !self.hypothesis_holds || self.conclusion_holds
    }
}

const REL_TOL: f64 = 1e-9;

/// `deltas[i]` is `δ_{k+1+i}`.
pub fn verify_littledeltas_bound(k: usize, n: usize, deltas: &[f64]) -> LittleDeltasReport {
    assert_eq!(deltas.len(), n.saturating_sub(k), "one delta per s in k+1..=n");
    let mut hypothesis_holds = true;
    let mut volume = 0.0;
    for (i, d) in deltas.iter().enumerate() {
        let s = k + 1 + i;
        volume += d * alpha(s, k).expect("s > k") as f64;
        let bound = ((s - k) * n) as f64;
        if volume > bound * (1.0 + REL_TOL) {
            hypothesis_holds = false;
        }
    }
    let sum: f64 = deltas.iter().sum();
    let bound = BETA * n as f64;
    LittleDeltasReport { hypothesis_holds, conclusion_holds: sum <= bound * (1.0 + REL_TOL), sum, bound }
}

/// `δ_s = n / α_s`, which meets every hypothesis with equality.
pub fn extremal_deltas(k: usize, n: usize) -> Vec<f64> {
    (k + 1..=n).map(|s| n as f64 / alpha(s, k).expect("s > k") as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::forests_upper;
    use crate::families::{random_graph, ModelSpec};
    use crate::graph::Graph;

    fn forest_trace(n: usize, k: usize, len: usize, seed: u64) -> ProductTrace {
        let spec = ModelSpec::forests(n, k).unwrap();
        let rounds: Vec<Graph> = (0..len).map(|i| random_graph(&spec, seed * 7919 + i as u64)).collect();
        ProductTrace::from_rounds(n, &rounds).unwrap()
    }

    #[test]
    fn initial_set_and_sizes() {
        let trace = forest_trace(8, 2, forests_upper(8), 1);
        let tr = build_strict_sets(&trace, 2, trace.len()).unwrap();
        assert!(tr.complete);
        assert_eq!(tr.level(8).unwrap().set, (0..8).map(|i| (i, trace.len())).collect::<Vec<_>>());
        for s in 2..=8 {
            assert_eq!(tr.level(s).unwrap().set.len(), s);
        }
        let report = verify_strict_inequalities(&trace, &tr);
        for c in &report.checks {
            assert!(c.passed(), "{c:?}");
        }
        assert!(report.passed());
    }

    #[test]
    fn many_seeds_pass() {
        for seed in 0..30 {
            let n = 4 + seed as usize % 9;
            let k = 1 + seed as usize % 3;
            let trace = forest_trace(n, k, forests_upper(n), seed);
            let tr = build_strict_sets(&trace, k, trace.len()).unwrap();
            let report = verify_strict_inequalities(&trace, &tr);
            assert!(report.passed(), "n={n} k={k} seed={seed}: {:?}", report.checks.iter().find(|c| !c.passed()));
        }
    }

    #[test]
    fn trivial_k_equals_n() {
        let trace = forest_trace(4, 4, 3, 0);
        let tr = build_strict_sets(&trace, 4, 3).unwrap();
        assert!(tr.complete);
        assert!(tr.deltas().is_empty());
        assert!(verify_strict_inequalities(&trace, &tr).passed());
    }

    #[test]
    fn short_trace_is_partial() {
        // Round 1 alone cannot merge everything down to one member.
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let trace = ProductTrace::from_rounds(4, [&g]).unwrap();
        let tr = build_strict_sets(&trace, 1, 1).unwrap();
        assert!(!tr.complete);
        assert!(!verify_strict_inequalities(&trace, &tr).passed());
    }

    #[test]
    fn strict_rounds_graph_alpha() {
        for k in 1..4 {
            let g = StrictRoundsGraph::new(k + 12, k);
            for s in k + 1..=k + 12 {
                assert_eq!(g.weighted_out_degree(s), alpha(s, k).unwrap());
            }
            assert!(g.edges.iter().all(|e| e.2 >= 1));
        }
    }

    #[test]
    fn littledeltas_examples() {
        for n in 2..40 {
            for k in 1..n {
                let r = verify_littledeltas_bound(k, n, &extremal_deltas(k, n));
                assert!(r.hypothesis_holds && r.conclusion_holds, "n={n} k={k}");
                assert!(verify_littledeltas_bound(k, n, &vec![0.0; n - k]).holds());
            }
        }
        let r = verify_littledeltas_bound(1, 4, &[100.0, 0.0, 0.0]);
        assert!(!r.hypothesis_holds && r.holds());
    }

    #[test]
    fn errors() {
        let trace = forest_trace(4, 2, 3, 0);
        assert!(build_strict_sets(&trace, 2, 4).is_err());
        assert!(build_strict_sets(&trace, 0, 3).is_err());
        assert!(build_strict_sets(&trace, 2, 0).is_err());
    }
}
