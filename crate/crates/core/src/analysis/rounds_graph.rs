//! The rounds graph of a rooted trace, optionally avoiding a node set `A`.
//!
//! Nodes `0..n` stand for processes and node `n + t − 1` for round `t`,
//! `1 ≤ t ≤ R = ⌈(1+√2)n⌉ + |A|`. Each round gets a root `r_t`, the smallest
//! node of `R_t ∖ A` where `R_t` is the set of nodes reaching everyone in
//! `G_t`. Process `p ∉ A` points at round `t` when `p ∈ I_1^{t−1}(r_t)`;
//! round `t < ⌈√2·n⌉ + |A|` points at a later round `t'` when
//! `r_t ∈ I_1^{t'−1}(r_{t'})`. Some node outside `A` ends up with out-degree
//! at least `n`, and that node (or the root of that round) has broadcast.

use std::fmt::Write as _;

use serde::Serialize;

use super::{ceil_sqrt2_n, trees_upper};
use crate::error::{Error, Result};
use crate::families::roots_reaching_all;
use crate::nodeset::NodeSet;
use crate::trace::ProductTrace;

#[derive(Clone, Debug, Serialize)]
pub struct RoundsGraph {
    pub n: usize,
    pub avoid: NodeSet,
    /// `R = ⌈(1+√2)n⌉ + |A|`.
    pub round_count: usize,
    /// Rounds below this index may point at later rounds.
    pub threshold: usize,
    /// `roots[t − 1] = r_t`.
    pub roots: Vec<usize>,
    /// Out-neighbors of each node, in increasing order.
    pub out_edges: Vec<Vec<usize>>,
}

/// A node of the rounds graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum RgNode {
    Process(usize),
    Round(usize),
}

impl RoundsGraph {
    pub fn node_count(&self) -> usize {
        self.n + self.round_count
    }

    pub fn node(&self, id: usize) -> RgNode {
        if id < self.n {
            RgNode::Process(id)
        } else {
            RgNode::Round(id - self.n + 1)
        }
    }

    pub fn round_node(&self, t: usize) -> usize {
        self.n + t - 1
    }

    pub fn out_degree(&self, id: usize) -> usize {
        self.out_edges[id].len()
    }

    pub fn in_degree(&self, id: usize) -> usize {
        self.out_edges.iter().filter(|out| out.binary_search(&id).is_ok()).count()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    /// The process a node stands for: itself, or the root of its round.
    pub fn process_of(&self, id: usize) -> usize {
        match self.node(id) {
            RgNode::Process(p) => p,
            RgNode::Round(t) => self.roots[t - 1],
        }
    }

    /// Whether the process behind `id` reaches everyone by the last round.
    pub fn witness_has_broadcast(&self, trace: &ProductTrace, id: usize) -> bool {
        let p = self.process_of(id);
        trace.out_set(1, self.round_count, p).map(|s| s == NodeSet::full(self.n)).unwrap_or(false)
    }

    pub fn to_dot(&self) -> String {
        let label = |id: usize| match self.node(id) {
            RgNode::Process(p) => format!("p{p}"),
            RgNode::Round(t) => format!("t{t}"),
        };
        let mut s = String::from("digraph rounds {\n  rankdir=LR;\n");
        for p in 0..self.n {
            let style = if self.avoid.contains(p) { ", style=dashed" } else { "" };
            let _ = writeln!(s, "  {} [shape=circle{style}];", label(p));
        }
        for t in 1..=self.round_count {
            let _ = writeln!(s, "  {} [shape=box, label=\"t{t} (r={})\"];", label(self.round_node(t)), self.roots[t - 1]);
        }
        for (from, outs) in self.out_edges.iter().enumerate() {
            for &to in outs {
                let _ = writeln!(s, "  {} -> {};", label(from), label(to));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Builds the rounds graph from the first `⌈(1+√2)n⌉ + |avoid|` rounds.
pub fn build_rounds_graph(trace: &ProductTrace, avoid: NodeSet) -> Result<RoundsGraph> {
    let n = trace.n();
    let a = avoid.len();
    if !avoid.is_subset(NodeSet::full(n)) || a >= n {
        return Err(Error::RoundsGraph(format!("avoid set {avoid} is not a proper subset of the {n} processes")));
    }
    let round_count = trees_upper(n) + a;
    if trace.len() < round_count {
        return Err(Error::RoundsGraph(format!("trace has {} rounds, {round_count} needed", trace.len())));
    }
    let threshold = ceil_sqrt2_n(n) + a;
    let roots = (1..=round_count)
        .map(|t| {
            roots_reaching_all(trace.round(t)).difference(avoid).first().ok_or_else(|| {
                Error::RoundsGraph(format!("round {t} has no root outside the avoid set {avoid}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // heard[t - 1] = I_1^{t-1}(r_t).
    let heard: Vec<NodeSet> = (1..=round_count).map(|t| trace.product_at(t - 1).in_row(roots[t - 1])).collect();
    let mut out_edges = vec![Vec::new(); n + round_count];
    for p in (0..n).filter(|&p| !avoid.contains(p)) {
        out_edges[p] = (1..=round_count).filter(|&t| heard[t - 1].contains(p)).map(|t| n + t - 1).collect();
    }
    for t in 1..threshold.min(round_count + 1) {
        let r = roots[t - 1];
        out_edges[n + t - 1] = (t + 1..=round_count).filter(|&u| heard[u - 1].contains(r)).map(|u| n + u - 1).collect();
    }
    Ok(RoundsGraph { n, avoid, round_count, threshold, roots, out_edges })
}

/// A node outside the avoid set with the largest out-degree (smallest id on
/// ties), with that degree.
pub fn max_out_degree_witness(rg: &RoundsGraph) -> (usize, usize) {
    (0..rg.node_count())
        .filter(|&id| id >= rg.n || !rg.avoid.contains(id))
        .map(|id| (id, rg.out_degree(id)))
        .fold((0, 0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{random_graph, ModelSpec};
    use crate::graph::Graph;

    fn star(n: usize, root: usize) -> Graph {
        Graph::new(n, (0..n).filter(|&v| v != root).map(|v| (root, v))).unwrap()
    }

    fn trace_of(rounds: &[Graph]) -> ProductTrace {
        ProductTrace::from_rounds(rounds[0].n(), rounds).unwrap()
    }

    #[test]
    fn node_count() {
        let rounds = vec![star(4, 0); 10];
        let rg = build_rounds_graph(&trace_of(&rounds), NodeSet::EMPTY).unwrap();
        assert_eq!(rg.node_count(), 14);
        assert_eq!(rg.round_count, 10);
        assert_eq!(rg.threshold, 6);
    }

    #[test]
    fn repeated_star_round_in_degrees() {
        let n = 5;
        let rounds = vec![star(n, 2); trees_upper(n)];
        let rg = build_rounds_graph(&trace_of(&rounds), NodeSet::EMPTY).unwrap();
        for t in 1..=rg.threshold {
            assert!(rg.in_degree(rg.round_node(t)) >= t, "round {t}");
        }
        let (id, deg) = max_out_degree_witness(&rg);
        assert!(deg >= n);
        assert!(rg.witness_has_broadcast(&trace_of(&rounds), id));
    }

    #[test]
    fn random_trees_have_a_heavy_node() {
        for seed in 0..20 {
            let n = 3 + (seed as usize % 8);
            let spec = ModelSpec::trees(n).unwrap();
            let rounds: Vec<Graph> = (0..trees_upper(n)).map(|i| random_graph(&spec, seed * 1000 + i as u64)).collect();
            let trace = trace_of(&rounds);
            let rg = build_rounds_graph(&trace, NodeSet::EMPTY).unwrap();
            let (id, deg) = max_out_degree_witness(&rg);
            assert!(deg >= n);
            assert!(rg.witness_has_broadcast(&trace, id));
        }
    }

    #[test]
    fn avoided_processes_have_no_out_edges() {
        let spec = ModelSpec::rooted(6, 2).unwrap();
        let rounds: Vec<Graph> = (0..trees_upper(6) + 1).map(|i| random_graph(&spec, i as u64)).collect();
        let rg = build_rounds_graph(&trace_of(&rounds), NodeSet::singleton(3)).unwrap();
        assert_eq!(rg.out_degree(3), 0);
        assert!(rg.roots.iter().all(|&r| r != 3));
        assert_ne!(max_out_degree_witness(&rg).0, 3);
    }

    #[test]
    fn errors() {
        let rounds = vec![star(4, 0); 5];
        assert!(matches!(build_rounds_graph(&trace_of(&rounds), NodeSet::EMPTY), Err(Error::RoundsGraph(_))));
        let rounds = vec![star(4, 0); 12];
        assert!(build_rounds_graph(&trace_of(&rounds), NodeSet::singleton(0)).is_err());
        assert!(build_rounds_graph(&trace_of(&rounds), NodeSet::full(4)).is_err());
    }

    #[test]
    fn dot_labels() {
        let rounds = vec![star(3, 1); 8];
        let dot = build_rounds_graph(&trace_of(&rounds), NodeSet::EMPTY).unwrap().to_dot();
        assert!(dot.contains("p1 -> t1;"));
        assert!(dot.starts_with("digraph rounds"));
    }
}
