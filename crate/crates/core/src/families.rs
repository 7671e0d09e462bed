//! The three adversary families: rooted trees, k-forests and k-rooted
//! networks. Validators look at the adversary's raw graph; self-loops are
//! ignored because the engine adds them to every round.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nodeset::{NodeSet, MAX_NODES};

/// Largest n for which rooted trees are enumerated.
pub const TREE_ENUMERATION_MAX: usize = 8;
/// Largest n for which k-forests and k-rooted minimal members are enumerated.
pub const FOREST_ENUMERATION_MAX: usize = 6;

/// Density of extra edges in random k-rooted graphs.
pub const DEFAULT_EXTRA_DENSITY: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "tree")]
    Trees,
    #[serde(rename = "forest")]
    KForests,
    #[serde(rename = "digraph")]
    KRooted,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Trees => "tree",
            Model::KForests => "forest",
            Model::KRooted => "digraph",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tree" | "trees" => Ok(Model::Trees),
            "forest" | "forests" | "k-forest" | "kforest" | "kforests" => Ok(Model::KForests),
            "digraph" | "rooted" | "k-rooted" | "krooted" => Ok(Model::KRooted),
            other => Err(Error::InvalidSpec(format!("unknown model `{other}`"))),
        }
    }
}

/// An adversary family `(model, n, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    pub n: usize,
    pub k: usize,
}

impl ModelSpec {
    pub fn new(model: Model, n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidSpec(format!("n = {n} must lie in 1..=64")));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("k = {k} must lie in 1..={n}")));
        }
        if model == Model::Trees && k != 1 {
            return Err(Error::InvalidSpec("the tree model has k = 1".into()));
        }
        Ok(ModelSpec { model, n, k })
    }

    pub fn trees(n: usize) -> Result<Self> {
        Self::new(Model::Trees, n, 1)
    }

    pub fn forests(n: usize, k: usize) -> Result<Self> {
        Self::new(Model::KForests, n, k)
    }

    pub fn rooted(n: usize, k: usize) -> Result<Self> {
        Self::new(Model::KRooted, n, k)
    }

    /// Whether `g` is a member of this family.
    pub fn admits(&self, g: &Graph) -> bool {
        if g.n() != self.n {
            return false;
        }
        match self.model {
            Model::Trees => rooted_tree_root(g).is_some(),
            Model::KForests => k_forest_roots(g, self.k).is_some(),
            Model::KRooted => is_k_rooted(g, self.k),
        }
    }

    pub fn family_name(&self) -> String {
        match self.model {
            Model::Trees => format!("rooted trees on {} nodes", self.n),
            Model::KForests => format!("{}-forests on {} nodes", self.k, self.n),
            Model::KRooted => format!("{}-rooted networks on {} nodes", self.k, self.n),
        }
    }
}

/// Parent of every node in a forest-shaped graph, or `None` if some node has
/// in-degree above one.
fn parents_of(g: &Graph) -> Option<Vec<Option<usize>>> {
    let g = g.without_self_loops();
    (0..g.n())
        .map(|v| {
            let row = g.in_row(v);
            match row.len() {
                0 => Some(None),
                1 => Some(row.first()),
                _ => None,
            }
        })
        .collect()
}

/// Parent array of a raw graph if it is a forest with edges pointing away
/// from the roots.
pub fn parent_array(g: &Graph) -> Option<Vec<Option<usize>>> {
    let parents = parents_of(g)?;
    // Acyclic iff every parent chain terminates within n steps.
    let n = parents.len();
    for v in 0..n {
        let mut cur = v;
        let mut steps = 0;
        while let Some(p) = parents[cur] {
            cur = p;
            steps += 1;
            if steps > n {
                return None;
            }
        }
    }
    Some(parents)
}

/// Root of `g` if it is a rooted tree (edges directed away from the root).
pub fn rooted_tree_root(g: &Graph) -> Option<usize> {
    let roots = k_forest_roots(g, 1)?;
    roots.first()
}

/// Tree roots if `g` is a union of exactly `k` node-disjoint rooted trees
/// spanning all nodes.
pub fn k_forest_roots(g: &Graph, k: usize) -> Option<NodeSet> {
    let parents = parent_array(g)?;
    let roots: NodeSet = parents.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(v, _)| v).collect();
    (roots.len() == k).then_some(roots)
}

/// Nodes whose forward-reachable set is every node.
pub fn roots_reaching_all(g: &Graph) -> NodeSet {
    let n = g.n();
    let full = NodeSet::full(n);
    // Transitive closure by repeated row expansion; n <= 64 keeps this cheap.
    let mut reach: Vec<NodeSet> = (0..n).map(|x| g.out_row(x).union(NodeSet::singleton(x))).collect();
    loop {
        let mut changed = false;
        for x in 0..n {
            let next = reach[x].iter().fold(reach[x], |acc, z| acc.union(reach[z]));
            if next != reach[x] {
                reach[x] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&x| reach[x] == full).collect()
}

pub fn is_k_rooted(g: &Graph, k: usize) -> bool {
    roots_reaching_all(g).len() >= k
}

/// Decodes a Prüfer sequence into the edge list of a labeled tree on `n` nodes.
fn prufer_edges(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    debug_assert_eq!(seq.len() + 2, n.max(2));
    if n == 1 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Orients an undirected forest away from `roots`.
fn orient_from(n: usize, undirected: &[(usize, usize)], roots: NodeSet) -> Graph {
    let mut adj = vec![NodeSet::EMPTY; n];
    for &(a, b) in undirected {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut seen = roots;
    let mut frontier: Vec<usize> = roots.to_vec();
    let mut edges = Vec::with_capacity(n);
    while let Some(x) = frontier.pop() {
        for y in adj[x].difference(seen).iter() {
            seen.insert(y);
            edges.push((x, y));
            frontier.push(y);
        }
    }
    Graph::new(n, edges).expect("endpoints are in range")
}

/// Every labeled rooted tree on `n` nodes, exactly once, grouped by root.
#[derive(Clone, Debug)]
pub struct RootedTrees {
    n: usize,
    root: usize,
    root_end: usize,
    seq: Vec<usize>,
    done: bool,
}

impl RootedTrees {
    fn advance_seq(&mut self) -> bool {
        for digit in self.seq.iter_mut().rev() {
            *digit += 1;
            if *digit < self.n {
                return true;
            }
            *digit = 0;
        }
        false
    }
}

impl Iterator for RootedTrees {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        if self.done {
            return None;
        }
        let g = orient_from(self.n, &prufer_edges(self.n, &self.seq), NodeSet::singleton(self.root));
        if !self.advance_seq() {
            self.root += 1;
            if self.root >= self.root_end {
                self.done = true;
            }
        }
        Some(g)
    }
}

fn check_enumeration(n: usize, max: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::NoNodes);
    }
    if n > max {
        return Err(Error::Guard { what: "enumeration", n, max });
    }
    Ok(())
}

/// All `n^(n-1)` labeled rooted trees on `n <= 8` nodes.
pub fn enumerate_rooted_trees(n: usize) -> Result<RootedTrees> {
    check_enumeration(n, TREE_ENUMERATION_MAX)?;
    Ok(RootedTrees { n, root: 0, root_end: n, seq: vec![0; n.saturating_sub(2)], done: false })
}

/// The `n^(n-2)` labeled trees rooted at `root`; lets callers split the
/// enumeration across threads.
pub fn rooted_trees_with_root(n: usize, root: usize) -> Result<RootedTrees> {
    check_enumeration(n, TREE_ENUMERATION_MAX)?;
    if root >= n {
        return Err(Error::NodeOutOfRange { node: root, n });
    }
    Ok(RootedTrees { n, root, root_end: root + 1, seq: vec![0; n.saturating_sub(2)], done: false })
}

/// Set partitions of `0..n` into exactly `k` nonempty blocks, as block labels.
fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, k: usize, labels: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if used == k {
                out.push(labels.clone());
            }
            return;
        }
        // Not enough nodes left to open the missing blocks.
        if k - used.min(k) > n - i {
            return;
        }
        for b in 0..used.min(k) {
            labels.push(b);
            rec(i + 1, n, k, labels, used, out);
            labels.pop();
        }
        if used < k {
            labels.push(used);
            rec(i + 1, n, k, labels, used + 1, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(n), 0, &mut out);
    out
}

/// All k-forests on `n <= 6` nodes: every partition into `k` blocks times
/// every rooted tree on each block.
pub fn enumerate_k_forests(n: usize, k: usize) -> Result<Vec<Graph>> {
    check_enumeration(n, FOREST_ENUMERATION_MAX)?;
    ModelSpec::forests(n, k)?;
    let mut out = Vec::new();
    for labels in set_partitions(n, k) {
        let blocks: Vec<Vec<usize>> =
            (0..k).map(|b| (0..n).filter(|&v| labels[v] == b).collect()).collect();
        let per_block: Vec<Vec<Vec<(usize, usize)>>> = blocks
            .iter()
            .map(|block| {
                enumerate_rooted_trees(block.len())
                    .expect("block sizes are within the guard")
                    .map(|t| t.edges().map(|(a, b)| (block[a], block[b])).collect())
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; k];
        'odometer: loop {
            let edges = (0..k).flat_map(|b| per_block[b][idx[b]].iter().copied());
            out.push(Graph::new(n, edges)?);
            for b in (0..k).rev() {
                idx[b] += 1;
                if idx[b] < per_block[b].len() {
                    continue 'odometer;
                }
                idx[b] = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// Minimal k-rooted networks: unions of `k` spanning trees with distinct
/// roots, deduplicated. Every k-rooted network contains one of these.
pub fn enumerate_k_rooted_minimal(n: usize, k: usize) -> Result<Vec<Graph>> {
    check_enumeration(n, FOREST_ENUMERATION_MAX)?;
    ModelSpec::rooted(n, k)?;
    let by_root: Vec<Vec<Graph>> =
        (0..n).map(|r| rooted_trees_with_root(n, r).map(|it| it.collect())).collect::<Result<_>>()?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut roots: Vec<usize> = (0..k).collect();
    loop {
        let mut idx = vec![0usize; k];
        'product: loop {
            let rows: Vec<NodeSet> = (0..n)
                .map(|x| {
                    (0..k).fold(NodeSet::EMPTY, |acc, j| acc.union(by_root[roots[j]][idx[j]].out_row(x)))
                })
                .collect();
            let g = Graph::from_out_rows(n, rows)?;
            if seen.insert(g.clone()) {
                out.push(g);
            }
            for j in (0..k).rev() {
                idx[j] += 1;
                if idx[j] < by_root[roots[j]].len() {
                    continue 'product;
                }
                idx[j] = 0;
            }
            break;
        }
        // Next k-combination of roots.
        let mut i = k;
        while i > 0 && roots[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        roots[i - 1] += 1;
        for j in i..k {
            roots[j] = roots[j - 1] + 1;
        }
    }
    Ok(out)
}

fn random_prufer<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect()
}

/// Uniform labeled tree rooted at `root`.
fn random_tree_rooted_at<R: Rng>(n: usize, root: usize, rng: &mut R) -> Graph {
    orient_from(n, &prufer_edges(n, &random_prufer(n, rng)), NodeSet::singleton(root))
}

/// Uniform rooted forest with `k` trees: a Prüfer sequence over `n + 1`
/// labels in which the virtual node `n` appears exactly `k - 1` times
/// decodes to a tree where `n` has degree `k`; its neighbors become roots.
fn random_forest<R: Rng>(n: usize, k: usize, rng: &mut R) -> Graph {
    if k == n {
        return Graph::empty(n).expect("n is valid");
    }
    let len = n - 1;
    let mut seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
    for pos in sample(rng, len, k - 1).into_iter() {
        seq[pos] = n;
    }
    let edges = prufer_edges(n + 1, &seq);
    let roots: NodeSet = edges
        .iter()
        .filter_map(|&(a, b)| if a == n { Some(b) } else if b == n { Some(a) } else { None })
        .collect();
    let inner: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| a != n && b != n).collect();
    orient_from(n, &inner, roots)
}

/// Draws one family member. Trees and forests are uniform; k-rooted graphs
/// overlay `k` random spanning trees with distinct roots and then add each
/// remaining ordered pair with probability `extra_density`.
pub fn random_member<R: Rng>(spec: &ModelSpec, extra_density: f64, rng: &mut R) -> Graph {
    let n = spec.n;
    match spec.model {
        Model::Trees => {
            let root = rng.gen_range(0..n);
            random_tree_rooted_at(n, root, rng)
        }
        Model::KForests => random_forest(n, spec.k, rng),
        Model::KRooted => {
            let roots = sample(rng, n, spec.k);
            let mut rows = vec![NodeSet::EMPTY; n];
            for r in roots.into_iter() {
                let t = random_tree_rooted_at(n, r, rng);
                for (x, row) in rows.iter_mut().enumerate() {
                    *row = row.union(t.out_row(x));
                }
            }
            if extra_density > 0.0 {
                for (x, row) in rows.iter_mut().enumerate() {
                    for y in 0..n {
                        if x != y && rng.gen_bool(extra_density.min(1.0)) {
                            row.insert(y);
                        }
                    }
                }
            }
            Graph::from_out_rows(n, rows).expect("rows stay within n")
        }
    }
}

/// Deterministic per seed.
pub fn random_graph(spec: &ModelSpec, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_member(spec, DEFAULT_EXTRA_DENSITY, &mut rng)
}
