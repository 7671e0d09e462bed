//! Directed graphs on at most 64 labeled nodes and their relational products.
//!
//! Rows are bit masks, so the product of two graphs is a word-parallel OR of
//! rows: the out-row of `x` in `a ∘ b` is the union of the out-rows in `b` of
//! every out-neighbor of `x` in `a`.

use std::fmt::Write as _;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};

/// A directed graph on nodes `0..n`. Immutable once built.
///
/// `in_rows` is kept as an exact transpose of `out_rows`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    out_rows: Vec<NodeSet>,
    in_rows: Vec<NodeSet>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::NoNodes);
    }
    if n > MAX_NODES {
        return Err(Error::TooManyNodes(n));
    }
    Ok(())
}

fn transpose_rows(rows: &[NodeSet]) -> Vec<NodeSet> {
    let mut cols = vec![NodeSet::EMPTY; rows.len()];
    for (x, row) in rows.iter().enumerate() {
        for y in row.iter() {
            cols[y].insert(x);
        }
    }
    cols
}

impl Graph {
    /// Builds a graph from ordered pairs; duplicates collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        check_n(n)?;
        let mut out_rows = vec![NodeSet::EMPTY; n];
        for (x, y) in edges {
            for node in [x, y] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            out_rows[x].insert(y);
        }
        Ok(Self::from_rows_unchecked(n, out_rows))
    }

    pub fn from_out_rows(n: usize, out_rows: Vec<NodeSet>) -> Result<Self> {
        check_n(n)?;
        if out_rows.len() != n {
            return Err(Error::SizeMismatch { left: n, right: out_rows.len() });
        }
        let full = NodeSet::full(n);
        for row in &out_rows {
            if let Some(node) = row.difference(full).first() {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        Ok(Self::from_rows_unchecked(n, out_rows))
    }

    fn from_rows_unchecked(n: usize, out_rows: Vec<NodeSet>) -> Self {
        let in_rows = transpose_rows(&out_rows);
        Graph { n, out_rows, in_rows }
    }

    /// The graph with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    /// Self-loops only: the knowledge state before any round.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|v| (v, v)))
    }

    /// All ordered pairs, self-loops included.
    pub fn complete(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::from_rows_unchecked(n, vec![NodeSet::full(n); n]))
    }

    /// Builds a forest from a parent array (`None` marks a root).
    /// Edges point from parent to child.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let n = parents.len();
        Self::new(n, parents.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_row(&self, x: usize) -> NodeSet {
        self.out_rows[x]
    }

    pub fn in_row(&self, x: usize) -> NodeSet {
        self.in_rows[x]
    }

    pub fn out_rows(&self) -> &[NodeSet] {
        &self.out_rows
    }

    pub fn in_rows(&self) -> &[NodeSet] {
        &self.in_rows
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        x < self.n && self.out_rows[x].contains(y)
    }

    pub fn edge_count(&self) -> usize {
        self.out_rows.iter().map(|r| r.len()).sum()
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_rows.iter().enumerate().flat_map(|(x, row)| row.iter().map(move |y| (x, y)))
    }

    /// Returns the graph with a self-loop added at every node.
    pub fn with_self_loops(&self) -> Graph {
        let rows = self.out_rows.iter().enumerate().map(|(x, r)| r.union(NodeSet::singleton(x))).collect();
        Self::from_rows_unchecked(self.n, rows)
    }

    /// Returns the graph with every self-loop removed.
    pub fn without_self_loops(&self) -> Graph {
        let rows = self.out_rows.iter().enumerate().map(|(x, r)| r.difference(NodeSet::singleton(x))).collect();
        Self::from_rows_unchecked(self.n, rows)
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.n).all(|x| self.out_rows[x].contains(x))
    }

    /// Relational composition `self ∘ other`: `(x, y)` is an edge iff some
    /// `z` has `(x, z)` in `self` and `(z, y)` in `other`.
    pub fn product(&self, other: &Graph) -> Result<Graph> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        Ok(self.product_unchecked(other))
    }

    pub(crate) fn product_unchecked(&self, other: &Graph) -> Graph {
        let rows = self.out_rows.iter().map(|row| compose_row(*row, &other.out_rows)).collect();
        Self::from_rows_unchecked(self.n, rows)
    }

    pub fn transpose(&self) -> Graph {
        Graph { n: self.n, out_rows: self.in_rows.clone(), in_rows: self.out_rows.clone() }
    }

    /// Edge-set inclusion.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.out_rows.iter().zip(&other.out_rows).all(|(a, b)| a.is_subset(*b))
    }

    /// Graphviz rendering; self-loops are dropped unless `show_self_loops`.
    pub fn to_dot(&self, name: &str, show_self_loops: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph {name} {{");
        for v in 0..self.n {
            let _ = writeln!(s, "  {v};");
        }
        for (x, y) in self.edges() {
            if x != y || show_self_loops {
                let _ = writeln!(s, "  {x} -> {y};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Union of `rows[z]` over all `z` in `row`.
#[inline]
pub(crate) fn compose_row(row: NodeSet, rows: &[NodeSet]) -> NodeSet {
    row.iter().fold(NodeSet::EMPTY, |acc, z| acc.union(rows[z]))
}

/// Serialized as `{"n": n, "edges": [[x, y], ...]}`, self-loops included.
impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Graph", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("edges", &self.edges().map(|(x, y)| [x, y]).collect::<Vec<_>>())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Graph::new(repr.n, repr.edges).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}; ", self.n)?;
        for (x, row) in self.out_rows.iter().enumerate() {
            if x > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}->{row}")?;
        }
        write!(f, ")")
    }
}
