//! Cumulative products of a round sequence and the generalized neighborhoods
//! `I_t^{t'}(x)` (who `x` heard of through rounds `t..=t'`) and
//! `Out_t^{t'}(x)` (who heard of `x`).

use crate::error::{Error, Result};
use crate::graph::{compose_row, Graph};
use crate::nodeset::NodeSet;

/// Round graphs (self-loops added) and their prefix products.
///
/// Rounds are 1-based. `product_at(0)` is the identity graph and
/// `product_at(t) = product_at(t - 1) ∘ round(t)`.
#[derive(Clone, Debug)]
pub struct ProductTrace {
    n: usize,
    rounds: Vec<Graph>,
    prefix_products: Vec<Graph>,
}

impl ProductTrace {
    pub fn new(n: usize) -> Result<Self> {
        Ok(ProductTrace { n, rounds: Vec::new(), prefix_products: vec![Graph::identity(n)?] })
    }

    /// Builds a trace from raw adversary graphs; self-loops are added here.
    pub fn from_rounds<'a>(n: usize, raw: impl IntoIterator<Item = &'a Graph>) -> Result<Self> {
        let mut trace = Self::new(n)?;
        for g in raw {
            trace.push_round(g)?;
        }
        Ok(trace)
    }

    /// Appends one raw round and returns the new cumulative product.
    pub fn push_round(&mut self, raw: &Graph) -> Result<&Graph> {
        if raw.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: raw.n() });
        }
        let round = raw.with_self_loops();
        let next = self.last_product().product_unchecked(&round);
        self.rounds.push(round);
        self.prefix_products.push(next);
        Ok(self.last_product())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rounds recorded.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Round graph `G_t` (with self-loops), `1 <= t <= len`.
    pub fn round(&self, t: usize) -> &Graph {
        &self.rounds[t - 1]
    }

    pub fn rounds(&self) -> &[Graph] {
        &self.rounds
    }

    /// `G(t)`, `0 <= t <= len`.
    pub fn product_at(&self, t: usize) -> &Graph {
        &self.prefix_products[t]
    }

    pub fn prefix_products(&self) -> &[Graph] {
        &self.prefix_products
    }

    pub fn last_product(&self) -> &Graph {
        self.prefix_products.last().expect("prefix products always hold G(0)")
    }

    fn check(&self, t: usize, t2: usize, x: usize) -> Result<()> {
        if x >= self.n {
            return Err(Error::NodeOutOfRange { node: x, n: self.n });
        }
        for round in [t, t2] {
            if round > self.rounds.len() + 1 {
                return Err(Error::RoundOutOfRange { round, len: self.rounds.len() });
            }
        }
        // Only the empty/singleton conventions may reference round 0 or len+1.
        if t <= t2 && (t == 0 || t2 > self.rounds.len()) {
            return Err(Error::RoundOutOfRange { round: if t == 0 { 0 } else { t2 }, len: self.rounds.len() });
        }
        Ok(())
    }

    /// In-neighborhood of `x` in `G_t ∘ … ∘ G_{t2}`; `{x}` when `t = t2 + 1`,
    /// empty when `t > t2 + 1`.
    pub fn in_set(&self, t: usize, t2: usize, x: usize) -> Result<NodeSet> {
        self.check(t, t2, x)?;
        Ok(self.in_set_unchecked(t, t2, x))
    }

    pub(crate) fn in_set_unchecked(&self, t: usize, t2: usize, x: usize) -> NodeSet {
        if t > t2 + 1 {
            return NodeSet::EMPTY;
        }
        if t == 1 {
            return self.prefix_products[t2].in_row(x);
        }
        let mut set = NodeSet::singleton(x);
        for r in (t..=t2).rev() {
            set = compose_row(set, self.rounds[r - 1].in_rows());
        }
        set
    }

    /// Out-neighborhood of `x` in `G_t ∘ … ∘ G_{t2}`, with the same
    /// conventions as [`ProductTrace::in_set`].
    pub fn out_set(&self, t: usize, t2: usize, x: usize) -> Result<NodeSet> {
        self.check(t, t2, x)?;
        Ok(self.out_set_unchecked(t, t2, x))
    }

    pub(crate) fn out_set_unchecked(&self, t: usize, t2: usize, x: usize) -> NodeSet {
        if t > t2 + 1 {
            return NodeSet::EMPTY;
        }
        if t == 1 {
            return self.prefix_products[t2].out_row(x);
        }
        let mut set = NodeSet::singleton(x);
        for r in t..=t2 {
            set = compose_row(set, self.rounds[r - 1].out_rows());
        }
        set
    }

    /// `G_t ∘ … ∘ G_{t2}` for `1 <= t <= t2 <= len`.
    pub fn interval_product(&self, t: usize, t2: usize) -> Result<Graph> {
        if t == 0 || t > t2 || t2 > self.rounds.len() {
            return Err(Error::RoundOutOfRange { round: t2, len: self.rounds.len() });
        }
        let mut g = self.rounds[t - 1].clone();
        for r in t + 1..=t2 {
            g = g.product_unchecked(&self.rounds[r - 1]);
        }
        Ok(g)
    }
}
