//! Running a round sequence and deciding the three objectives on the
//! cumulative product: broadcast, cover of size k, and k-broadcast.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{random_member, Model, ModelSpec, DEFAULT_EXTRA_DENSITY};
use crate::graph::Graph;
use crate::nodeset::NodeSet;
use crate::trace::ProductTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "lowercase")]
pub enum Objective {
    /// Some node has an out-edge to every node.
    Broadcast,
    /// At most `k` nodes jointly reach every node.
    Cover(usize),
    /// At least `k` distinct nodes each reach every node.
    KBroadcast(usize),
}

impl Objective {
    /// The objective each model is studied under.
    pub fn natural_for(spec: &ModelSpec) -> Objective {
        match spec.model {
            Model::Trees => Objective::Broadcast,
            Model::KForests => Objective::Cover(spec.k),
            Model::KRooted => Objective::KBroadcast(spec.k),
        }
    }

    /// Parses `broadcast`, `cover` or `kbroadcast`; `k` defaults to 1.
    pub fn parse(name: &str, k: Option<usize>) -> Result<Objective> {
        let k = k.unwrap_or(1);
        if k == 0 {
            return Err(Error::InvalidSpec("objective parameter k must be positive".into()));
        }
        match name.to_ascii_lowercase().as_str() {
            "broadcast" => Ok(Objective::Broadcast),
            "cover" => Ok(Objective::Cover(k)),
            "kbroadcast" | "k-broadcast" => Ok(Objective::KBroadcast(k)),
            other => Err(Error::InvalidSpec(format!("unknown objective `{other}`"))),
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Objective::Broadcast => 1,
            Objective::Cover(k) | Objective::KBroadcast(k) => k,
        }
    }

    /// Witness set if the objective holds on the product `g`.
    pub fn witness(&self, g: &Graph) -> Option<NodeSet> {
        self.witness_in_rows(g.out_rows())
    }

    /// Same as [`Objective::witness`] on a product given by its out-rows.
    pub fn witness_in_rows(&self, rows: &[NodeSet]) -> Option<NodeSet> {
        match *self {
            Objective::Broadcast => full_rows(rows).first().map(NodeSet::singleton),
            Objective::Cover(k) => cover_rows(rows, k),
            Objective::KBroadcast(k) => {
                let all = full_rows(rows);
                (k >= 1 && all.len() >= k).then(|| all.take_smallest(k))
            }
        }
    }

    pub fn holds(&self, g: &Graph) -> bool {
        self.witness(g).is_some()
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Broadcast => write!(f, "broadcast"),
            Objective::Cover(k) => write!(f, "cover(k={k})"),
            Objective::KBroadcast(k) => write!(f, "kbroadcast(k={k})"),
        }
    }
}

fn full_rows(rows: &[NodeSet]) -> NodeSet {
    let full = NodeSet::full(rows.len());
    (0..rows.len()).filter(|&x| rows[x] == full).collect()
}

/// Every node whose out-row is all of `[n]`.
pub fn broadcast_achieved(g: &Graph) -> NodeSet {
    full_rows(g.out_rows())
}

/// The `k` smallest full-row nodes, if there are at least `k`.
pub fn k_broadcast_achieved(g: &Graph, k: usize) -> Option<NodeSet> {
    Objective::KBroadcast(k).witness(g)
}

/// A set of at most `k` nodes whose out-rows cover `[n]`, if one exists.
///
/// Exact: dominated rows are dropped, a greedy cover is tried first, and
/// otherwise a branch-and-bound search settles existence.
pub fn cover_achieved(g: &Graph, k: usize) -> Option<NodeSet> {
    cover_rows(g.out_rows(), k)
}

fn cover_rows(rows: &[NodeSet], k: usize) -> Option<NodeSet> {
    if k == 0 {
        return None;
    }
    let full = NodeSet::full(rows.len());
    let rows = undominated_rows(rows);
    if let Some(cover) = greedy_cover(&rows, full, k) {
        return Some(cover);
    }
    let mut chosen = NodeSet::EMPTY;
    cover_search(&rows, full, NodeSet::EMPTY, k, &mut chosen).then_some(chosen)
}

/// Rows not contained in another row; among equal rows the smallest id stays.
fn undominated_rows(rows: &[NodeSet]) -> Vec<(usize, NodeSet)> {
    (0..rows.len())
        .filter(|&a| {
            !(0..rows.len()).any(|b| {
                b != a && rows[a].is_subset(rows[b]) && (rows[a] != rows[b] || b < a)
            })
        })
        .map(|a| (a, rows[a]))
        .collect()
}

fn greedy_cover(rows: &[(usize, NodeSet)], full: NodeSet, k: usize) -> Option<NodeSet> {
    let mut covered = NodeSet::EMPTY;
    let mut chosen = NodeSet::EMPTY;
    while covered != full {
        if chosen.len() == k {
            return None;
        }
        // max_by_key keeps the last maximum, so iterate in reverse for the smallest id.
        let &(id, row) = rows.iter().rev().max_by_key(|(_, r)| r.difference(covered).len())?;
        if row.difference(covered).is_empty() {
            return None;
        }
        chosen.insert(id);
        covered = covered.union(row);
    }
    Some(chosen)
}

fn cover_search(
    rows: &[(usize, NodeSet)],
    full: NodeSet,
    covered: NodeSet,
    budget: usize,
    chosen: &mut NodeSet,
) -> bool {
    let uncovered = full.difference(covered);
    if uncovered.is_empty() {
        return true;
    }
    if budget == 0 {
        return false;
    }
    let best_gain = rows.iter().map(|(_, r)| r.intersection(uncovered).len()).max().unwrap_or(0);
    if best_gain == 0 || uncovered.len().div_ceil(best_gain) > budget {
        return false;
    }
    // Branch on the uncovered node with the fewest covering rows.
    let pivot = uncovered
        .iter()
        .min_by_key(|&e| rows.iter().filter(|(_, r)| r.contains(e)).count())
        .expect("uncovered is nonempty");
    for &(id, row) in rows.iter().filter(|(_, r)| r.contains(pivot)) {
        chosen.insert(id);
        if cover_search(rows, full, covered.union(row), budget - 1, chosen) {
            return true;
        }
        chosen.remove(id);
    }
    false
}

/// A block of listed rounds (1-based, inclusive) replayed after the listed
/// rounds, `times` more times or forever when `times` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repeat {
    pub from: usize,
    pub to: usize,
    pub times: Option<usize>,
}

impl Repeat {
    fn block_len(&self) -> usize {
        self.to + 1 - self.from
    }
}

/// A validated sequence of raw adversary graphs for one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSequence {
    spec: ModelSpec,
    rounds: Vec<Graph>,
    repeat: Option<Repeat>,
}

impl RoundSequence {
    pub fn new(spec: ModelSpec, rounds: Vec<Graph>) -> Result<Self> {
        for (i, g) in rounds.iter().enumerate() {
            if !spec.admits(g) {
                return Err(Error::NotInFamily { round: i + 1, family: spec.family_name() });
            }
        }
        Ok(RoundSequence { spec, rounds, repeat: None })
    }

    pub fn with_repeat(mut self, repeat: Repeat) -> Result<Self> {
        if repeat.from == 0 || repeat.from > repeat.to || repeat.to > self.rounds.len() {
            return Err(Error::Format(format!(
                "repeat block {}..={} does not lie within the {} listed rounds",
                repeat.from,
                repeat.to,
                self.rounds.len()
            )));
        }
        self.repeat = Some(repeat);
        Ok(self)
    }

    /// `len` seeded random family members.
    pub fn random(spec: ModelSpec, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rounds = (0..len).map(|_| random_member(&spec, DEFAULT_EXTRA_DENSITY, &mut rng)).collect();
        RoundSequence { spec, rounds, repeat: None }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// The listed rounds, before any repetition.
    pub fn rounds(&self) -> &[Graph] {
        &self.rounds
    }

    pub fn repeat(&self) -> Option<Repeat> {
        self.repeat
    }

    /// Unrolled length, `None` if the repeat block runs forever.
    pub fn len(&self) -> Option<usize> {
        match self.repeat {
            None => Some(self.rounds.len()),
            Some(Repeat { times: None, .. }) => None,
            Some(r @ Repeat { times: Some(t), .. }) => Some(self.rounds.len() + r.block_len() * t),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Raw graph of round `t` (1-based) in the unrolled sequence.
    pub fn round(&self, t: usize) -> Option<&Graph> {
        if t == 0 {
            return None;
        }
        if let Some(len) = self.len() {
            if t > len {
                return None;
            }
        }
        if t <= self.rounds.len() {
            return Some(&self.rounds[t - 1]);
        }
        let r = self.repeat?;
        let offset = (t - self.rounds.len() - 1) % r.block_len();
        Some(&self.rounds[r.from - 1 + offset])
    }

    /// Lazily unrolled rounds.
    pub fn iter(&self) -> impl Iterator<Item = &Graph> + '_ {
        (1..).map_while(move |t| self.round(t))
    }

    /// Trace of the first `max_rounds` rounds (fewer if the sequence ends).
    pub fn to_trace(&self, max_rounds: usize) -> Result<ProductTrace> {
        ProductTrace::from_rounds(self.spec.n, self.iter().take(max_rounds))
    }
}

/// Outcome of [`run`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub objective: Objective,
    /// First round `t` at which the objective holds on `G(t)`; 0 is allowed.
    pub time: usize,
    pub witness: NodeSet,
    pub final_product: Graph,
}

impl RunResult {
    /// Re-checks the witness against the stored product.
    pub fn witness_is_valid(&self) -> bool {
        let g = &self.final_product;
        let full = NodeSet::full(g.n());
        match self.objective {
            Objective::Broadcast => self.witness.len() == 1 && g.out_row(self.witness.first().unwrap()) == full,
            Objective::Cover(k) => {
                self.witness.len() <= k
                    && self.witness.iter().fold(NodeSet::EMPTY, |acc, x| acc.union(g.out_row(x))) == full
            }
            Objective::KBroadcast(k) => {
                self.witness.len() == k && self.witness.iter().all(|x| g.out_row(x) == full)
            }
        }
    }
}

fn warn_on_mismatch(spec: &ModelSpec, objective: Objective) {
    let natural = Objective::natural_for(spec);
    let mismatched = std::mem::discriminant(&natural) != std::mem::discriminant(&objective)
        || (spec.model != Model::Trees && objective.k() > spec.k);
    if mismatched {
        log::warn!("evaluating {objective} on a sequence of {}", spec.family_name());
    }
}

/// Smallest `t` at which `objective` holds on `G(t)`.
pub fn run(seq: &RoundSequence, objective: Objective) -> Result<RunResult> {
    warn_on_mismatch(seq.spec(), objective);
    let n = seq.spec().n;
    let mut product = Graph::identity(n)?;
    if let Some(witness) = objective.witness(&product) {
        return Ok(RunResult { objective, time: 0, witness, final_product: product });
    }
    let listed = seq.rounds().len();
    let mut pass_start: Option<Graph> = None;
    let mut t = 0;
    while let Some(raw) = seq.round(t + 1) {
        t += 1;
        product = product.product_unchecked(&raw.with_self_loops());
        if let Some(witness) = objective.witness(&product) {
            return Ok(RunResult { objective, time: t, witness, final_product: product });
        }
        // An endless repeat that leaves the product unchanged for a whole
        // block can never reach the objective.
        if let Some(r @ Repeat { times: None, .. }) = seq.repeat() {
            if t >= listed && (t - listed) % r.block_len() == 0 {
                if pass_start.as_ref() == Some(&product) {
                    break;
                }
                pass_start = Some(product.clone());
            }
        }
    }
    Err(Error::ObjectiveNotReached { rounds: t, final_product: Box::new(product) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::enumerate_rooted_trees;

    fn path_tree(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    fn star(n: usize, root: usize) -> Graph {
        Graph::new(n, (0..n).filter(|&v| v != root).map(|v| (root, v))).unwrap()
    }

    #[test]
    fn broadcast_examples() {
        assert!(broadcast_achieved(&Graph::identity(3).unwrap()).is_empty());
        assert_eq!(broadcast_achieved(&Graph::complete(4).unwrap()), NodeSet::full(4));
        let one_round = Graph::identity(5).unwrap().product(&star(5, 3).with_self_loops()).unwrap();
        assert_eq!(broadcast_achieved(&one_round), NodeSet::singleton(3));
    }

    #[test]
    fn cover_examples() {
        let id = Graph::identity(4).unwrap();
        assert_eq!(cover_achieved(&id, 4), Some(NodeSet::full(4)));
        assert_eq!(cover_achieved(&id, 3), None);
        let g = Graph::new(4, [(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3)]).unwrap();
        assert_eq!(cover_achieved(&g, 2).unwrap().to_vec(), vec![0, 2]);
        assert_eq!(cover_achieved(&g, 1), None);
        assert_eq!(cover_achieved(&g, 0), None);
    }

    #[test]
    fn cover_of_one_is_broadcast() {
        let g = Graph::identity(5).unwrap().product(&star(5, 2).with_self_loops()).unwrap();
        assert_eq!(cover_achieved(&g, 1), Some(NodeSet::singleton(2)));
        assert_eq!(k_broadcast_achieved(&g, 1), Some(NodeSet::singleton(2)));
    }

    #[test]
    fn cover_needs_search_when_greedy_fails() {
        // Greedy grabs the four-element row first and then needs three rows;
        // the two halves cover everything.
        let rows = [0b000111u64, 0b111000, 0b011011, 0b001000, 0b010000, 0b100000];
        let g = Graph::from_out_rows(6, rows.iter().map(|&b| NodeSet::from_bits(b)).collect()).unwrap();
        let reduced = undominated_rows(g.out_rows());
        assert!(greedy_cover(&reduced, NodeSet::full(6), 2).is_none());
        assert_eq!(cover_achieved(&g, 2).unwrap().to_vec(), vec![0, 1]);
    }

    #[test]
    fn k_broadcast_examples() {
        assert_eq!(k_broadcast_achieved(&Graph::complete(4).unwrap(), 4), Some(NodeSet::full(4)));
        assert_eq!(k_broadcast_achieved(&Graph::complete(4).unwrap(), 2).unwrap().to_vec(), vec![0, 1]);
        assert_eq!(k_broadcast_achieved(&Graph::identity(3).unwrap(), 1), None);
    }

    #[test]
    fn run_examples() {
        let n = 6;
        let spec = ModelSpec::trees(n).unwrap();
        let seq = RoundSequence::new(spec, vec![path_tree(n); 2 * n]).unwrap();
        let res = run(&seq, Objective::Broadcast).unwrap();
        assert_eq!(res.time, n - 1);
        assert_eq!(res.witness, NodeSet::singleton(0));
        assert!(res.witness_is_valid());

        let seq = RoundSequence::new(spec, vec![star(n, 4); 3]).unwrap();
        assert_eq!(run(&seq, Objective::Broadcast).unwrap().time, 1);

        for g in enumerate_rooted_trees(2).unwrap() {
            let seq = RoundSequence::new(ModelSpec::trees(2).unwrap(), vec![g]).unwrap();
            assert_eq!(run(&seq, Objective::Broadcast).unwrap().time, 1);
        }
    }

    #[test]
    fn cover_time_zero_when_k_is_n() {
        let spec = ModelSpec::forests(3, 3).unwrap();
        let seq = RoundSequence::new(spec, vec![]).unwrap();
        let res = run(&seq, Objective::Cover(3)).unwrap();
        assert_eq!(res.time, 0);
        assert_eq!(res.witness, NodeSet::full(3));
    }

    #[test]
    fn objective_not_reached_carries_product() {
        let spec = ModelSpec::trees(5).unwrap();
        let seq = RoundSequence::new(spec, vec![path_tree(5); 2]).unwrap();
        match run(&seq, Objective::Broadcast) {
            Err(Error::ObjectiveNotReached { rounds, final_product }) => {
                assert_eq!(rounds, 2);
                assert_eq!(final_product.out_row(0).len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeat_block_unrolls() {
        let n = 5;
        let spec = ModelSpec::trees(n).unwrap();
        let seq = RoundSequence::new(spec, vec![star(n, 1), path_tree(n)])
            .unwrap()
            .with_repeat(Repeat { from: 2, to: 2, times: Some(3) })
            .unwrap();
        assert_eq!(seq.len(), Some(5));
        assert_eq!(seq.iter().count(), 5);
        assert_eq!(seq.round(5), Some(&path_tree(n)));
        assert_eq!(seq.round(6), None);

        let forever = RoundSequence::new(spec, vec![path_tree(n)])
            .unwrap()
            .with_repeat(Repeat { from: 1, to: 1, times: None })
            .unwrap();
        assert_eq!(forever.len(), None);
        assert_eq!(run(&forever, Objective::Broadcast).unwrap().time, n - 1);
        assert!(RoundSequence::new(spec, vec![path_tree(n)])
            .unwrap()
            .with_repeat(Repeat { from: 1, to: 2, times: None })
            .is_err());
    }

    #[test]
    fn endless_stall_is_detected() {
        // A 2-forest repeated forever never yields a broadcast.
        let spec = ModelSpec::forests(4, 2).unwrap();
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let seq = RoundSequence::new(spec, vec![g]).unwrap().with_repeat(Repeat { from: 1, to: 1, times: None }).unwrap();
        assert!(matches!(run(&seq, Objective::Broadcast), Err(Error::ObjectiveNotReached { .. })));
        assert_eq!(run(&seq, Objective::Cover(2)).unwrap().time, 1);
    }

    #[test]
    fn sequence_validation() {
        let spec = ModelSpec::trees(3).unwrap();
        let bad = Graph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(RoundSequence::new(spec, vec![bad]), Err(Error::NotInFamily { round: 1, .. })));
    }

    #[test]
    fn objective_parsing() {
        assert_eq!(Objective::parse("cover", Some(2)).unwrap(), Objective::Cover(2));
        assert_eq!(Objective::parse("broadcast", None).unwrap(), Objective::Broadcast);
        assert!(Objective::parse("gossip", None).is_err());
        assert!(Objective::parse("cover", Some(0)).is_err());
    }
}
