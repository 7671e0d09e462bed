//! Adversary schedules that delay the objective for a long time.
//!
//! The tree schedule on `i` nodes has three phases, with `m = ⌊i/2⌋`:
//!
//! * path: `0 → 1 → … → i−1` for `m − 1` rounds;
//! * split: root `0` with the path `0 → … → m−1`, the edge `0 → i−1` and
//!   the path `i−1 → i−2 → … → m`, for `⌈i/2⌉ − 1` rounds;
//! * hub: root `m` with the path `m → m−1 → … → 0`, the edge `0 → i−1` and
//!   the path `i−1 → … → m+1`, for `i − 1` rounds.
//!
//! Broadcast happens exactly at round `⌈(3i−1)/2⌉ − 2`. The cover schedule
//! runs it on `n−k+1` nodes and isolates the rest; the k-rooted schedule
//! blows the nodes `0`, `m` and `i−1` up into k-cliques.

use serde::Serialize;

use crate::dissemination::{Objective, RoundSequence};
use crate::error::{Error, Result};
use crate::families::{Model, ModelSpec};
use crate::graph::Graph;

/// A schedule together with the time it is claimed to force.
#[derive(Clone, Debug)]
pub struct ConstructionOutput {
    pub seq: RoundSequence,
    pub claimed_time: usize,
}

/// Lower-bound values; the additive constants are integers, so the
/// `⌈a/2 + c⌉` and `⌈a/2⌉ + c` placements agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LowerBoundForms {
    pub whole_ceiling: i64,
    pub split_ceiling: i64,
}

fn ceil_half(a: i64) -> i64 {
    -((-a).div_euclid(2))
}

/// `⌈(3n−1)/2⌉ − 2`.
pub fn trees_lower_formula(n: usize) -> i64 {
    ceil_half(3 * n as i64 - 1) - 2
}

/// `⌈(3n−3k)/2 − 1⌉` and `⌈3(n−k)/2⌉ − 1`.
pub fn cover_lower_formula(n: usize, k: usize) -> LowerBoundForms {
    let a = 3 * (n as i64 - k as i64);
    // ⌈a/2 − 1⌉ = ⌈(a − 2)/2⌉.
    LowerBoundForms { whole_ceiling: ceil_half(a - 2), split_ceiling: ceil_half(a) - 1 }
}

/// `⌈(3n−9k)/2 + 2⌉` and `⌈3(n−3k)/2⌉ + 2`.
pub fn kroot_lower_formula(n: usize, k: usize) -> LowerBoundForms {
    let a = 3 * n as i64 - 9 * k as i64;
    LowerBoundForms { whole_ceiling: ceil_half(a + 4), split_ceiling: ceil_half(a) + 2 }
}

/// Parent arrays of the three phases on `i ≥ 3` nodes, each with its length.
pub fn tree_phases(i: usize) -> [(Vec<Option<usize>>, usize); 3] {
    assert!(i >= 3, "the schedule needs at least three nodes");
    let m = i / 2;
    let path = (0..i).map(|v| v.checked_sub(1)).collect();
    let split = (0..i)
        .map(|v| match v {
            0 => None,
            v if v < m => Some(v - 1),
            v if v == i - 1 => Some(0),
            v => Some(v + 1),
        })
        .collect();
    let hub = (0..i)
        .map(|v| match v {
            v if v == m => None,
            v if v < m => Some(v + 1),
            v if v == i - 1 => Some(0),
            v => Some(v + 1),
        })
        .collect();
    [(path, m - 1), (split, i.div_ceil(2) - 1), (hub, i - 1)]
}

fn tree_schedule(i: usize) -> Vec<Vec<Option<usize>>> {
    tree_phases(i).into_iter().flat_map(|(parents, len)| std::iter::repeat_n(parents, len)).collect()
}

fn as_time(v: i64) -> usize {
    v.max(0) as usize
}

/// Rooted-tree schedule forcing broadcast time `⌈(3n−1)/2⌉ − 2`.
pub fn trees_lower_bound(n: usize) -> Result<ConstructionOutput> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("the tree schedule needs n >= 3 (n = {n})")));
    }
    let spec = ModelSpec::trees(n)?;
    let rounds = tree_schedule(n).iter().map(|p| Graph::from_parents(p)).collect::<Result<_>>()?;
    Ok(ConstructionOutput { seq: RoundSequence::new(spec, rounds)?, claimed_time: as_time(trees_lower_formula(n)) })
}

/// k-forest schedule: the tree schedule on `n−k+1` nodes plus `k−1`
/// isolated nodes, forcing cover time `⌈3(n−k)/2⌉ − 1`.
pub fn cover_lower_bound(n: usize, k: usize) -> Result<ConstructionOutput> {
    let spec = ModelSpec::forests(n, k)?;
    if n < k + 2 {
        return Err(Error::InvalidSpec(format!("the cover schedule needs n >= k + 2 (n = {n}, k = {k})")));
    }
    let i = n - k + 1;
    let rounds = tree_schedule(i)
        .into_iter()
        .map(|mut parents| {
            parents.resize(n, None);
            Graph::from_parents(&parents)
        })
        .collect::<Result<_>>()?;
    Ok(ConstructionOutput {
        seq: RoundSequence::new(spec, rounds)?,
        claimed_time: as_time(cover_lower_formula(n, k).whole_ceiling),
    })
}

/// k-rooted schedule: the tree schedule on `i = n−3k+3` virtual nodes with
/// `0`, `m` and `i−1` replaced by k-cliques. Blocks keep the virtual order,
/// so `k = 1` reproduces the tree schedule.
pub fn kroot_lower_bound(n: usize, k: usize) -> Result<ConstructionOutput> {
    let spec = ModelSpec::rooted(n, k)?;
    if n < 3 * k {
        return Err(Error::InvalidSpec(format!("the k-rooted schedule needs n >= 3k (n = {n}, k = {k})")));
    }
    let i = n + 3 - 3 * k;
    let m = i / 2;
    let size = |v: usize| if v == 0 || v == m || v == i - 1 { k } else { 1 };
    let mut start = Vec::with_capacity(i);
    let mut next = 0;
    for v in 0..i {
        start.push(next);
        next += size(v);
    }
    let block = |v: usize| start[v]..start[v] + size(v);
    let rounds = tree_schedule(i)
        .iter()
        .map(|parents| {
            let mut edges = Vec::new();
            for v in 0..i {
                for a in block(v) {
                    edges.extend(block(v).filter(|&b| b != a).map(|b| (a, b)));
                    if let Some(p) = parents[v] {
                        edges.extend(block(p).map(|pa| (pa, a)));
                    }
                }
            }
            Graph::new(n, edges)
        })
        .collect::<Result<_>>()?;
    Ok(ConstructionOutput {
        seq: RoundSequence::new(spec, rounds)?,
        claimed_time: as_time(kroot_lower_formula(n, k).whole_ceiling),
    })
}

/// The schedule for `spec`, paired with its natural objective.
pub fn construct(spec: &ModelSpec) -> Result<(ConstructionOutput, Objective)> {
    let out = match spec.model {
        Model::Trees => trees_lower_bound(spec.n)?,
        Model::KForests => cover_lower_bound(spec.n, spec.k)?,
        Model::KRooted => kroot_lower_bound(spec.n, spec.k)?,
    };
    Ok((out, Objective::natural_for(spec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissemination::run;

    #[test]
    fn formulas() {
        assert_eq!(trees_lower_formula(2), 1);
        assert_eq!(trees_lower_formula(4), 4);
        assert_eq!(trees_lower_formula(10), 13);
        assert_eq!(cover_lower_formula(6, 2), LowerBoundForms { whole_ceiling: 5, split_ceiling: 5 });
        assert_eq!(kroot_lower_formula(9, 2).whole_ceiling, 7);
        for n in 1..80 {
            for k in 1..=n {
                let c = cover_lower_formula(n, k);
                let r = kroot_lower_formula(n, k);
                assert_eq!(c.whole_ceiling, c.split_ceiling);
                assert_eq!(r.whole_ceiling, r.split_ceiling);
            }
        }
    }

    #[test]
    fn phase_shapes_for_six_nodes() {
        let [(path, l1), (split, l2), (hub, l3)] = tree_phases(6);
        assert_eq!(path, vec![None, Some(0), Some(1), Some(2), Some(3), Some(4)]);
        assert_eq!(split, vec![None, Some(0), Some(1), Some(4), Some(5), Some(0)]);
        assert_eq!(hub, vec![Some(1), Some(2), Some(3), None, Some(5), Some(0)]);
        assert_eq!((l1, l2, l3), (2, 2, 5));
    }

    #[test]
    fn tree_schedule_is_tight() {
        for n in 3..=40 {
            let out = trees_lower_bound(n).unwrap();
            assert_eq!(run(&out.seq, Objective::Broadcast).unwrap().time, out.claimed_time, "n = {n}");
        }
        assert!(trees_lower_bound(2).is_err());
    }

    #[test]
    fn cover_examples() {
        let out = cover_lower_bound(6, 2).unwrap();
        let res = run(&out.seq, Objective::Cover(2)).unwrap();
        assert_eq!(res.time, 5);
        // The isolated node belongs to every cover.
        assert!(res.witness.contains(5));
        assert!(cover_lower_bound(4, 2).is_ok());
        assert!(cover_lower_bound(3, 2).is_err());
    }

    #[test]
    fn kroot_examples() {
        let out = kroot_lower_bound(9, 2).unwrap();
        assert!(run(&out.seq, Objective::KBroadcast(2)).unwrap().time >= 7);
        for n in 3..20 {
            assert_eq!(kroot_lower_bound(n, 1).unwrap().seq.rounds(), trees_lower_bound(n).unwrap().seq.rounds());
        }
        assert!(kroot_lower_bound(8, 3).is_err());
    }
}
