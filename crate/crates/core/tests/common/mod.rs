//! Brute-force oracles shared by the integration tests. None of these call
//! into the library's simulation, product or bound code.

#![allow(dead_code)]

use dynnet_core::{Graph, Model, Objective};

/// Edge lists of raw graphs, independent of the library's row layout.
pub fn edge_lists(rounds: &[Graph]) -> Vec<Vec<(usize, usize)>> {
    rounds.iter().map(|g| g.edges().collect()).collect()
}

/// Flooding simulation: `reach[x]` is the bitmask of nodes that have heard
/// from `x`. Returns the state after every round, starting with round 0.
pub fn flood(n: usize, rounds: &[Vec<(usize, usize)>]) -> Vec<Vec<u64>> {
    let mut reach: Vec<u64> = (0..n).map(|x| 1u64 << x).collect();
    let mut states = vec![reach.clone()];
    for edges in rounds {
        let mut next = reach.clone();
        for x in 0..n {
            for &(u, v) in edges {
                if reach[x] >> u & 1 == 1 {
                    next[x] |= 1 << v;
                }
            }
        }
        reach = next;
        states.push(reach.clone());
    }
    states
}

fn full(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Whether the objective holds for the out-reach masks `reach`.
pub fn holds(n: usize, reach: &[u64], objective: Objective) -> bool {
    let all = full(n);
    match objective {
        Objective::Broadcast => reach.contains(&all),
        Objective::KBroadcast(k) => reach.iter().filter(|&&r| r == all).count() >= k,
        Objective::Cover(k) => covers(reach, all, k, 0, 0),
    }
}

fn covers(reach: &[u64], all: u64, left: usize, from: usize, acc: u64) -> bool {
    if acc == all {
        return true;
    }
    if left == 0 {
        return false;
    }
    (from..reach.len()).any(|x| covers(reach, all, left - 1, x + 1, acc | reach[x]))
}

/// First round at which `objective` holds, if any.
pub fn objective_time(n: usize, rounds: &[Graph], objective: Objective) -> Option<usize> {
    flood(n, &edge_lists(rounds)).iter().position(|reach| holds(n, reach, objective))
}

/// `I_t^{t2}(x)` by walking rounds backwards; `{x}` when `t = t2 + 1`,
/// empty when `t > t2 + 1`.
pub fn in_set(rounds: &[Vec<(usize, usize)>], t: usize, t2: usize, x: usize) -> u64 {
    if t > t2 + 1 {
        return 0;
    }
    let mut s = 1u64 << x;
    for r in (t..=t2).rev() {
        let mut next = s;
        for &(u, v) in &rounds[r - 1] {
            if s >> v & 1 == 1 {
                next |= 1 << u;
            }
        }
        s = next;
    }
    s
}

/// `Out_t^{t2}(x)` by walking rounds forwards.
pub fn out_set(rounds: &[Vec<(usize, usize)>], t: usize, t2: usize, x: usize) -> u64 {
    if t > t2 + 1 {
        return 0;
    }
    let mut s = 1u64 << x;
    for r in t..=t2 {
        let mut next = s;
        for &(u, v) in &rounds[r - 1] {
            if s >> u & 1 == 1 {
                next |= 1 << v;
            }
        }
        s = next;
    }
    s
}

/// Nodes with a directed path to every node of a single raw graph.
pub fn roots(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    (0..n).filter(|&r| reaches_all(n, edges, r)).collect()
}

fn reaches_all(n: usize, edges: &[(usize, usize)], r: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![r];
    seen[r] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            if a == u && !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Family membership from the definitions.
pub fn is_member(model: Model, n: usize, k: usize, edges: &[(usize, usize)]) -> bool {
    let edges: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| a != b).collect();
    match model {
        Model::KRooted => roots(n, &edges).len() >= k,
        Model::Trees | Model::KForests => {
            let want = if model == Model::Trees { 1 } else { k };
            let mut parent = vec![None; n];
            for &(a, b) in &edges {
                if parent[b].replace(a).is_some() {
                    return false;
                }
            }
            let tree_roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
            if tree_roots.len() != want {
                return false;
            }
            // Every node must climb to a root within n steps.
            (0..n).all(|v| {
                let mut cur = v;
                for _ in 0..n {
                    match parent[cur] {
                        Some(p) => cur = p,
                        None => return true,
                    }
                }
                false
            })
        }
    }
}

/// `A∘B` with the triple loop, as boolean matrices.
pub fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut c = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if a[x][z] && b[z][y] {
                    c[x][y] = true;
                }
            }
        }
    }
    c
}

pub fn to_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for (x, y) in g.edges() {
        m[x][y] = true;
    }
    m
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Bound formulas in floating point; the values involved are never within
/// rounding distance of an integer for the sizes tested.
pub fn trees_upper(n: usize) -> usize {
    ((1.0 + SQRT2) * n as f64).ceil() as usize
}

pub fn beta() -> f64 {
    (std::f64::consts::PI.powi(2) + 6.0) / 6.0
}

pub fn forests_upper(n: usize) -> usize {
    (beta() * n as f64).ceil() as usize + 1
}

pub fn kroot_upper(n: usize, k: usize) -> usize {
    trees_upper(n) + k - 1
}

pub fn trees_lower(n: usize) -> i64 {
    ((3.0 * n as f64 - 1.0) / 2.0).ceil() as i64 - 2
}

pub fn cover_lower(n: usize, k: usize) -> i64 {
    ((3.0 * n as f64 - 3.0 * k as f64) / 2.0 - 1.0).ceil() as i64
}

pub fn kroot_lower(n: usize, k: usize) -> i64 {
    ((3.0 * n as f64 - 9.0 * k as f64) / 2.0 + 2.0).ceil() as i64
}

/// `α_s` summed edge by edge from the strict rounds graph definition.
pub fn alpha_by_edges(s: usize, k: usize) -> u64 {
    let n = 2 * s;
    (k + 1..=n).filter(|&h| h <= s && s <= (2 * h - k - 1).min(n)).map(|h| (2 * h - k - s) as u64).sum()
}
