//! Pointwise checks of the basic neighborhood lemmas on a trace. Each
//! function returns whether the statement holds for the given arguments;
//! statements with a premise hold vacuously when the premise fails.

use crate::families::{parent_array, roots_reaching_all};
use crate::nodeset::NodeSet;
use crate::trace::ProductTrace;

/// `R_t` for every round: nodes reaching everyone in `G_t`.
pub fn round_roots(trace: &ProductTrace) -> Vec<NodeSet> {
    (1..=trace.len()).map(|t| roots_reaching_all(trace.round(t))).collect()
}

/// Smallest root of every round.
pub fn smallest_roots(trace: &ProductTrace) -> Vec<usize> {
    round_roots(trace).iter().map(|r| r.first().expect("rooted round")).collect()
}

fn i(trace: &ProductTrace, t: usize, t2: usize, x: usize) -> NodeSet {
    trace.in_set_unchecked(t, t2, x)
}

fn o(trace: &ProductTrace, t: usize, t2: usize, x: usize) -> NodeSet {
    trace.out_set_unchecked(t, t2, x)
}

/// `x ∈ Out_t^{t2}(y) ⇔ y ∈ I_t^{t2}(x)`.
pub fn duality(trace: &ProductTrace, t: usize, t2: usize, x: usize, y: usize) -> bool {
    o(trace, t, t2, y).contains(x) == i(trace, t, t2, x).contains(y)
}

/// The three transitivity clauses for rounds `t ≤ t2 + 1`, `t2 ≤ t3`:
/// out-out, in-out and in-in.
pub fn transitivity(
    trace: &ProductTrace,
    (t, t2, t3): (usize, usize, usize),
    (x, y, z): (usize, usize, usize),
) -> [bool; 3] {
    let out_out = !(o(trace, t, t2, x).contains(y) && o(trace, t2 + 1, t3, y).contains(z)) || o(trace, t, t3, x).contains(z);
    let in_out = !(i(trace, t, t2, y).contains(x) && o(trace, t2 + 1, t3, y).contains(z)) || o(trace, t, t3, x).contains(z);
    let in_in = !(i(trace, t, t2, y).contains(x) && i(trace, t2 + 1, t3, z).contains(y)) || o(trace, t, t3, x).contains(z);
    [out_out, in_out, in_in]
}

/// For `t1 ≤ t2` and `t3 ≤ t4`: `I_{t2}^{t3}(x) ⊆ I_{t1}^{t4}(x)` and the same
/// for out-sets.
pub fn monotonicity(trace: &ProductTrace, (t1, t2, t3, t4): (usize, usize, usize, usize), x: usize) -> bool {
    i(trace, t2, t3, x).is_subset(i(trace, t1, t4, x)) && o(trace, t2, t3, x).is_subset(o(trace, t1, t4, x))
}

/// For `t ≤ t2` and a root `r` of round `t`: if `r ∉ I_{t+1}^{t2}(x)` then
/// `I_t^{t2}(x)` is strictly larger than `I_{t+1}^{t2}(x)`.
pub fn propagation_in(trace: &ProductTrace, t: usize, t2: usize, x: usize, r: usize) -> bool {
    let later = i(trace, t + 1, t2, x);
    later.contains(r) || i(trace, t, t2, x).len() > later.len()
}

/// For `t ≤ t2` and a root `r` of round `t2`: if `r ∈ Out_t^{t2−1}(x)` then
/// `Out_t^{t2}(x)` is strictly larger, unless `Out_t^{t2−1}(x)` is everyone.
pub fn propagation_out(trace: &ProductTrace, t: usize, t2: usize, x: usize, r: usize) -> bool {
    let before = o(trace, t, t2 - 1, x);
    !before.contains(r) || before.len() == trace.n() || o(trace, t, t2, x).len() > before.len()
}

/// `|{t ∈ [t1, t2] : r_t ∉ I_{t1}^{t2}(x)}| + 1 ≤ |I_{t1}^{t2}(x)|` with
/// `roots[t − 1] = r_t`, any root of round `t`.
pub fn manyones(trace: &ProductTrace, t1: usize, t2: usize, x: usize, roots: &[usize]) -> bool {
    let heard = i(trace, t1, t2, x);
    let missed = (t1..=t2).filter(|&t| !heard.contains(roots[t - 1])).count();
    missed + 1 <= heard.len()
}

/// [`manyones`] for forest rounds, with `r_t` the root of the tree holding `x`.
pub fn manyones_forest(trace: &ProductTrace, t1: usize, t2: usize, x: usize) -> bool {
    let roots: Vec<usize> = (1..=t2)
        .map(|t| {
            let parents = parent_array(trace.round(t)).expect("forest round");
            let mut v = x;
            while let Some(p) = parents[v] {
                v = p;
            }
            v
        })
        .collect();
    manyones(trace, t1, t2, x, &roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{random_graph, ModelSpec};
    use crate::graph::Graph;

    #[test]
    fn lemmas_on_a_small_trace() {
        let spec = ModelSpec::trees(5).unwrap();
        let rounds: Vec<Graph> = (0..6).map(|s| random_graph(&spec, s)).collect();
        let trace = ProductTrace::from_rounds(5, &rounds).unwrap();
        let roots = smallest_roots(&trace);
        for t in 1..=6 {
            for t2 in t..=6 {
                for x in 0..5 {
                    assert!(manyones(&trace, t, t2, x, &roots));
                    assert!(manyones_forest(&trace, t, t2, x));
                    assert!(propagation_in(&trace, t, t2, x, roots[t - 1]));
                    assert!(propagation_out(&trace, t, t2, x, roots[t2 - 1]));
                    for y in 0..5 {
                        assert!(duality(&trace, t, t2, x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn transitivity_examples() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let trace = ProductTrace::from_rounds(3, [&g, &g]).unwrap();
        assert_eq!(transitivity(&trace, (1, 1, 2), (0, 1, 2)), [true; 3]);
        assert!(monotonicity(&trace, (1, 2, 1, 2), 1));
    }
}
