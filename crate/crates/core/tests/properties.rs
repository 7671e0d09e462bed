mod common;

use proptest::prelude::*;

use common::*;
use dynnet_core::families::random_graph;
use dynnet_core::format::SequenceFile;
use dynnet_core::search::{exact_worst_case, exact_worst_case_naive, SearchConfig, Searcher};
use dynnet_core::{run, Graph, Model, ModelSpec, Objective, Repeat, RoundSequence};

fn all_digraphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|(x, y)| x != y).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        Graph::new(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e)).unwrap()
    })
}

#[test]
fn memo_search_matches_naive_recursion() {
    let config = SearchConfig::default();
    for model in [Model::Trees, Model::KForests, Model::KRooted] {
        for n in 2..=3 {
            for k in 1..=n {
                let Ok(spec) = ModelSpec::new(model, n, k) else { continue };
                let objective = Objective::natural_for(&spec);
                let memo = exact_worst_case(&spec, objective, &config).map(|r| r.value).ok();
                let naive = exact_worst_case_naive(&spec, objective).ok();
                assert_eq!(memo, naive, "{spec:?}");
            }
        }
    }
}

#[test]
fn minimal_k_rooted_moves_lose_nothing() {
    for k in 1..=3 {
        let spec = ModelSpec::rooted(3, k).unwrap();
        let objective = Objective::KBroadcast(k);
        let every: Vec<Graph> = all_digraphs(3).filter(|g| is_member(Model::KRooted, 3, k, &g.edges().collect::<Vec<_>>())).collect();
        let full = Searcher::with_moves(3, objective, every, 1 << 30).unwrap();
        let minimal = Searcher::new(&spec, objective, &SearchConfig::default()).unwrap();
        let start = Graph::identity(3).unwrap();
        assert_eq!(full.value(&start).unwrap(), minimal.value(&start).unwrap(), "k = {k}");
    }
}

#[test]
fn search_value_replays_on_its_sequence() {
    let config = SearchConfig::default();
    for spec in [ModelSpec::trees(4).unwrap(), ModelSpec::forests(4, 2).unwrap(), ModelSpec::rooted(4, 2).unwrap()] {
        let objective = Objective::natural_for(&spec);
        let res = exact_worst_case(&spec, objective, &config).unwrap();
        assert_eq!(objective_time(4, res.optimal_sequence.rounds(), objective), Some(res.value), "{spec:?}");
        assert_eq!(run(&res.optimal_sequence, objective).unwrap().time, res.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supergraph_moves_never_increase_remaining_time(
        k in 1usize..=2,
        prefix in proptest::collection::vec(any::<u64>(), 0..3),
        seed in any::<u64>(),
        extra in proptest::collection::vec((0usize..4, 0usize..4), 0..6),
    ) {
        let spec = ModelSpec::rooted(4, k).unwrap();
        let searcher = Searcher::new(&spec, Objective::KBroadcast(k), &SearchConfig::default()).unwrap();
        let mut state = Graph::identity(4).unwrap();
        for s in &prefix {
            state = state.product(&random_graph(&spec, *s).with_self_loops()).unwrap();
        }
        let g = random_graph(&spec, seed);
        let h = Graph::new(4, g.edges().chain(extra.into_iter().filter(|(a, b)| a != b))).unwrap();
        let after_g = searcher.value(&state.product(&g.with_self_loops()).unwrap()).unwrap();
        let after_h = searcher.value(&state.product(&h.with_self_loops()).unwrap()).unwrap();
        prop_assert!(after_h <= after_g);
    }

    #[test]
    fn sequence_files_round_trip(model_idx in 0usize..3, n in 2usize..10, k in 1usize..4, len in 0usize..12, seed in any::<u64>()) {
        let model = [Model::Trees, Model::KForests, Model::KRooted][model_idx];
        let k = if model == Model::Trees { 1 } else { k.min(n) };
        let spec = ModelSpec::new(model, n, k).unwrap();
        let seq = RoundSequence::random(spec, len, seed);
        let file = SequenceFile::from_sequence(&seq, Some(seed));
        let text = file.to_canonical_json();
        let back = SequenceFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_canonical_json(), text);
        let seq2 = back.to_sequence().unwrap();
        prop_assert_eq!(seq2.rounds(), seq.rounds());
    }

    #[test]
    fn run_agrees_with_flooding(model_idx in 0usize..3, n in 2usize..12, k in 1usize..4, seed in any::<u64>()) {
        let model = [Model::Trees, Model::KForests, Model::KRooted][model_idx];
        let k = if model == Model::Trees { 1 } else { k.min(n) };
        let spec = ModelSpec::new(model, n, k).unwrap();
        let seq = RoundSequence::random(spec, 3 * n, seed);
        for objective in [Objective::Broadcast, Objective::Cover(k), Objective::KBroadcast(k)] {
            let expected = objective_time(n, seq.rounds(), objective);
            prop_assert_eq!(run(&seq, objective).ok().map(|r| r.time), expected);
            if let Ok(r) = run(&seq, objective) {
                prop_assert!(r.witness_is_valid());
            }
        }
    }

    #[test]
    fn repeated_blocks_unroll_like_explicit_rounds(n in 2usize..8, len in 1usize..5, times in 1usize..4, seed in any::<u64>()) {
        let spec = ModelSpec::trees(n).unwrap();
        let base = RoundSequence::random(spec, len, seed);
        let repeated = base.clone().with_repeat(Repeat { from: 1, to: len, times: Some(times) }).unwrap();
        let explicit: Vec<Graph> = repeated.iter().cloned().collect();
        prop_assert_eq!(explicit.len(), len * (times + 1));
        let flat = RoundSequence::new(spec, explicit.clone()).unwrap();
        let a = run(&repeated, Objective::Broadcast).ok().map(|r| r.time);
        let b = run(&flat, Objective::Broadcast).ok().map(|r| r.time);
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, objective_time(n, &explicit, Objective::Broadcast));
    }
}
