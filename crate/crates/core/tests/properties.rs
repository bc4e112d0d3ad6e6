use std::collections::BTreeSet;

use proptest::prelude::*;

use coordlang::abstraction::{verify_perfect, Abstraction, Scope};
use coordlang::domain::{build_state_graph, DomainSpec, StateGraph};
use coordlang::language::{compatible, expressed_plans, expresses, language_from_abstraction, Sentence};
use coordlang::plan::{all_pairs_distances, optimal_plans, DistanceTable};
use coordlang::rc::{mix, pair_introduces_rc};
use coordlang::{Instance, StateId, DEFAULT_PLAN_CAP};

fn ring3() -> (StateGraph, DistanceTable) {
    let g = build_state_graph(&DomainSpec::ring(3).unwrap()).unwrap();
    let d = all_pairs_distances(&g);
    (g, d)
}

fn instance(g: &StateGraph, s: usize, t: usize) -> Instance {
    Instance::new(StateId::from_index(s % g.len()), StateId::from_index(t % g.len()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_are_sorted_distinct_and_seeded(k in 0usize..40, seed in any::<u64>()) {
        let (g, d) = ring3();
        let a = Scope::Sample { k, seed }.instances(&g, &d);
        prop_assert_eq!(&a, &Scope::Sample { k, seed }.instances(&g, &d));
        prop_assert_eq!(a.len(), k.min(30));
        prop_assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn block_paths_express_their_own_plans(assign in prop::collection::vec(0u32..4, 6), s in 0usize..6, t in 0usize..6) {
        let (g, d) = ring3();
        let abs = Abstraction::from_assignment(&g, &assign);
        prop_assert_eq!(abs.block_count(), assign.iter().collect::<BTreeSet<_>>().len());
        let inst = instance(&g, s, t);
        let lang = language_from_abstraction(&abs);
        for p in optimal_plans(&g, &d, inst, DEFAULT_PLAN_CAP).unwrap() {
            let path = abs.block_path(&p);
            prop_assert!(path.windows(2).all(|w| w[0] != w[1]));
            prop_assert!(expresses(&abs, inst, &path, &p));
            prop_assert!(compatible(&lang, &path, p.intermediates()));
            let expressed = expressed_plans(&abs, &g, &d, inst, &path, DEFAULT_PLAN_CAP).unwrap();
            prop_assert!(expressed.contains(&p));
        }
    }

    #[test]
    fn perfect_means_expressed_sets_mix_cleanly(assign in prop::collection::vec(0u32..6, 6)) {
        let (g, d) = ring3();
        let abs = Abstraction::from_assignment(&g, &assign);
        let report = verify_perfect(&abs, &g, &d, Scope::Exhaustive).unwrap();
        let mut broken = false;
        for inst in Scope::Exhaustive.instances(&g, &d) {
            let plans = optimal_plans(&g, &d, inst, DEFAULT_PLAN_CAP).unwrap();
            let paths: BTreeSet<Vec<u32>> = plans.iter().map(|p| abs.block_path(p)).collect();
            for path in paths {
                let group: Vec<_> = plans.iter().filter(|p| expresses(&abs, inst, &path, p)).collect();
                for p in &group {
                    for q in &group {
                        broken |= pair_introduces_rc(&g, &d, p, q);
                    }
                }
            }
        }
        prop_assert_eq!(report.is_perfect(), !broken);
    }

    #[test]
    fn self_mixing_always_succeeds(s in 0usize..12, t in 0usize..12) {
        let g = build_state_graph(&DomainSpec::grid_loop(2, 2).unwrap()).unwrap();
        let d = all_pairs_distances(&g);
        for p in optimal_plans(&g, &d, instance(&g, s, t), DEFAULT_PLAN_CAP).unwrap() {
            let out = mix(&g, &d, &p, &p);
            prop_assert!(out.succeeded());
            prop_assert_eq!(out.states, p.states);
        }
    }

    #[test]
    fn sentences_round_trip_through_json(words in prop::collection::vec(0u32..5, 0..8), s in 0u32..10, t in 0u32..10) {
        let mut words = words;
        words.dedup();
        let sentence = Sentence { instance: Instance::new(StateId(s), StateId(t)), words };
        let text = serde_json::to_string(&sentence).unwrap();
        prop_assert_eq!(serde_json::from_str::<Sentence>(&text).unwrap(), sentence);
    }
}
