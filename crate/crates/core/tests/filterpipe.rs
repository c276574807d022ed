use pedsim::filterpipe::{keyword_filter, tag_behavior, tag_distribution, AnnotatedItem, TagConfig};
use pedsim::trajectory::BehaviorClass;
use proptest::prelude::*;

fn corpus() -> Vec<AnnotatedItem> {
    serde_json::from_str(include_str!("fixtures/annotations_200.json")).unwrap()
}

fn expected_accepted() -> usize {
    let v: serde_json::Value = serde_json::from_str(include_str!("fixtures/annotations_200.expected.json")).unwrap();
    v["accepted"].as_u64().unwrap() as usize
}

#[test]
fn golden_accepted_count() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 200);
    let out = keyword_filter(&corpus, &TagConfig::default().keywords).unwrap();
    assert_eq!(out.accepted.len(), expected_accepted());
    assert_eq!(out.report.len(), 200);
    assert!(out.report.iter().all(|d| d.accepted == !d.matched.is_empty()));
}

#[test]
fn accepted_motions_have_non_other_tags() {
    let cfg = TagConfig::default();
    let out = keyword_filter(&corpus(), &cfg.keywords).unwrap();
    for item in &out.accepted {
        let set = tag_behavior(&item.annotation, &cfg);
        assert!(!set.tags.is_empty());
    }
}

fn keyword_pool() -> Vec<String> {
    ["walk", "run", "jog", "cross", "step", "stroll", "stride", "stand", "wait", "fall", "stumble", "wave", "dance", "turn", "sit"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

proptest! {
    #[test]
    fn idempotent(mask in prop::collection::vec(any::<bool>(), 15)) {
        let kws: Vec<String> = keyword_pool().into_iter().zip(&mask).filter(|(_, m)| **m).map(|(k, _)| k).collect();
        prop_assume!(!kws.is_empty());
        let once = keyword_filter(&corpus(), &kws).unwrap().accepted;
        let twice = keyword_filter(&once, &kws).unwrap().accepted;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn monotone_in_keywords(mask in prop::collection::vec(any::<bool>(), 15), extra in 0usize..15) {
        let pool = keyword_pool();
        let mut kws: Vec<String> = pool.iter().zip(&mask).filter(|(_, m)| **m).map(|(k, _)| k.clone()).collect();
        prop_assume!(!kws.is_empty());
        let before: Vec<String> = keyword_filter(&corpus(), &kws).unwrap().accepted.into_iter().map(|i| i.id).collect();
        kws.push(pool[extra].clone());
        let after: Vec<String> = keyword_filter(&corpus(), &kws).unwrap().accepted.into_iter().map(|i| i.id).collect();
        prop_assert!(before.iter().all(|id| after.contains(id)));
    }

    #[test]
    fn distribution_is_permutation_invariant(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let cfg = TagConfig::default();
        let mut items: Vec<_> = corpus()
            .iter()
            .enumerate()
            .map(|(i, it)| (tag_behavior(&it.annotation, &cfg), BehaviorClass::ALL.get(i % 4).copied()))
            .collect();
        let d = tag_distribution(&items);
        items.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(tag_distribution(&items), d);
    }
}
