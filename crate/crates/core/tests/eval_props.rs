use std::collections::HashMap;

use proptest::prelude::*;
use reaction_miner::evalharness::{
    agree_labels, fleiss_kappa, metrics, nb_predict, nb_train, AnnotationSet, Features,
};
use reaction_miner::textproc::{tokenize_en, TokenSeq};

/// `items` rows of `m` votes each.
fn vote_table() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (2usize..6)
        .prop_flat_map(|m| prop::collection::vec(prop::collection::vec(any::<bool>(), m), 1..40))
}

fn permuted<T: Clone>(items: &[T], order: &[usize]) -> Vec<T> {
    order.iter().map(|&i| items[i].clone()).collect()
}

fn docs() -> impl Strategy<Value = Vec<(String, bool)>> {
    let text = prop::collection::vec("(lol|sure|great|news|sad|yeah|right|!)", 0..8)
        .prop_map(|w| w.join(" "));
    prop::collection::vec((text, any::<bool>()), 2..30).prop_filter("both classes", |d| {
        d.iter().any(|x| x.1) && d.iter().any(|x| !x.1)
    })
}

fn tokens(i: usize, text: &str) -> TokenSeq {
    TokenSeq::new(format!("d{i}"), tokenize_en(text))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kappa_ignores_item_and_annotator_order(
        table in vote_table(),
        seed in any::<u64>(),
    ) {
        let base = fleiss_kappa(&AnnotationSet::from_votes(&table).unwrap());

        let mut items: Vec<usize> = (0..table.len()).collect();
        let mut cols: Vec<usize> = (0..table[0].len()).collect();
        // Deterministic shuffles driven by the seed.
        let mut x = seed | 1;
        let mut next = move || { x ^= x << 13; x ^= x >> 7; x ^= x << 17; x };
        for i in (1..items.len()).rev() { items.swap(i, (next() % (i as u64 + 1)) as usize); }
        for i in (1..cols.len()).rev() { cols.swap(i, (next() % (i as u64 + 1)) as usize); }

        let shuffled: Vec<Vec<bool>> = permuted(&table, &items)
            .into_iter()
            .map(|row| permuted(&row, &cols))
            .collect();
        let k = fleiss_kappa(&AnnotationSet::from_votes(&shuffled).unwrap());
        prop_assert_eq!(k.degenerate, base.degenerate);
        prop_assert!((k.value - base.value).abs() < 1e-12);
        prop_assert!(k.value <= 1.0 + 1e-12);
    }

    #[test]
    fn agree_levels_are_nested(table in vote_table()) {
        let set = AnnotationSet::from_votes(&table).unwrap();
        let levels: Vec<_> = (1..=set.annotators())
            .map(|k| agree_labels(&set, k).unwrap())
            .collect();
        for pair in levels.windows(2) {
            prop_assert!(pair[1].positives().is_subset(&pair[0].positives()));
        }
        prop_assert!(agree_labels(&set, set.annotators() + 1).is_err());
        prop_assert!(agree_labels(&set, 0).is_err());
    }

    #[test]
    fn metric_identities(table in vote_table(), guesses in prop::collection::vec(any::<bool>(), 40), k in 1usize..3) {
        let set = AnnotationSet::from_votes(&table).unwrap();
        let truth = agree_labels(&set, k).unwrap();
        let pred: HashMap<String, bool> = (0..table.len()).map(|i| (i.to_string(), guesses[i])).collect();
        let r = metrics(&pred, &truth).unwrap();
        let total = (r.tp + r.fp + r.tn + r.fn_) as f64;
        prop_assert_eq!(total as usize, table.len());
        prop_assert!((r.accuracy - (r.tp + r.tn) as f64 / total).abs() < 1e-12);
        if r.tp + r.fp > 0 {
            prop_assert!((r.precision - r.tp as f64 / (r.tp + r.fp) as f64).abs() < 1e-12);
        }
        if r.tp + r.fn_ > 0 {
            prop_assert!((r.recall - r.tp as f64 / (r.tp + r.fn_) as f64).abs() < 1e-12);
        }
        if r.precision + r.recall > 0.0 {
            let f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
            prop_assert!((r.f1 - f1).abs() < 1e-12);
        } else {
            prop_assert_eq!(r.f1, 0.0);
        }
        for v in [r.accuracy, r.precision, r.recall, r.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn naive_bayes_ignores_training_order(
        docs in docs(),
        probes in prop::collection::vec("(lol|sure|great|news|sad|unseen|!)( (lol|sure|great|news|sad|unseen|!)){0,5}", 1..8),
        tfidf in any::<bool>(),
    ) {
        let features = if tfidf { Features::Tfidf } else { Features::Bow };
        let forward: Vec<(TokenSeq, bool)> = docs.iter().enumerate().map(|(i, (t, y))| (tokens(i, t), *y)).collect();
        let mut backward = forward.clone();
        backward.reverse();
        let a = nb_train(&forward, features).unwrap();
        let b = nb_train(&backward, features).unwrap();
        prop_assert_eq!(&a, &b);
        for (i, p) in probes.iter().enumerate() {
            let t = tokens(i, p);
            prop_assert_eq!(nb_predict(&a, &t), nb_predict(&b, &t));
            prop_assert_eq!(nb_predict(&a, &t), nb_predict(&a, &t));
        }
    }
}
