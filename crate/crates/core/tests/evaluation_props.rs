mod support;

use std::collections::BTreeMap;

use negscope::evaluation::{align, confusion, metrics};
use proptest::prelude::*;
use support::oracles::{cohen_oracle, recount};

const CATS: [&str; 3] = ["NEG1", "NEG2", "NEG3"];

fn pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..3usize, 0..3usize), 1..=80)
}

fn names(pairs: &[(usize, usize)]) -> Vec<(&'static str, &'static str)> {
    pairs.iter().map(|&(g, p)| (CATS[g], CATS[p])).collect()
}

proptest! {
    #[test]
    fn metrics_match_recount(pairs in pairs()) {
        let cm = confusion(&names(&pairs), &CATS).unwrap();
        let (cells, classes) = recount(&pairs, 3);
        prop_assert_eq!(&cm.counts, &cells);
        let report = metrics::<f64>(&cm).unwrap();
        let n = pairs.len() as f64;
        let correct: usize = classes.iter().map(|c| c.tp).sum();
        prop_assert!((report.accuracy - correct as f64 / n).abs() < 1e-12);
        prop_assert!((report.micro_precision - report.accuracy).abs() < 1e-12);
        prop_assert!((report.micro_recall - report.accuracy).abs() < 1e-12);
        for (k, c) in classes.iter().enumerate() {
            let m = &report.per_class[CATS[k]];
            prop_assert_eq!(m.support, c.gold);
            let p = (c.predicted > 0).then(|| c.tp as f64 / c.predicted as f64);
            let r = (c.gold > 0).then(|| c.tp as f64 / c.gold as f64);
            let f = match (p, r) {
                (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
                (Some(_), Some(_)) => Some(0.0),
                _ => None,
            };
            for (got, want) in [(m.precision, p), (m.recall, r), (m.f1, f)] {
                match (got, want) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
        let gold: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        match (report.kappa_vs_gold, cohen_oracle(&gold, &pred, 3)) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn alignment_partitions_keys(
        gold in prop::collection::btree_map(0..40u32, 0..3usize, 0..30),
        pred in prop::collection::btree_map(0..40u32, 0..3usize, 0..30),
    ) {
        let to_map = |m: &BTreeMap<u32, usize>| -> BTreeMap<String, String> {
            m.iter().map(|(k, v)| (format!("i{k}"), CATS[*v].to_string())).collect()
        };
        let (g, p) = (to_map(&gold), to_map(&pred));
        match align(&g, &p) {
            Ok(a) => {
                prop_assert_eq!(a.items.len() + a.uncovered.len(), g.len());
                prop_assert_eq!(a.items.len() + a.spurious.len(), p.len());
                for (item, (gl, pl)) in a.items.iter().zip(&a.pairs) {
                    prop_assert_eq!(&g[item], gl);
                    prop_assert_eq!(&p[item], pl);
                }
            }
            Err(_) => prop_assert!(g.keys().all(|k| !p.contains_key(k))),
        }
    }
}

#[test]
fn perfect_predictions_score_one() {
    let pairs: Vec<(usize, usize)> = (0..30).map(|i| (i % 3, i % 3)).collect();
    let report = metrics::<f64>(&confusion(&names(&pairs), &CATS).unwrap()).unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.kappa_vs_gold, Some(1.0));
    assert_eq!(report.macro_f1, Some(1.0));
}
