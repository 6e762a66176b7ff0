use std::collections::HashSet;

use tempvec::corpus::{Dataset, Interaction};
use tempvec::recsys::{evaluate, hit_rate_at_n, ndcg_at_n, top_k, user_vector, EvalConfig};
use tempvec::trainer::{EmbeddingModel, Vocabulary};
use tempvec::Error;

fn model() -> EmbeddingModel {
    // a and b point the same way, c is orthogonal, d opposite
    let vectors = [[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
    EmbeddingModel {
        vocab: Vocabulary::from_ids(["a", "b", "c", "d"].map(String::from).to_vec()),
        dim: 2,
        target: vectors.concat(),
        context: vec![0.0; 8],
    }
}

fn rows(rows: &[(&str, &str)]) -> Dataset {
    Dataset::new(
        rows.iter()
            .enumerate()
            .map(|(t, (u, i))| Interaction::new(*u, *i, t as i64))
            .collect(),
        None,
    )
}

#[test]
fn ranking_excludes_history_and_breaks_ties_by_id() {
    let m = model();
    let u = user_vector("u", &[2], &m).unwrap();
    let ranked = top_k(&u, &m, &HashSet::from([2]), 3);
    // a, b, d all score 0 against c
    assert_eq!(ranked.ids(), vec!["a", "b", "d"]);

    let u = user_vector("u", &[0], &m).unwrap();
    let ranked = top_k(&u, &m, &HashSet::from([0]), 10);
    assert_eq!(ranked.ids(), vec!["b", "c", "d"]);
    assert!((ranked.items[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn metric_examples() {
    let ranked = ["x", "y", "z"];
    assert_eq!(ndcg_at_n(&ranked, &HashSet::from(["x"]), 1), 1.0);
    assert_eq!(ndcg_at_n(&ranked, &HashSet::from(["z"]), 2), 0.0);
    assert!((ndcg_at_n(&ranked, &HashSet::from(["y"]), 5) - 1.0 / 3f64.log2()).abs() < 1e-12);
    assert_eq!(hit_rate_at_n(&ranked, &HashSet::from(["z"]), 3), 1.0);
    assert_eq!(hit_rate_at_n(&ranked, &HashSet::from(["z"]), 2), 0.0);
}

#[test]
fn evaluation_over_datasets() {
    let m = model();
    let history = rows(&[("u1", "a"), ("u2", "c")]);
    let test = rows(&[("u1", "b"), ("u2", "d"), ("u3", "a")]);
    let cfg = EvalConfig {
        cutoffs: vec![1, 3],
        ..EvalConfig::default()
    };
    let report = evaluate(&m, &history, &test, &cfg).unwrap();
    // u3 has no history and is skipped
    assert_eq!(report.users_evaluated, 2);
    // u1 ranks b first; u2 ranks a, b, d, so d is third
    assert_eq!(report.hitrate_at[&1], 0.5);
    assert_eq!(report.hitrate_at[&3], 1.0);
    let expected = (1.0 + 1.0 / 4f64.log2()) / 2.0;
    assert!((report.ndcg_at[&3] - expected).abs() < 1e-12);
    assert!(report.rmse >= 0.0 && report.rmse <= 1.0);
}

#[test]
fn evaluation_errors() {
    let m = model();
    let history = rows(&[("u1", "a")]);
    assert!(matches!(
        evaluate(&m, &history, &rows(&[("u9", "b")]), &EvalConfig::default()),
        Err(Error::NoEvaluableUsers)
    ));
    assert!(matches!(
        evaluate(&m, &history, &rows(&[("u1", "zz")]), &EvalConfig::default()),
        Err(Error::UnknownItem(_))
    ));
}
