//! Ranking and score-prediction metrics with binary relevance.

use std::collections::HashSet;
use std::hash::Hash;

/// `DCG@n / IDCG@n` with gain 1 for relevant items and a `log2(rank + 1)`
/// discount. Zero when `relevant` is empty.
pub fn ndcg_at_n<T: Eq + Hash>(ranked: &[T], relevant: &HashSet<T>, n: usize) -> f64 {
    if relevant.is_empty() || n == 0 {
        return 0.0;
    }
    let dcg: f64 = ranked
        .iter()
        .take(n)
        .enumerate()
        .filter(|(_, item)| relevant.contains(item))
        .map(|(r, _)| 1.0 / ((r + 2) as f64).log2())
        .sum();
    let idcg: f64 = (0..n.min(relevant.len()))
        .map(|r| 1.0 / ((r + 2) as f64).log2())
        .sum();
    dcg / idcg
}

/// 1 if any relevant item is in the top `n`, else 0.
pub fn hit_rate_at_n<T: Eq + Hash>(ranked: &[T], relevant: &HashSet<T>, n: usize) -> f64 {
    if ranked.iter().take(n).any(|i| relevant.contains(i)) {
        1.0
    } else {
        0.0
    }
}

/// Root mean squared error over `(prediction, label)` pairs; 0 when empty.
pub fn rmse_of(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sse: f64 = pairs.iter().map(|(p, l)| (p - l) * (p - l)).sum();
    (sse / pairs.len() as f64).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
