//! Recommendation from item embeddings.
//!
//! Item vectors are L2-normalized before use, so a user's centroid dotted
//! with a candidate equals the mean cosine between that candidate and every
//! item in the user's history.

mod evaluate;
mod metrics;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::trainer::EmbeddingModel;

pub use evaluate::{
    evaluate, rmse, rmse_samples, EvalConfig, MetricsReport, RmseSample, UserMetrics,
};
pub use metrics::{hit_rate_at_n, mean, ndcg_at_n, rmse_of};

#[derive(Clone, Debug, PartialEq)]
pub struct UserVector {
    pub user_id: String,
    pub vector: Vec<f64>,
    pub history_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub user_id: String,
    /// `(item_id, score)`, best first.
    pub items: Vec<(String, f64)>,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|(id, _)| id.as_str()).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Unit-length copies of every item vector of a model.
#[derive(Clone, Debug)]
pub struct ItemIndex<'a> {
    pub model: &'a EmbeddingModel,
    unit: Vec<f64>,
}

impl<'a> ItemIndex<'a> {
    pub fn new(model: &'a EmbeddingModel) -> Self {
        let unit = (0..model.len())
            .flat_map(|i| normalized(model.vector(i)))
            .collect();
        ItemIndex { model, unit }
    }

    pub fn unit(&self, index: usize) -> &[f64] {
        let d = self.model.dim;
        &self.unit[index * d..(index + 1) * d]
    }

    pub fn user_vector(&self, user_id: &str, history: &[usize]) -> Result<UserVector> {
        if history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let d = self.model.dim;
        let mut acc = vec![0.0; d];
        for &i in history {
            if i >= self.model.len() {
                return Err(Error::UnknownItem(i.to_string()));
            }
            for (a, v) in acc.iter_mut().zip(self.unit(i)) {
                *a += v;
            }
        }
        let n = history.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(UserVector {
            user_id: user_id.to_string(),
            vector: acc,
            history_size: history.len(),
        })
    }

    pub fn score(&self, u: &UserVector, item: usize) -> f64 {
        dot(&u.vector, self.unit(item))
    }

    /// The `k` best items outside `consumed`, ties broken by item id.
    pub fn top_k(&self, u: &UserVector, consumed: &HashSet<usize>, k: usize) -> RankedList {
        let vocab = &self.model.vocab;
        let mut scored: Vec<(usize, f64)> = (0..self.model.len())
            .filter(|i| !consumed.contains(i))
            .map(|i| (i, self.score(u, i)))
            .collect();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| {
            b.1.total_cmp(&a.1)
                .then_with(|| vocab.item(a.0).cmp(vocab.item(b.0)))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        RankedList {
            user_id: u.user_id.clone(),
            items: scored
                .into_iter()
                .map(|(i, s)| (vocab.item(i).to_string(), s))
                .collect(),
        }
    }
}

/// Mean of the normalized vectors of the history items.
pub fn user_vector(user_id: &str, history: &[usize], model: &EmbeddingModel) -> Result<UserVector> {
    ItemIndex::new(model).user_vector(user_id, history)
}

/// Dot product of the user vector with the normalized candidate; 0 for a
/// zero-norm candidate.
pub fn score(u: &UserVector, item: usize, model: &EmbeddingModel) -> f64 {
    dot(&u.vector, &normalized(model.vector(item)))
}

pub fn top_k(
    u: &UserVector,
    model: &EmbeddingModel,
    consumed: &HashSet<usize>,
    k: usize,
) -> RankedList {
    ItemIndex::new(model).top_k(u, consumed, k)
}
