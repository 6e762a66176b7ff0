use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{hit_rate_at_n, mean, ndcg_at_n, rmse_of};
use super::ItemIndex;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::trainer::EmbeddingModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub cutoffs: Vec<usize>,
    /// Sampled non-consumed items per test positive for RMSE.
    pub negative_ratio: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            cutoffs: (1..=20).collect(),
            negative_ratio: 1,
            seed: 42,
        }
    }
}

/// Per-user metric values, in the order of [`EvalConfig::cutoffs`].
#[derive(Clone, Debug, PartialEq)]
pub struct UserMetrics {
    pub user_id: String,
    pub ndcg: Vec<f64>,
    pub hit_rate: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub ndcg_at: BTreeMap<usize, f64>,
    pub hitrate_at: BTreeMap<usize, f64>,
    pub rmse: f64,
    pub users_evaluated: usize,
    pub per_user: Vec<UserMetrics>,
}

type ByUser = BTreeMap<String, Vec<usize>>;

fn group(d: &Dataset, model: &EmbeddingModel, strict: bool) -> Result<ByUser> {
    let mut out: ByUser = BTreeMap::new();
    for i in d.iter() {
        match model.vocab.index(&i.item_id) {
            Some(idx) => out.entry(i.user_id.clone()).or_default().push(idx),
            None if strict => return Err(Error::UnknownItem(i.item_id.clone())),
            None => {}
        }
    }
    Ok(out)
}

/// One scored (user, item) pair of the RMSE protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RmseSample {
    pub user_id: String,
    pub item: usize,
    /// `(cosine + 1) / 2`.
    pub prediction: f64,
    pub label: f64,
}

fn sample_pairs(
    index: &ItemIndex<'_>,
    histories: &ByUser,
    positives: &ByUser,
    negative_ratio: usize,
    seed: u64,
) -> Result<Vec<RmseSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = index.model.len();
    let mut out = Vec::new();
    for (user, pos) in positives {
        let Some(hist) = histories.get(user) else {
            continue;
        };
        let u = index.user_vector(user, hist)?;
        let excluded: HashSet<usize> = hist.iter().chain(pos).copied().collect();
        let mut push = |item: usize, label: f64| {
            out.push(RmseSample {
                user_id: user.clone(),
                item,
                prediction: (index.score(&u, item) + 1.0) / 2.0,
                label,
            })
        };
        for &p in pos {
            push(p, 1.0);
            if excluded.len() >= n {
                continue;
            }
            for _ in 0..negative_ratio {
                let neg = loop {
                    let c = rng.random_range(0..n);
                    if !excluded.contains(&c) {
                        break c;
                    }
                };
                push(neg, 0.0);
            }
        }
    }
    Ok(out)
}

/// The labelled predictions behind [`rmse`]: every test positive (label 1)
/// of a user with a history, each followed by `negative_ratio` items drawn
/// uniformly from those the user has neither consumed nor holds out
/// (label 0). Users are visited in id order.
pub fn rmse_samples(
    model: &EmbeddingModel,
    history: &Dataset,
    test: &Dataset,
    negative_ratio: usize,
    seed: u64,
) -> Result<Vec<RmseSample>> {
    let histories = group(history, model, false)?;
    let positives = group(test, model, true)?;
    sample_pairs(
        &ItemIndex::new(model),
        &histories,
        &positives,
        negative_ratio,
        seed,
    )
}

/// Root mean squared error of [`rmse_samples`].
pub fn rmse(
    model: &EmbeddingModel,
    history: &Dataset,
    test: &Dataset,
    negative_ratio: usize,
    seed: u64,
) -> Result<f64> {
    finish_rmse(&rmse_samples(model, history, test, negative_ratio, seed)?)
}

fn finish_rmse(samples: &[RmseSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }
    Ok(rmse_of(
        &samples
            .iter()
            .map(|s| (s.prediction, s.label))
            .collect::<Vec<_>>(),
    ))
}

/// Ranks every non-consumed item for each user holding at least one target
/// interaction and averages NDCG/hit rate over those users.
///
/// `history` supplies the consumed items that define the user vector and are
/// excluded from ranking; `targets` holds the relevant items. Users are
/// processed in id order.
pub fn evaluate(
    model: &EmbeddingModel,
    history: &Dataset,
    targets: &Dataset,
    cfg: &EvalConfig,
) -> Result<MetricsReport> {
    if cfg.cutoffs.is_empty() || cfg.cutoffs.contains(&0) {
        return Err(Error::Config("cutoffs must be non-empty and >= 1".into()));
    }
    let index = ItemIndex::new(model);
    let histories = group(history, model, false)?;
    let positives = group(targets, model, true)?;
    let k = *cfg.cutoffs.iter().max().unwrap();

    let mut per_user = Vec::new();
    for (user, pos) in &positives {
        let Some(hist) = histories.get(user) else {
            continue;
        };
        let u = index.user_vector(user, hist)?;
        let consumed: HashSet<usize> = hist.iter().copied().collect();
        let ranked = index.top_k(&u, &consumed, k);
        let ids = ranked.ids();
        let relevant: HashSet<&str> = pos.iter().map(|&i| model.vocab.item(i)).collect();
        per_user.push(UserMetrics {
            user_id: user.clone(),
            ndcg: cfg
                .cutoffs
                .iter()
                .map(|&n| ndcg_at_n(&ids, &relevant, n))
                .collect(),
            hit_rate: cfg
                .cutoffs
                .iter()
                .map(|&n| hit_rate_at_n(&ids, &relevant, n))
                .collect(),
        });
    }
    if per_user.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }

    let column =
        |f: &dyn Fn(&UserMetrics) -> f64| mean(&per_user.iter().map(f).collect::<Vec<_>>());
    let mut ndcg_at = BTreeMap::new();
    let mut hitrate_at = BTreeMap::new();
    for (c, &n) in cfg.cutoffs.iter().enumerate() {
        ndcg_at.insert(n, column(&|m| m.ndcg[c]));
        hitrate_at.insert(n, column(&|m| m.hit_rate[c]));
    }
    Ok(MetricsReport {
        ndcg_at,
        hitrate_at,
        rmse: finish_rmse(&sample_pairs(
            &index,
            &histories,
            &positives,
            cfg.negative_ratio,
            cfg.seed,
        )?)?,
        users_evaluated: per_user.len(),
        per_user,
    })
}
