use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::trainer::Vocabulary;

/// Keep probability `min(1, sqrt(t/f) + t/f)` for an item making up fraction
/// `f` of all training interactions. `t = 0` disables subsampling.
pub fn subsample_keep_probability(freq_fraction: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let r = t / freq_fraction;
    (r.sqrt() + r).min(1.0)
}

/// Draws item indices with probability proportional to `frequency^eta`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
    probabilities: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, eta: f64) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let weights: Vec<f64> = vocab
            .frequencies()
            .iter()
            .map(|&f| (f as f64).powf(eta))
            .collect();
        let z: f64 = weights.iter().sum();
        if !z.is_finite() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Config(format!(
                "negative-sampling exponent {eta} gives non-finite weights"
            )));
        }
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::Config(format!("negative sampler: {e}")))?;
        Ok(NegativeSampler {
            dist,
            probabilities: weights.iter().map(|w| w / z).collect(),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }
}

/// Per-item keep probabilities for a vocabulary.
pub(crate) fn keep_probabilities(vocab: &Vocabulary, t: f64) -> Vec<f64> {
    let total = vocab.total() as f64;
    vocab
        .frequencies()
        .iter()
        .map(|&f| subsample_keep_probability(f as f64 / total, t))
        .collect()
}
