//! Weighted skip-gram training over per-user timelines.
//!
//! Each user's chronologically ordered history is treated as a sentence.
//! Every event within `window` positions of a target becomes a context, and
//! the pair contributes to the loss scaled by its temporal weight.

mod io;
mod sampler;
mod sgns;
mod vocab;

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::temporal::{timelines, user_profile, TemporalConfig, UserTemporalProfile, UserTimeline};
use crate::weighting::{pair_weight, WeightConfig};

pub use io::{read_context, read_model, write_context, write_model};
pub use sampler::{subsample_keep_probability, NegativeSampler};
pub use sgns::{
    pair_gradient, pair_loss, pair_update, sgns_step, EmbeddingModel, PairGradient, PairUpdate,
};
pub use vocab::Vocabulary;

use sgns::{adam_step_raw, sgd_step_raw, AdamState, Scratch};

/// Final learning rate as a fraction of the initial one.
pub const FINAL_LR_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    SgdLinearDecay,
    AdaptiveMoments,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    /// Exponent applied to item frequencies for negative sampling.
    pub neg_exponent: f64,
    /// Frequency subsampling threshold; 0 disables subsampling.
    pub subsample_t: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Number of pairs a worker claims at a time. Does not change the loss.
    pub batch_size: usize,
    pub seed: u64,
    pub workers: usize,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            window: 10,
            negatives: 7,
            neg_exponent: 0.75,
            subsample_t: 1e-3,
            learning_rate: 0.025,
            epochs: 20,
            batch_size: 16_384,
            seed: 42,
            workers: 1,
            optimizer: Optimizer::SgdLinearDecay,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if !(self.subsample_t >= 0.0) {
            return bad("subsample_t must be >= 0");
        }
        if !self.neg_exponent.is_finite() {
            return bad("neg_exponent must be finite");
        }
        if self.batch_size == 0 || self.workers == 0 {
            return bad("batch_size and workers must be >= 1");
        }
        Ok(())
    }
}

/// Learning rate after `progress` (fraction of all steps, in `[0, 1]`).
pub fn learning_rate_at(lr: f64, progress: f64) -> f64 {
    lr * (1.0 - progress * (1.0 - FINAL_LR_FRACTION))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingPair {
    pub target: usize,
    pub context: usize,
    pub weight: f64,
}

/// Pairs for one timeline. Positions are counted over the full sequence even
/// when `keep_mask` drops events, so a window of `w` always spans the same
/// stretch of real history.
pub fn generate_pairs(
    tl: &UserTimeline,
    profile: &UserTemporalProfile,
    window: usize,
    cfg: &WeightConfig,
    epsilon: f64,
    keep_mask: &[bool],
) -> Vec<TrainingPair> {
    let mut out = Vec::new();
    generate_pairs_with(
        tl,
        profile,
        window,
        keep_mask,
        &|p, i, j| pair_weight(p, i, j, cfg, epsilon),
        &mut out,
    );
    out
}

fn generate_pairs_with<F>(
    tl: &UserTimeline,
    profile: &UserTemporalProfile,
    window: usize,
    keep_mask: &[bool],
    weigh: &F,
    out: &mut Vec<TrainingPair>,
) where
    F: Fn(&UserTemporalProfile, usize, usize) -> f64,
{
    let events = tl.events();
    let n = events.len();
    for p in (0..n).filter(|&p| keep_mask[p]) {
        let lo = p.saturating_sub(window);
        let hi = (p + window).min(n - 1);
        for q in lo..=hi {
            if q == p || !keep_mask[q] || events[q].0 == events[p].0 {
                continue;
            }
            out.push(TrainingPair {
                target: events[p].0,
                context: events[q].0,
                weight: weigh(profile, p, q),
            });
        }
    }
}

/// Vocabulary, timelines and temporal profiles derived from training data.
#[derive(Clone, Debug)]
pub struct TrainingCorpus {
    pub vocab: Vocabulary,
    pub timelines: Vec<UserTimeline>,
    pub profiles: Vec<UserTemporalProfile>,
    pub epsilon: f64,
}

impl TrainingCorpus {
    /// `temporal` should already carry the weighting regime's settings, see
    /// [`WeightConfig::profile_config`].
    pub fn build(data: &Dataset, temporal: &TemporalConfig) -> Result<Self> {
        temporal.validate()?;
        let vocab = Vocabulary::build(data)?;
        let timelines = timelines(data, |i| vocab.index(i));
        let profiles = timelines
            .iter()
            .map(|tl| user_profile(tl, temporal))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingCorpus {
            vocab,
            timelines,
            profiles,
            epsilon: temporal.epsilon,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub pairs: usize,
    pub mean_loss: f64,
    /// Learning rate at the end of the epoch.
    pub learning_rate: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub log: Vec<EpochLog>,
}

/// Trains with weights from `wcfg`.
pub fn train(
    corpus: &TrainingCorpus,
    wcfg: &WeightConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    wcfg.validate()?;
    let eps = corpus.epsilon;
    train_with_weights(corpus, cfg, |p, i, j| pair_weight(p, i, j, wcfg, eps))
}

/// Convenience: build the corpus from `data` and train.
pub fn fit(
    data: &Dataset,
    temporal: &TemporalConfig,
    wcfg: &WeightConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let corpus = TrainingCorpus::build(data, &wcfg.profile_config(temporal))?;
    train(&corpus, wcfg, cfg)
}

/// The training loop with an arbitrary pair-weight function.
///
/// With one worker the result depends only on the inputs and `cfg.seed`.
pub fn train_with_weights<F>(
    corpus: &TrainingCorpus,
    cfg: &TrainConfig,
    weigh: F,
) -> Result<TrainOutcome>
where
    F: Fn(&UserTemporalProfile, usize, usize) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = EmbeddingModel::init(corpus.vocab.clone(), cfg.dim, &mut rng);
    let sampler = NegativeSampler::new(&corpus.vocab, cfg.neg_exponent)?;
    let keep_prob = sampler::keep_probabilities(&corpus.vocab, cfg.subsample_t);
    let mut adam = match cfg.optimizer {
        Optimizer::AdaptiveMoments => Some(AdamState::new(model.target.len())),
        Optimizer::SgdLinearDecay => None,
    };

    let any_pair = corpus
        .timelines
        .iter()
        .any(|tl| tl.events().windows(2).any(|w| w[0].0 != w[1].0));
    if !any_pair {
        return Err(Error::NoPairs);
    }

    let mut log = Vec::with_capacity(cfg.epochs);
    let mut pairs = Vec::new();
    let mut mask = Vec::new();
    for epoch in 0..cfg.epochs {
        pairs.clear();
        for (tl, profile) in corpus.timelines.iter().zip(&corpus.profiles) {
            mask.clear();
            mask.extend(tl.items().map(|item| {
                let p = keep_prob[item];
                p >= 1.0 || rng.random::<f64>() < p
            }));
            generate_pairs_with(tl, profile, cfg.window, &mask, &weigh, &mut pairs);
        }
        pairs.shuffle(&mut rng);

        let epoch_start = epoch as f64 / cfg.epochs as f64;
        let epoch_span = 1.0 / cfg.epochs as f64;
        let total_loss = if cfg.workers == 1 {
            run_sequential(
                &mut model,
                &pairs,
                &sampler,
                cfg,
                adam.as_mut(),
                &mut rng,
                epoch_start,
                epoch_span,
            )
        } else {
            let seed = rng.random::<u64>();
            run_hogwild(
                &mut model,
                &pairs,
                &sampler,
                cfg,
                adam.as_mut(),
                seed,
                epoch_start,
                epoch_span,
            )
        };
        if !total_loss.is_finite() || !model.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite values after epoch {epoch}; lower the learning rate"
            )));
        }
        log.push(EpochLog {
            epoch,
            pairs: pairs.len(),
            mean_loss: if pairs.is_empty() {
                0.0
            } else {
                total_loss / pairs.len() as f64
            },
            learning_rate: learning_rate_at(cfg.learning_rate, epoch_start + epoch_span),
        });
    }
    Ok(TrainOutcome { model, log })
}

fn draw_negatives<R: Rng>(
    sampler: &NegativeSampler,
    k: usize,
    context: usize,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..k {
        let n = sampler.sample(rng);
        if n != context {
            out.push(n);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sequential(
    model: &mut EmbeddingModel,
    pairs: &[TrainingPair],
    sampler: &NegativeSampler,
    cfg: &TrainConfig,
    mut adam: Option<&mut AdamState>,
    rng: &mut ChaCha8Rng,
    epoch_start: f64,
    epoch_span: f64,
) -> f64 {
    let mut scratch = Scratch::default();
    let mut negs = Vec::with_capacity(cfg.negatives);
    let n = pairs.len().max(1) as f64;
    let dim = model.dim;
    let mut total = 0.0;
    for (s, pair) in pairs.iter().enumerate() {
        draw_negatives(sampler, cfg.negatives, pair.context, rng, &mut negs);
        let lr = learning_rate_at(cfg.learning_rate, epoch_start + epoch_span * s as f64 / n);
        total += match adam.as_deref_mut() {
            None => sgd_step_raw(
                &mut model.target,
                &mut model.context,
                dim,
                pair,
                &negs,
                lr,
                &mut scratch,
            ),
            Some(state) => adam_step_raw(
                &mut model.target,
                &mut model.context,
                dim,
                pair,
                &negs,
                lr,
                state,
                &mut scratch,
            ),
        };
    }
    total
}

/// Raw view of a matrix shared by hogwild workers.
#[derive(Clone, Copy)]
struct SharedSlice {
    ptr: *mut f64,
    len: usize,
}

// SAFETY: workers write overlapping rows without synchronisation. Lost or
// torn updates are the accepted cost of lock-free asynchronous SGD.
unsafe impl Send for SharedSlice {}
unsafe impl Sync for SharedSlice {}

impl SharedSlice {
    fn new(v: &mut [f64]) -> Self {
        SharedSlice {
            ptr: v.as_mut_ptr(),
            len: v.len(),
        }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn get(&self) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.ptr, self.len)
    }
}

/// Asynchronous SGD: workers claim `batch_size` chunks of the shuffled stream
/// and update the shared matrices without locks. Not deterministic.
#[allow(clippy::too_many_arguments)]
fn run_hogwild(
    model: &mut EmbeddingModel,
    pairs: &[TrainingPair],
    sampler: &NegativeSampler,
    cfg: &TrainConfig,
    adam: Option<&mut AdamState>,
    seed: u64,
    epoch_start: f64,
    epoch_span: f64,
) -> f64 {
    let dim = model.dim;
    let target = SharedSlice::new(&mut model.target);
    let context = SharedSlice::new(&mut model.context);
    let adam_ptr = adam.map(|a| a as *mut AdamState as usize);
    let next = AtomicUsize::new(0);
    let n = pairs.len().max(1) as f64;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|w| {
                let next = &next;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        seed ^ (w as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    );
                    let mut scratch = Scratch::default();
                    let mut negs = Vec::with_capacity(cfg.negatives);
                    let mut total = 0.0;
                    // SAFETY: see SharedSlice.
                    let (t, c) = unsafe { (target.get(), context.get()) };
                    loop {
                        let start = next.fetch_add(cfg.batch_size, Ordering::Relaxed);
                        if start >= pairs.len() {
                            break;
                        }
                        let end = (start + cfg.batch_size).min(pairs.len());
                        let lr = learning_rate_at(
                            cfg.learning_rate,
                            epoch_start + epoch_span * start as f64 / n,
                        );
                        for pair in &pairs[start..end] {
                            draw_negatives(
                                sampler,
                                cfg.negatives,
                                pair.context,
                                &mut rng,
                                &mut negs,
                            );
                            total += match adam_ptr {
                                None => sgd_step_raw(t, c, dim, pair, &negs, lr, &mut scratch),
                                Some(p) => {
                                    // SAFETY: shared the same way as the matrices.
                                    let state = unsafe { &mut *(p as *mut AdamState) };
                                    adam_step_raw(t, c, dim, pair, &negs, lr, state, &mut scratch)
                                }
                            };
                        }
                    }
                    total
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .sum()
    })
}
