//! Weighted skip-gram negative-sampling objective.
//!
//! For a pair `(t, c)` with weight `w` and negatives `n_1..n_k` the loss is
//!
//! ```text
//! L = -w * [ ln s(v_t . u_c) + sum_n ln s(-v_t . u_n) ]
//! ```
//!
//! where `v` rows live in the target matrix, `u` rows in the context matrix
//! and `s` is the logistic function. Every gradient is taken at the state
//! before the update, so repeated rows (a negative equal to the context, or
//! the same negative drawn twice) accumulate exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::trainer::{TrainingPair, Vocabulary};

/// Item vectors: `target` rows are the published embeddings, `context`
/// rows the auxiliary output vectors. Both are row-major `len x dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub dim: usize,
    pub target: Vec<f64>,
    /// Empty when a model is loaded without its context sidecar.
    pub context: Vec<f64>,
}

impl EmbeddingModel {
    /// Target rows uniform in `[-0.5/dim, 0.5/dim]`, context rows zero.
    pub fn init<R: Rng + ?Sized>(vocab: Vocabulary, dim: usize, rng: &mut R) -> Self {
        let n = vocab.len() * dim;
        let half = 0.5 / dim as f64;
        let target = (0..n).map(|_| rng.random_range(-half..=half)).collect();
        EmbeddingModel {
            vocab,
            dim,
            target,
            context: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, index: usize) -> &[f64] {
        &self.target[index * self.dim..(index + 1) * self.dim]
    }

    pub fn context_vector(&self, index: usize) -> &[f64] {
        &self.context[index * self.dim..(index + 1) * self.dim]
    }

    pub fn has_context(&self) -> bool {
        self.context.len() == self.target.len()
    }

    pub fn is_finite(&self) -> bool {
        self.target
            .iter()
            .chain(&self.context)
            .all(|v| v.is_finite())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn row(m: &[f64], i: usize, dim: usize) -> &[f64] {
    &m[i * dim..(i + 1) * dim]
}

/// Context rows touched by a pair together with `dL/d(score)` for each;
/// the first entry is the positive context.
fn coefficients(
    target: &[f64],
    context: &[f64],
    dim: usize,
    pair: &TrainingPair,
    negatives: &[usize],
    coefs: &mut Vec<(usize, f64)>,
) -> f64 {
    coefs.clear();
    let t = row(target, pair.target, dim);
    let s = dot(t, row(context, pair.context, dim));
    let mut loss = -log_sigmoid(s);
    coefs.push((pair.context, pair.weight * (sigmoid(s) - 1.0)));
    for &n in negatives {
        let s = dot(t, row(context, n, dim));
        loss -= log_sigmoid(-s);
        coefs.push((n, pair.weight * sigmoid(s)));
    }
    pair.weight * loss
}

/// Weighted loss of one pair at the current parameters.
pub fn pair_loss(model: &EmbeddingModel, pair: &TrainingPair, negatives: &[usize]) -> f64 {
    let mut coefs = Vec::with_capacity(negatives.len() + 1);
    coefficients(
        &model.target,
        &model.context,
        model.dim,
        pair,
        negatives,
        &mut coefs,
    )
}

/// Analytic gradient of [`pair_loss`], with repeated context rows summed.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub target: Vec<f64>,
    /// `(context row, gradient)`, one entry per distinct row, first-seen order.
    pub context: Vec<(usize, Vec<f64>)>,
}

pub fn pair_gradient(
    model: &EmbeddingModel,
    pair: &TrainingPair,
    negatives: &[usize],
) -> PairGradient {
    let dim = model.dim;
    let mut coefs = Vec::new();
    coefficients(
        &model.target,
        &model.context,
        dim,
        pair,
        negatives,
        &mut coefs,
    );
    let t = model.vector(pair.target);
    let mut target = vec![0.0; dim];
    let mut context: Vec<(usize, Vec<f64>)> = Vec::new();
    for &(r, g) in &coefs {
        let c = model.context_vector(r);
        for (acc, ci) in target.iter_mut().zip(c) {
            *acc += g * ci;
        }
        let slot = match context.iter().position(|(row, _)| *row == r) {
            Some(p) => p,
            None => {
                context.push((r, vec![0.0; dim]));
                context.len() - 1
            }
        };
        for (acc, ti) in context[slot].1.iter_mut().zip(t) {
            *acc += g * ti;
        }
    }
    PairGradient { target, context }
}

/// The parameter changes one SGD step would make, one entry per touched
/// context occurrence (in positive-then-negatives order).
#[derive(Clone, Debug, PartialEq)]
pub struct PairUpdate {
    pub target: Vec<f64>,
    pub context: Vec<(usize, Vec<f64>)>,
}

pub fn pair_update(
    model: &EmbeddingModel,
    pair: &TrainingPair,
    negatives: &[usize],
    lr: f64,
) -> PairUpdate {
    let dim = model.dim;
    let mut coefs = Vec::new();
    coefficients(
        &model.target,
        &model.context,
        dim,
        pair,
        negatives,
        &mut coefs,
    );
    let t = model.vector(pair.target);
    let mut grad_t = vec![0.0; dim];
    accumulate_target_grad(&model.context, dim, &coefs, &mut grad_t);
    PairUpdate {
        target: grad_t.iter().map(|g| -(lr * g)).collect(),
        context: coefs
            .iter()
            .map(|&(r, g)| (r, t.iter().map(|ti| -(lr * (g * ti))).collect()))
            .collect(),
    }
}

fn accumulate_target_grad(context: &[f64], dim: usize, coefs: &[(usize, f64)], grad: &mut [f64]) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    for &(r, g) in coefs {
        for (acc, ci) in grad.iter_mut().zip(row(context, r, dim)) {
            *acc += g * ci;
        }
    }
}

/// Reusable buffers for the training loop.
#[derive(Default)]
pub(crate) struct Scratch {
    coefs: Vec<(usize, f64)>,
    grad: Vec<f64>,
    row_grad: Vec<f64>,
}

/// One plain SGD step on raw matrices; returns the pair loss.
pub(crate) fn sgd_step_raw(
    target: &mut [f64],
    context: &mut [f64],
    dim: usize,
    pair: &TrainingPair,
    negatives: &[usize],
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let loss = coefficients(target, context, dim, pair, negatives, &mut scratch.coefs);
    scratch.grad.resize(dim, 0.0);
    accumulate_target_grad(context, dim, &scratch.coefs, &mut scratch.grad);
    let t = &mut target[pair.target * dim..(pair.target + 1) * dim];
    for &(r, g) in &scratch.coefs {
        for (ci, ti) in context[r * dim..(r + 1) * dim].iter_mut().zip(t.iter()) {
            *ci -= lr * (g * ti);
        }
    }
    for (ti, gi) in t.iter_mut().zip(&scratch.grad) {
        *ti -= lr * gi;
    }
    loss
}

/// Lazily updated Adam moments for both matrices.
#[derive(Clone, Debug)]
pub(crate) struct AdamState {
    m_target: Vec<f64>,
    v_target: Vec<f64>,
    m_context: Vec<f64>,
    v_context: Vec<f64>,
    pub(crate) step: u64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub(crate) fn new(len: usize) -> Self {
        AdamState {
            m_target: vec![0.0; len],
            v_target: vec![0.0; len],
            m_context: vec![0.0; len],
            v_context: vec![0.0; len],
            step: 0,
        }
    }
}

fn adam_row(param: &mut [f64], m: &mut [f64], v: &mut [f64], grad: &[f64], lr: f64, step: u64) {
    let c1 = 1.0 - BETA1.powi(step as i32);
    let c2 = 1.0 - BETA2.powi(step as i32);
    for i in 0..param.len() {
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
    }
}

/// One Adam step on raw matrices; returns the pair loss.
#[allow(clippy::too_many_arguments)]
pub(crate) fn adam_step_raw(
    target: &mut [f64],
    context: &mut [f64],
    dim: usize,
    pair: &TrainingPair,
    negatives: &[usize],
    lr: f64,
    state: &mut AdamState,
    scratch: &mut Scratch,
) -> f64 {
    state.step += 1;
    let step = state.step.min(i32::MAX as u64);
    let loss = coefficients(target, context, dim, pair, negatives, &mut scratch.coefs);
    scratch.grad.resize(dim, 0.0);
    scratch.row_grad.resize(dim, 0.0);
    accumulate_target_grad(context, dim, &scratch.coefs, &mut scratch.grad);
    let tr = pair.target * dim..(pair.target + 1) * dim;
    for &(r, g) in &scratch.coefs {
        for (rg, ti) in scratch.row_grad.iter_mut().zip(&target[tr.clone()]) {
            *rg = g * ti;
        }
        let cr = r * dim..(r + 1) * dim;
        adam_row(
            &mut context[cr.clone()],
            &mut state.m_context[cr.clone()],
            &mut state.v_context[cr],
            &scratch.row_grad,
            lr,
            step,
        );
    }
    adam_row(
        &mut target[tr.clone()],
        &mut state.m_target[tr.clone()],
        &mut state.v_target[tr],
        &scratch.grad,
        lr,
        step,
    );
    loss
}

/// Applies the exact gradient of the weighted loss with step size `lr`.
/// Returns the pair loss measured before the update.
pub fn sgns_step(
    pair: &TrainingPair,
    negatives: &[usize],
    model: &mut EmbeddingModel,
    lr: f64,
) -> Result<f64> {
    let n = model.len();
    if pair.target >= n || pair.context >= n || negatives.iter().any(|&i| i >= n) {
        return Err(Error::Config(
            "pair references an index outside the vocabulary".into(),
        ));
    }
    if !(lr > 0.0) {
        return Err(Error::Config("learning rate must be > 0".into()));
    }
    let mut scratch = Scratch::default();
    let loss = sgd_step_raw(
        &mut model.target,
        &mut model.context,
        model.dim,
        pair,
        negatives,
        lr,
        &mut scratch,
    );
    if !loss.is_finite() {
        return Err(Error::Divergence(format!(
            "non-finite loss {loss} on pair ({}, {})",
            pair.target, pair.context
        )));
    }
    Ok(loss)
}
