//! Cartesian hyperparameter search scored on the validation split.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tempvec::recsys::{evaluate, MetricsReport};
use tempvec::trainer::{fit, TrainConfig};
use tempvec::weighting::{WeightConfig, WeightMode};

use crate::artifacts::Splits;
use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Value lists per hyperparameter. An empty list means "use the base
/// config's value".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub mode: Vec<WeightMode>,
    pub window: Vec<usize>,
    pub neg_exponent: Vec<f64>,
    pub subsample_t: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub epochs: Vec<usize>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub w_min: Vec<f64>,
    pub fixed_tau: Vec<f64>,
    /// Selection metric on the validation split: `ndcg@N` or `hitrate@N`.
    pub metric: String,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            mode: Vec::new(),
            window: Vec::new(),
            neg_exponent: Vec::new(),
            subsample_t: Vec::new(),
            learning_rate: Vec::new(),
            epochs: Vec::new(),
            lambda: Vec::new(),
            alpha: Vec::new(),
            w_min: Vec::new(),
            fixed_tau: Vec::new(),
            metric: "ndcg@10".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ndcg(usize),
    HitRate(usize),
}

impl Metric {
    pub fn cutoff(&self) -> usize {
        match *self {
            Metric::Ndcg(n) | Metric::HitRate(n) => n,
        }
    }

    pub fn read(&self, r: &MetricsReport) -> f64 {
        match *self {
            Metric::Ndcg(n) => r.ndcg_at[&n],
            Metric::HitRate(n) => r.hitrate_at[&n],
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Ndcg(n) => write!(f, "ndcg@{n}"),
            Metric::HitRate(n) => write!(f, "hitrate@{n}"),
        }
    }
}

impl GridSpec {
    pub fn metric(&self) -> Result<Metric> {
        let bad = || {
            CliError::config(format!(
                "grid.metric must be ndcg@N or hitrate@N, got {:?}",
                self.metric
            ))
        };
        let (name, n) = self.metric.split_once('@').ok_or_else(bad)?;
        let n: usize = n.parse().ok().filter(|&n| n >= 1).ok_or_else(bad)?;
        match name {
            "ndcg" => Ok(Metric::Ndcg(n)),
            "hitrate" | "hit_rate" => Ok(Metric::HitRate(n)),
            _ => Err(bad()),
        }
    }

    /// All distinct grid points. Parameters that a mode ignores keep their
    /// base values, so e.g. a lambda list does not multiply uniform points.
    pub fn points(&self, weight: &WeightConfig, train: &TrainConfig) -> Vec<GridPoint> {
        let mut pts = vec![GridPoint {
            weight: weight.clone(),
            train: train.clone(),
        }];
        pts = vary(pts, &self.mode, |p, v| p.weight.mode = v);
        pts = vary(pts, &self.window, |p, v| p.train.window = v);
        pts = vary(pts, &self.neg_exponent, |p, v| p.train.neg_exponent = v);
        pts = vary(pts, &self.subsample_t, |p, v| p.train.subsample_t = v);
        pts = vary(pts, &self.learning_rate, |p, v| p.train.learning_rate = v);
        pts = vary(pts, &self.epochs, |p, v| p.train.epochs = v);
        pts = vary(pts, &self.lambda, |p, v| p.weight.lambda = v);
        pts = vary(pts, &self.alpha, |p, v| p.weight.alpha = v);
        pts = vary(pts, &self.w_min, |p, v| p.weight.w_min = v);
        pts = vary(pts, &self.fixed_tau, |p, v| p.weight.fixed_tau = Some(v));

        let mut out: Vec<GridPoint> = Vec::with_capacity(pts.len());
        for mut p in pts {
            let mode = p.weight.mode;
            if mode != WeightMode::Disc {
                p.weight.lambda = weight.lambda;
            }
            if mode != WeightMode::Cont {
                p.weight.alpha = weight.alpha;
                p.weight.w_min = weight.w_min;
            }
            if mode != WeightMode::FixedThreshold {
                p.weight.fixed_tau = weight.fixed_tau;
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

fn vary<V: Clone>(
    pts: Vec<GridPoint>,
    values: &[V],
    set: impl Fn(&mut GridPoint, V),
) -> Vec<GridPoint> {
    if values.is_empty() {
        return pts;
    }
    let mut out = Vec::with_capacity(pts.len() * values.len());
    for p in &pts {
        for v in values {
            let mut q = p.clone();
            set(&mut q, v.clone());
            out.push(q);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub weight: WeightConfig,
    pub train: TrainConfig,
}

impl GridPoint {
    /// The base config with this point's settings and no grid.
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        RunConfig {
            weight: self.weight.clone(),
            train: self.train.clone(),
            grid: GridSpec {
                metric: base.grid.metric.clone(),
                ..GridSpec::default()
            },
            ..base.clone()
        }
    }
}

/// Trains on the train split and scores on validation, using the train
/// interactions as user histories.
pub fn score_point(cfg: &RunConfig, point: &GridPoint, splits: &Splits) -> Result<MetricsReport> {
    let metric = cfg.grid.metric()?;
    let model = fit(&splits.train, &cfg.temporal, &point.weight, &point.train)?.model;
    let mut eval = cfg.eval.clone();
    if !eval.cutoffs.contains(&metric.cutoff()) {
        eval.cutoffs.push(metric.cutoff());
        eval.cutoffs.sort_unstable();
    }
    Ok(evaluate(&model, &splits.train, &splits.validation, &eval)?)
}

#[derive(Debug)]
pub struct GridRow {
    pub point: GridPoint,
    pub outcome: Result<MetricsReport>,
}

#[derive(Debug)]
pub struct GridResult {
    pub metric: Metric,
    pub rows: Vec<GridRow>,
    /// Row with the highest metric; the earliest wins ties.
    pub best: usize,
}

impl GridResult {
    pub fn score(&self, row: usize) -> Option<f64> {
        self.rows[row]
            .outcome
            .as_ref()
            .ok()
            .map(|r| self.metric.read(r))
    }

    pub fn best_point(&self) -> &GridPoint {
        &self.rows[self.best].point
    }

    /// Tab-separated table, one row per point in grid order.
    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "point\tmode\twindow\tneg_exponent\tsubsample_t\tlearning_rate\tepochs\tlambda\talpha\tw_min\tfixed_tau\tstatus\t{}\trmse\tusers_evaluated",
            self.metric
        )
        .unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            let (w, t) = (&row.point.weight, &row.point.train);
            let only = |m: WeightMode, v: String| if w.mode == m { v } else { "-".into() };
            write!(
                s,
                "{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                w.mode,
                t.window,
                t.neg_exponent,
                t.subsample_t,
                t.learning_rate,
                t.epochs,
                only(WeightMode::Disc, w.lambda.to_string()),
                only(WeightMode::Cont, w.alpha.to_string()),
                only(WeightMode::Cont, w.w_min.to_string()),
                only(
                    WeightMode::FixedThreshold,
                    w.fixed_tau.map_or("-".into(), |v| v.to_string())
                ),
            )
            .unwrap();
            match &row.outcome {
                Ok(r) => writeln!(
                    s,
                    "\tok\t{}\t{}\t{}",
                    self.metric.read(r),
                    r.rmse,
                    r.users_evaluated
                ),
                Err(e) => writeln!(s, "\tfailed:{}\t\t\t", e.category),
            }
            .unwrap();
        }
        s
    }
}

/// Scores every point, `jobs` at a time. Failed points are recorded; the
/// search only fails when no point succeeds.
pub fn run(cfg: &RunConfig, splits: &Splits, jobs: usize) -> Result<GridResult> {
    let metric = cfg.grid.metric()?;
    let points = cfg.grid.points(&cfg.weight, &cfg.train);
    let slots: Vec<Mutex<Option<Result<MetricsReport>>>> =
        points.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, points.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = points.get(i) else { break };
                let outcome = p
                    .weight
                    .validate()
                    .map_err(CliError::from)
                    .and_then(|_| score_point(cfg, p, splits));
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let rows: Vec<GridRow> = points
        .into_iter()
        .zip(slots)
        .map(|(point, slot)| GridRow {
            point,
            outcome: slot.into_inner().unwrap().expect("every point is scored"),
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, row) in rows.iter().enumerate() {
        if let Ok(r) = &row.outcome {
            let v = metric.read(r);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let Some((best, _)) = best else {
        return Err(CliError::new("grid", "every grid point failed"));
    };
    Ok(GridResult { metric, rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_specific_parameters_do_not_multiply_other_modes() {
        let spec = GridSpec {
            mode: vec![WeightMode::Uniform, WeightMode::Disc, WeightMode::Cont],
            lambda: vec![1.0, 1.5, 2.0],
            alpha: vec![3.0, 5.0],
            w_min: vec![0.3, 0.5],
            ..GridSpec::default()
        };
        let pts = spec.points(&WeightConfig::default(), &TrainConfig::default());
        assert_eq!(pts.len(), 1 + 3 + 4);
        let disc: Vec<f64> = pts
            .iter()
            .filter(|p| p.weight.mode == WeightMode::Disc)
            .map(|p| p.weight.lambda)
            .collect();
        assert_eq!(disc, vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn empty_spec_is_the_base_point() {
        let w = WeightConfig::default();
        let t = TrainConfig::default();
        let pts = GridSpec::default().points(&w, &t);
        assert_eq!(
            pts,
            vec![GridPoint {
                weight: w,
                train: t
            }]
        );
    }

    #[test]
    fn shared_parameters_form_a_product() {
        let spec = GridSpec {
            neg_exponent: vec![-1.0, -0.5, 0.5, 1.0],
            subsample_t: vec![1e-3, 1e-4, 1e-5],
            epochs: vec![20, 50],
            ..GridSpec::default()
        };
        assert_eq!(
            spec.points(&WeightConfig::default(), &TrainConfig::default())
                .len(),
            24
        );
    }

    #[test]
    fn metric_parsing() {
        let spec = |m: &str| GridSpec {
            metric: m.into(),
            ..GridSpec::default()
        };
        assert_eq!(spec("ndcg@10").metric().unwrap(), Metric::Ndcg(10));
        assert_eq!(spec("hitrate@5").metric().unwrap(), Metric::HitRate(5));
        assert!(spec("ndcg@0").metric().is_err());
        assert!(spec("mrr@10").metric().is_err());
    }
}
