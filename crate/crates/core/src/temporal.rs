//! Per-user pacing statistics.
//!
//! Everything here is derived from a single user's chronologically ordered
//! events. Inter-arrival intervals at or below `t_min` are treated as logging
//! noise and excluded from the estimation set; that set drives the IQR
//! session threshold and the clipped mean/standard deviation used by the
//! continuous weighting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};

/// Minimum number of valid intervals for quartiles to be meaningful.
pub const MIN_VALID_INTERVALS: usize = 4;

/// A user's events as `(item index, timestamp)`, ordered by time then index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserTimeline {
    pub user_id: String,
    events: Vec<(usize, i64)>,
}

impl UserTimeline {
    pub fn new(user_id: impl Into<String>, mut events: Vec<(usize, i64)>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyTimeline);
        }
        events.sort_by_key(|&(item, ts)| (ts, item));
        Ok(UserTimeline {
            user_id: user_id.into(),
            events,
        })
    }

    pub fn events(&self) -> &[(usize, i64)] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.events.iter().map(|e| e.0)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        self.events.iter().map(|e| e.1)
    }

    /// Raw consecutive gaps, one fewer than the number of events.
    pub fn gaps(&self) -> Vec<f64> {
        self.events
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) as f64)
            .collect()
    }
}

/// Groups a dataset into one timeline per user, ordered by user id.
/// Items the `index` lookup rejects are left out; users left with no events
/// are dropped.
pub fn timelines<F>(d: &Dataset, index: F) -> Vec<UserTimeline>
where
    F: Fn(&str) -> Option<usize>,
{
    let mut by_user: BTreeMap<&str, Vec<(usize, i64)>> = BTreeMap::new();
    for i in d.iter() {
        if let Some(idx) = index(&i.item_id) {
            by_user
                .entry(&i.user_id)
                .or_default()
                .push((idx, i.timestamp));
        }
    }
    by_user
        .into_iter()
        .filter_map(|(u, ev)| UserTimeline::new(u, ev).ok())
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuartileMethod {
    /// Linear interpolation between closest ranks, `h = (n - 1) p`.
    #[default]
    LinearInterpolation,
}

/// Whether cumulative time sums clipped or raw gaps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CumulativeTime {
    #[default]
    Clipped,
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemporalConfig {
    /// Noise floor in seconds; only gaps strictly above it are valid.
    pub t_min: f64,
    /// IQR multiplier for the session threshold.
    pub lambda: f64,
    pub epsilon: f64,
    /// IQR multiplier for the outlier fence used when clipping intervals.
    pub clip_factor: f64,
    pub quartile_method: QuartileMethod,
    pub cumulative: CumulativeTime,
    /// Segment every user at this global threshold instead of their own.
    pub fixed_tau: Option<f64>,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig {
            t_min: 300.0,
            lambda: 1.5,
            epsilon: 1e-6,
            clip_factor: 1.5,
            quartile_method: QuartileMethod::LinearInterpolation,
            cumulative: CumulativeTime::Clipped,
            fixed_tau: None,
        }
    }
}

impl TemporalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.t_min >= 0.0) {
            return bad("t_min must be >= 0");
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be a finite value >= 0");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be > 0");
        }
        if !(self.clip_factor > 0.0) {
            return bad("clip_factor must be > 0");
        }
        if let Some(t) = self.fixed_tau {
            if !(t > 0.0) {
                return bad("fixed_tau must be > 0");
            }
        }
        Ok(())
    }
}

/// Statistics of one user's timeline.
#[derive(Clone, Debug, PartialEq)]
pub struct UserTemporalProfile {
    pub user_id: String,
    /// Gaps strictly above `t_min`, in timeline order.
    pub valid_intervals: Vec<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    /// Session threshold; `+inf` for degenerate users.
    pub tau: f64,
    /// Mean of the clipped valid intervals.
    pub mu: Option<f64>,
    /// Population standard deviation of the clipped valid intervals.
    pub sigma: Option<f64>,
    /// `q3 + clip_factor * iqr`; `+inf` for degenerate users.
    pub clip_bound: f64,
    pub timestamps: Vec<i64>,
    pub t_cum: Vec<f64>,
    pub t_norm: Vec<f64>,
    pub session_of: Vec<usize>,
    pub degenerate: bool,
}

impl UserTemporalProfile {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn session_count(&self) -> usize {
        self.session_of.last().map_or(0, |s| s + 1)
    }
}

/// Consecutive gaps strictly greater than `t_min`.
pub fn valid_intervals(tl: &UserTimeline, t_min: f64) -> Vec<f64> {
    tl.gaps().into_iter().filter(|&g| g > t_min).collect()
}

/// Quantile of already sorted data by linear interpolation.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// First and third quartiles, or `None` below [`MIN_VALID_INTERVALS`].
pub fn quartiles(intervals: &[f64], method: QuartileMethod) -> Option<(f64, f64)> {
    if intervals.len() < MIN_VALID_INTERVALS {
        return None;
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(f64::total_cmp);
    match method {
        QuartileMethod::LinearInterpolation => Some((
            quantile_sorted(&sorted, 0.25),
            quantile_sorted(&sorted, 0.75),
        )),
    }
}

/// `Q3 + lambda * (Q3 - Q1)`; `None` signals a degenerate profile.
pub fn session_threshold(intervals: &[f64], lambda: f64, method: QuartileMethod) -> Option<f64> {
    quartiles(intervals, method).map(|(q1, q3)| q3 + lambda * (q3 - q1))
}

/// Session label per event: a raw gap above `tau` opens a new session.
pub fn segment_sessions(tl: &UserTimeline, tau: f64) -> Vec<usize> {
    sessions_from_gaps(&tl.gaps(), tau)
}

fn sessions_from_gaps(gaps: &[f64], tau: f64) -> Vec<usize> {
    let mut labels = Vec::with_capacity(gaps.len() + 1);
    let mut current = 0;
    labels.push(current);
    for &g in gaps {
        if g > tau {
            current += 1;
        }
        labels.push(current);
    }
    labels
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn user_profile(tl: &UserTimeline, cfg: &TemporalConfig) -> Result<UserTemporalProfile> {
    if tl.is_empty() {
        return Err(Error::EmptyTimeline);
    }
    let gaps = tl.gaps();
    let valid: Vec<f64> = gaps.iter().copied().filter(|&g| g > cfg.t_min).collect();
    let quarts = quartiles(&valid, cfg.quartile_method);
    let degenerate = quarts.is_none();

    let (q1, q3, tau, clip_bound, mu, sigma) = match quarts {
        Some((q1, q3)) => {
            let iqr = q3 - q1;
            let clip_bound = q3 + cfg.clip_factor * iqr;
            let clipped: Vec<f64> = valid.iter().map(|v| v.min(clip_bound)).collect();
            let (mu, sigma) = mean_and_population_std(&clipped);
            (
                Some(q1),
                Some(q3),
                q3 + cfg.lambda * iqr,
                clip_bound,
                Some(mu),
                Some(sigma),
            )
        }
        None => (None, None, f64::INFINITY, f64::INFINITY, None, None),
    };
    let tau = cfg.fixed_tau.unwrap_or(tau);

    let mut t_cum = Vec::with_capacity(tl.len());
    let mut acc = 0.0;
    t_cum.push(acc);
    for &g in &gaps {
        acc += match cfg.cumulative {
            CumulativeTime::Clipped => g.min(clip_bound),
            CumulativeTime::Raw => g,
        };
        t_cum.push(acc);
    }

    let timestamps: Vec<i64> = tl.timestamps().collect();
    let first = timestamps[0];
    let span = (timestamps[timestamps.len() - 1] - first) as f64;
    let t_norm = timestamps
        .iter()
        .map(|&t| {
            if span > 0.0 {
                (t - first) as f64 / span
            } else {
                0.0
            }
        })
        .collect();

    Ok(UserTemporalProfile {
        user_id: tl.user_id.clone(),
        valid_intervals: valid,
        q1,
        q3,
        tau,
        mu,
        sigma,
        clip_bound,
        timestamps,
        t_cum,
        t_norm,
        session_of: sessions_from_gaps(&gaps, tau),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(ts: &[i64]) -> UserTimeline {
        UserTimeline::new("u", ts.iter().enumerate().map(|(i, &t)| (i, t)).collect()).unwrap()
    }

    #[test]
    fn intervals_filtered_strictly() {
        assert_eq!(
            valid_intervals(&tl(&[0, 100, 500, 1500]), 300.0),
            vec![400.0, 1000.0]
        );
        assert_eq!(
            valid_intervals(&tl(&[0, 100, 400]), 300.0),
            Vec::<f64>::new()
        );
        assert_eq!(valid_intervals(&tl(&[0, 3, 7]), 0.0), vec![3.0, 4.0]);
        assert!(valid_intervals(&tl(&[5]), 0.0).is_empty());
    }

    #[test]
    fn threshold_linear_quartiles() {
        let iv = [100.0, 200.0, 300.0, 400.0];
        assert_eq!(
            quartiles(&iv, QuartileMethod::LinearInterpolation),
            Some((175.0, 325.0))
        );
        assert_eq!(
            session_threshold(&iv, 1.5, QuartileMethod::LinearInterpolation),
            Some(550.0)
        );
        assert_eq!(
            session_threshold(&iv, 0.0, QuartileMethod::LinearInterpolation),
            Some(325.0)
        );
        let flat = [42.0; 6];
        assert_eq!(
            session_threshold(&flat, 2.0, QuartileMethod::LinearInterpolation),
            Some(42.0)
        );
        assert_eq!(
            session_threshold(&iv[..3], 1.5, QuartileMethod::LinearInterpolation),
            None
        );
    }

    #[test]
    fn quantile_matches_rank_definition() {
        // independent check: p-th quantile over n points sits at rank (n-1)p
        let data: Vec<f64> = (0..11).map(|i| (i * i) as f64).collect();
        for (p, expected) in [
            (0.0, 0.0),
            (0.5, 25.0),
            (1.0, 100.0),
            (0.25, 6.5),
            (0.75, 56.5),
        ] {
            assert!((quantile_sorted(&data, p) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn sessions_break_on_large_gaps() {
        assert_eq!(
            segment_sessions(&tl(&[0, 10, 20, 10_020]), 550.0),
            vec![0, 0, 0, 1]
        );
        assert_eq!(
            segment_sessions(&tl(&[0, 10, 20, 10_020]), f64::INFINITY),
            vec![0; 4]
        );
        assert_eq!(
            segment_sessions(&tl(&[0, 1000, 2000, 3000]), 5.0),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn constant_gap_profile() {
        let p = user_profile(
            &tl(&[0, 1000, 2000, 3000, 4000]),
            &TemporalConfig::default(),
        )
        .unwrap();
        assert!(!p.degenerate);
        assert_eq!(p.mu, Some(1000.0));
        assert_eq!(p.sigma, Some(0.0));
        assert_eq!(p.clip_bound, 1000.0);
        assert_eq!(p.tau, 1000.0);
        assert_eq!(p.t_cum, vec![0.0, 1000.0, 2000.0, 3000.0, 4000.0]);
        assert_eq!(p.t_norm, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.session_count(), 1);
    }

    #[test]
    fn two_events_degenerate() {
        let p = user_profile(&tl(&[0, 5000]), &TemporalConfig::default()).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.session_count(), 1);
        assert!(p.tau.is_infinite());
        assert_eq!(p.mu, None);
        assert_eq!(p.t_norm, vec![0.0, 1.0]);
    }

    #[test]
    fn clipping_bounds_moments_and_cumulative_time() {
        // valid intervals 1000,1000,1000,1000,1e7: q1=q3=1000, fence=1000
        let ts = [0, 1000, 2000, 3000, 4000, 10_004_000];
        let p = user_profile(&tl(&ts), &TemporalConfig::default()).unwrap();
        assert_eq!(p.clip_bound, 1000.0);
        assert_eq!(p.mu, Some(1000.0));
        assert_eq!(*p.t_cum.last().unwrap(), 5000.0);
        assert_eq!(p.session_count(), 2);
        let raw = TemporalConfig {
            cumulative: CumulativeTime::Raw,
            ..TemporalConfig::default()
        };
        let p = user_profile(&tl(&ts), &raw).unwrap();
        assert_eq!(*p.t_cum.last().unwrap(), 10_004_000.0);
    }

    #[test]
    fn equal_timestamps_normalize_to_zero() {
        let p = user_profile(&tl(&[7, 7, 7]), &TemporalConfig::default()).unwrap();
        assert_eq!(p.t_norm, vec![0.0; 3]);
    }

    #[test]
    fn fixed_tau_overrides_adaptive() {
        let cfg = TemporalConfig {
            fixed_tau: Some(1500.0),
            ..TemporalConfig::default()
        };
        let p = user_profile(&tl(&[0, 1000, 3000]), &cfg).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.session_of, vec![0, 0, 1]);
    }

    #[test]
    fn timeline_sorting_and_grouping() {
        let t = UserTimeline::new("u", vec![(3, 10), (1, 10), (0, 5)]).unwrap();
        assert_eq!(t.events(), &[(0, 5), (1, 10), (3, 10)]);
        assert!(matches!(
            UserTimeline::new("u", vec![]),
            Err(Error::EmptyTimeline)
        ));

        use crate::corpus::Interaction;
        let d = Dataset::new(
            vec![
                Interaction::new("b", "x", 1),
                Interaction::new("a", "y", 2),
                Interaction::new("a", "zz", 3),
            ],
            None,
        );
        let tls = timelines(&d, |i| (i.len() == 1).then(|| i.as_bytes()[0] as usize));
        assert_eq!(tls.len(), 2);
        assert_eq!(tls[0].user_id, "a");
        assert_eq!(tls[0].len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(TemporalConfig::default().validate().is_ok());
        let bad = TemporalConfig {
            epsilon: 0.0,
            ..TemporalConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
