//! Pair weights for the skip-gram objective.
//!
//! Four regimes are supported:
//!
//! * `uniform`: every in-window pair weighs 1 (plain Item2Vec).
//! * `disc`: pairs inside the same adaptive session weigh 2, others 1.
//! * `cont`: mean of a user-paced local decay and a timeline-position
//!   global decay, bounded to `[w_min, 1]`.
//! * `fixed-threshold`: `disc` with one global session threshold shared by
//!   all users.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::{TemporalConfig, UserTemporalProfile};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    #[default]
    Uniform,
    Disc,
    Cont,
    FixedThreshold,
}

impl WeightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightMode::Uniform => "uniform",
            WeightMode::Disc => "disc",
            WeightMode::Cont => "cont",
            WeightMode::FixedThreshold => "fixed-threshold",
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightMode::Uniform),
            "disc" => Ok(WeightMode::Disc),
            "cont" => Ok(WeightMode::Cont),
            "fixed-threshold" | "fixed_threshold" => Ok(WeightMode::FixedThreshold),
            other => Err(Error::Config(format!("unknown weight mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightConfig {
    pub mode: WeightMode,
    /// Session sensitivity (disc).
    pub lambda: f64,
    /// Decay rate of the local kernel (cont), at least 1.
    pub alpha: f64,
    /// Weight floor (cont), strictly inside (0, 1).
    pub w_min: f64,
    /// Global session threshold in seconds (fixed-threshold).
    pub fixed_tau: Option<f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            mode: WeightMode::Uniform,
            lambda: 1.5,
            alpha: 3.0,
            w_min: 0.3,
            fixed_tau: None,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            WeightMode::Uniform => Ok(()),
            WeightMode::Disc if !(self.lambda >= 0.0 && self.lambda.is_finite()) => {
                Err(Error::Config("disc mode needs a finite lambda >= 0".into()))
            }
            WeightMode::Disc => Ok(()),
            WeightMode::Cont if !(self.alpha >= 1.0 && self.alpha.is_finite()) => {
                Err(Error::Config("cont mode needs alpha >= 1".into()))
            }
            WeightMode::Cont if !(self.w_min > 0.0 && self.w_min < 1.0) => {
                Err(Error::Config("cont mode needs 0 < w_min < 1".into()))
            }
            WeightMode::Cont => Ok(()),
            WeightMode::FixedThreshold => match self.fixed_tau {
                Some(t) if t > 0.0 => Ok(()),
                _ => Err(Error::Config(
                    "fixed-threshold mode needs fixed_tau > 0".into(),
                )),
            },
        }
    }

    /// The temporal settings profiles must be built with for this regime.
    pub fn profile_config(&self, base: &TemporalConfig) -> TemporalConfig {
        TemporalConfig {
            lambda: self.lambda,
            fixed_tau: match self.mode {
                WeightMode::FixedThreshold => self.fixed_tau,
                _ => None,
            },
            ..base.clone()
        }
    }
}

/// 2 inside a session, 1 across sessions.
pub fn disc_weight(i: usize, j: usize, sessions: &[usize]) -> f64 {
    if sessions[i] == sessions[j] {
        2.0
    } else {
        1.0
    }
}

/// Standardized temporal distance, clamped below at 0.
pub fn z_score(d: f64, mu: f64, sigma: f64, epsilon: f64) -> f64 {
    ((d - mu) / (sigma + epsilon)).max(0.0)
}

/// `max(w_min, 1 - (z / (z + 1))^alpha)`.
pub fn local_weight(z: f64, alpha: f64, w_min: f64) -> f64 {
    let ratio = if z.is_infinite() { 1.0 } else { z / (z + 1.0) };
    w_min.max(1.0 - ratio.powf(alpha))
}

/// `1 - (1 - w_min) * |tn_i - tn_j|`, kept inside `[w_min, 1]` against rounding.
pub fn global_weight(tn_i: f64, tn_j: f64, w_min: f64) -> f64 {
    (1.0 - (1.0 - w_min) * (tn_i - tn_j).abs()).clamp(w_min, 1.0)
}

pub fn unified_weight(local: f64, global: f64) -> f64 {
    (local + global) / 2.0
}

/// Local and global components of the continuous weight. The local term is
/// `None` when the profile is degenerate.
pub fn cont_components(
    profile: &UserTemporalProfile,
    i: usize,
    j: usize,
    cfg: &WeightConfig,
    epsilon: f64,
) -> (Option<f64>, f64) {
    let global = global_weight(profile.t_norm[i], profile.t_norm[j], cfg.w_min);
    let local = match (profile.degenerate, profile.mu, profile.sigma) {
        (false, Some(mu), Some(sigma)) => {
            let d = (profile.t_cum[i] - profile.t_cum[j]).abs();
            Some(local_weight(
                z_score(d, mu, sigma, epsilon),
                cfg.alpha,
                cfg.w_min,
            ))
        }
        _ => None,
    };
    (local, global)
}

/// Weight of the pair at positions `i`, `j` of the profiled timeline.
pub fn pair_weight(
    profile: &UserTemporalProfile,
    i: usize,
    j: usize,
    cfg: &WeightConfig,
    epsilon: f64,
) -> f64 {
    match cfg.mode {
        WeightMode::Uniform => 1.0,
        WeightMode::Disc if profile.degenerate => 1.0,
        WeightMode::Disc | WeightMode::FixedThreshold => disc_weight(i, j, &profile.session_of),
        WeightMode::Cont => match cont_components(profile, i, j, cfg, epsilon) {
            (Some(local), global) => unified_weight(local, global),
            (None, global) => global,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{user_profile, UserTimeline};

    fn profile(ts: &[i64], cfg: &TemporalConfig) -> UserTemporalProfile {
        let tl =
            UserTimeline::new("u", ts.iter().enumerate().map(|(i, &t)| (i, t)).collect()).unwrap();
        user_profile(&tl, cfg).unwrap()
    }

    fn cont(w_min: f64) -> WeightConfig {
        WeightConfig {
            mode: WeightMode::Cont,
            alpha: 3.0,
            w_min,
            ..WeightConfig::default()
        }
    }

    #[test]
    fn disc_cases() {
        let s = [0, 0, 1];
        assert_eq!(disc_weight(0, 1, &s), 2.0);
        assert_eq!(disc_weight(1, 2, &s), 1.0);
    }

    #[test]
    fn z_score_cases() {
        assert_eq!(z_score(500.0, 200.0, 100.0, 0.0), 3.0);
        assert_eq!(z_score(200.0, 200.0, 100.0, 1e-6), 0.0);
        assert_eq!(z_score(10.0, 200.0, 100.0, 1e-6), 0.0);
    }

    #[test]
    fn local_cases() {
        assert_eq!(local_weight(0.0, 3.0, 0.3), 1.0);
        assert!((local_weight(3.0, 3.0, 0.3) - 0.578125).abs() < 1e-12);
        assert_eq!(local_weight(1e9, 3.0, 0.3), 0.3);
        assert_eq!(local_weight(f64::INFINITY, 3.0, 0.3), 0.3);
    }

    #[test]
    fn global_and_unified_cases() {
        assert_eq!(global_weight(0.4, 0.4, 0.3), 1.0);
        assert!((global_weight(0.0, 1.0, 0.3) - 0.3).abs() < 1e-15);
        assert!((global_weight(0.2, 0.7, 0.3) - 0.65).abs() < 1e-12);
        assert_eq!(unified_weight(1.0, 1.0), 1.0);
        assert!((unified_weight(0.578125, 0.65) - 0.6140625).abs() < 1e-12);
        assert_eq!(unified_weight(0.3, 0.3), 0.3);
    }

    #[test]
    fn cont_adjacent_pair_at_mean_gap() {
        // 101 events, constant 1000s gaps: mu=1000, sigma=0, adjacent t_norm distance 0.01
        let ts: Vec<i64> = (0..101).map(|k| k * 1000).collect();
        let p = profile(&ts, &TemporalConfig::default());
        let w = pair_weight(&p, 10, 11, &cont(0.3), 1e-6);
        assert!((w - 0.9965).abs() < 1e-12, "{w}");
    }

    #[test]
    fn cont_degenerate_uses_global_only() {
        let p = profile(&[0, 500, 1000], &TemporalConfig::default());
        assert!(p.degenerate);
        let w = pair_weight(&p, 0, 1, &cont(0.3), 1e-6);
        assert!((w - 0.65).abs() < 1e-12);
    }

    #[test]
    fn disc_and_uniform_dispatch() {
        let ts = [0, 1000, 2000, 3000, 4000, 100_000];
        let p = profile(&ts, &TemporalConfig::default());
        let disc = WeightConfig {
            mode: WeightMode::Disc,
            ..WeightConfig::default()
        };
        assert_eq!(pair_weight(&p, 0, 1, &disc, 1e-6), 2.0);
        assert_eq!(pair_weight(&p, 4, 5, &disc, 1e-6), 1.0);
        assert_eq!(pair_weight(&p, 4, 5, &WeightConfig::default(), 1e-6), 1.0);

        let degenerate = profile(&[0, 10], &TemporalConfig::default());
        assert_eq!(pair_weight(&degenerate, 0, 1, &disc, 1e-6), 1.0);
    }

    #[test]
    fn fixed_threshold_segments_globally() {
        let wc = WeightConfig {
            mode: WeightMode::FixedThreshold,
            fixed_tau: Some(1800.0),
            ..WeightConfig::default()
        };
        let tc = wc.profile_config(&TemporalConfig::default());
        let p = profile(&[0, 600, 5000], &tc);
        assert_eq!(pair_weight(&p, 0, 1, &wc, 1e-6), 2.0);
        assert_eq!(pair_weight(&p, 1, 2, &wc, 1e-6), 1.0);
    }

    #[test]
    fn validation() {
        assert!(cont(0.3).validate().is_ok());
        assert!(cont(1.0).validate().is_err());
        assert!(WeightConfig {
            alpha: 0.5,
            ..cont(0.3)
        }
        .validate()
        .is_err());
        assert!(WeightConfig {
            mode: WeightMode::FixedThreshold,
            ..WeightConfig::default()
        }
        .validate()
        .is_err());
        assert_eq!(
            "fixed-threshold".parse::<WeightMode>().unwrap(),
            WeightMode::FixedThreshold
        );
    }
}
