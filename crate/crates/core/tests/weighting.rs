use proptest::prelude::*;
use tempvec::weighting::{local_weight, unified_weight, z_score};

#[test]
fn z_score_clamps_at_mean() {
    assert_eq!(z_score(10.0, 20.0, 5.0, 1e-6), 0.0);
    assert!((z_score(30.0, 20.0, 5.0, 0.0) - 2.0).abs() < 1e-15);
    assert!(z_score(30.0, 20.0, 0.0, 1e-6).is_finite());
}

#[test]
fn local_weight_limits() {
    assert_eq!(local_weight(0.0, 3.0, 0.3), 1.0);
    assert_eq!(local_weight(f64::INFINITY, 3.0, 0.3), 0.3);
    assert!((unified_weight(0.4, 0.8) - 0.6).abs() < 1e-15);
}

proptest! {
    #[test]
    fn larger_alpha_decays_more_slowly(z in 0.0..20.0f64, a in 1.0..8.0f64, b in 1.0..8.0f64, w_min in 0.0..0.9f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(local_weight(z, hi, w_min) >= local_weight(z, lo, w_min));
    }
}
