use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use ries_core::dispatch::inverse_normal_cdf;

#[test]
fn known_quantiles() {
    assert!((inverse_normal_cdf(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
    assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
    assert!((inverse_normal_cdf(0.841_344_746_068_542_9).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn out_of_range_is_an_error() {
    for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(inverse_normal_cdf(p).is_err());
    }
}

proptest! {
    #[test]
    fn inverts_the_cdf(p in 1e-10f64..(1.0 - 1e-10)) {
        let x = inverse_normal_cdf(p).unwrap();
        let back = Normal::new(0.0, 1.0).unwrap().cdf(x);
        prop_assert!((back - p).abs() <= 1e-12 + 1e-9 * p.min(1.0 - p));
    }

    #[test]
    fn odd_symmetry(k in 1u32..(1 << 19)) {
        // dyadic p keeps 1 - p exact
        let p = k as f64 / (1u32 << 20) as f64;
        let a = inverse_normal_cdf(p).unwrap();
        let b = inverse_normal_cdf(1.0 - p).unwrap();
        prop_assert!((a + b).abs() <= 1e-12);
    }

    #[test]
    fn increasing(p in 1e-9f64..0.999, d in 1e-6f64..1e-3) {
        let q = (p + d).min(1.0 - 1e-9);
        prop_assert!(inverse_normal_cdf(q).unwrap() >= inverse_normal_cdf(p).unwrap());
    }
}
