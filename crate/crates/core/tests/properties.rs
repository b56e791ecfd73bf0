use proptest::prelude::*;

use suptail::bounds::{bennett_bound, classify_regime, threshold_u, BoundParams, DenseClass, Regime};
use suptail::empirical::{modulus_statistic, sup_direct, sup_via_increments};
use suptail::montecarlo::{exact_tail_small, wilson_interval};
use suptail::poisson::{analytic_lower_bound, cell_counts_of, check_inequality_24};
use suptail::{GridClassSpec, SamplePath};

fn unit_points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..max)
}

proptest! {
    #[test]
    fn increments_match_direct_summation(points in unit_points(60), s2 in 0.01f64..1.0) {
        let path = SamplePath::from_points(points).unwrap();
        let spec = GridClassSpec::new(s2, true).unwrap();
        let direct = sup_direct(&path, &spec).unwrap();
        let incr = sup_via_increments(&path, s2).unwrap().value;
        prop_assert!((direct - incr).abs() <= 1e-12);
    }

    #[test]
    fn increments_ignore_input_order(mut points in unit_points(80), s2 in 1e-4f64..1.0) {
        let a = sup_via_increments(&SamplePath::from_points(points.clone()).unwrap(), s2).unwrap();
        points.reverse();
        let b = sup_via_increments(&SamplePath::from_points(points).unwrap(), s2).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counting_part_of_g_is_monotone(points in unit_points(40), a in 1e-9f64..1.0, b in 1e-9f64..1.0) {
        let path = SamplePath::from_points(points).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let root_n = (path.n() as f64).sqrt();
        let h = |x: f64| path.normalized_process(x).unwrap() + root_n * x;
        prop_assert!(h(lo) <= h(hi) + 1e-12 * root_n);
    }

    #[test]
    fn modulus_grows_with_delta(points in unit_points(50), a in 1e-6f64..=1.0, b in 1e-6f64..=1.0) {
        let path = SamplePath::from_points(points).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(modulus_statistic(&path, lo).unwrap() <= modulus_statistic(&path, hi).unwrap() + 1e-12);
    }

    #[test]
    fn cell_counts_partition_the_sample(points in prop::collection::vec(0.0f64..=1.0, 0..200), s2 in 1e-3f64..=1.0) {
        let counts = cell_counts_of(&points, s2).unwrap();
        prop_assert_eq!(counts.counts.iter().sum::<u64>() + counts.leftover, points.len() as u64);
    }

    #[test]
    fn bennett_is_a_nonincreasing_probability(n in 1u64..100_000, s2 in 1e-6f64..=1.0, v in 0.0f64..50.0, dv in 0.0f64..5.0) {
        let b0 = bennett_bound(n, s2, v).unwrap();
        let b1 = bennett_bound(n, s2, v + dv).unwrap();
        prop_assert!((0.0..=1.0).contains(&b0));
        prop_assert!(b1 <= b0);
    }

    #[test]
    fn threshold_exceeds_twice_the_mean_drift(log_n in 0.7f64..20.0, log_s2 in -600.0f64..0.0) {
        let n = log_n.exp().round() as u64;
        let s2 = log_s2.exp();
        prop_assume!(n >= 2 && s2 > 0.0);
        prop_assume!(classify_regime(n, s2).unwrap() != Regime::A);
        let u = threshold_u(n, s2, &DenseClass::default(), &BoundParams::default()).unwrap();
        prop_assert!(u >= 2.0 * (n as f64).sqrt() * s2);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(reps in 1u64..100_000, frac in 0.0f64..=1.0, conf in 0.5f64..0.9999) {
        let hits = (frac * reps as f64).floor() as u64;
        let (lo, hi) = wilson_interval(hits, reps, conf).unwrap();
        let p = hits as f64 / reps as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn exact_tail_is_a_survival_function(n in 2u64..7, s2 in 0.2f64..1.0, v in 0.0f64..3.0, dv in 0.0f64..1.0) {
        let a = exact_tail_small(n, s2, v).unwrap();
        let b = exact_tail_small(n, s2, v + dv).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn sufficient_condition_implies_the_bound(log_n in 4.0f64..25.0, log_f in -20.0f64..0.0, delta in 1e-9f64..0.99) {
        let n = log_n.exp();
        let s2 = log_f.exp() * n.ln() / (7.0 * n);
        let check = check_inequality_24(n, s2, delta).unwrap();
        if check.holds {
            prop_assert!(analytic_lower_bound(n, s2).unwrap().probability >= 1.0 - delta);
        }
    }
}
