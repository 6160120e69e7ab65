use migbot_core::analytics::{
    critical_value_05, descriptive, student_t_independent, student_t_raw, GroupStats,
};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn exact_critical(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64).unwrap().inverse_cdf(0.975)
}

#[test]
fn critical_values_agree_with_the_distribution() {
    for df in 1..=30 {
        let diff = (critical_value_05(df) - exact_critical(df)).abs();
        assert!(diff < 1e-3, "df={df} diff={diff}");
    }
    for df in 31..=400 {
        let diff = (critical_value_05(df) - exact_critical(df)).abs();
        assert!(diff < 1e-4, "df={df} diff={diff}");
    }
    assert!((critical_value_05(51) - 2.008).abs() < 5e-4);
}

#[test]
fn reported_group_comparison() {
    let a = GroupStats { n: 30, mean: 71.08, sd: 8.14 };
    let b = GroupStats { n: 23, mean: 68.26, sd: 12.14 };
    let r = student_t_independent(&a, &b).unwrap();
    // pooled variance by hand: (29 * 8.14^2 + 22 * 12.14^2) / 51
    let sp2: f64 = (29.0 * 66.2596 + 22.0 * 147.3796) / 51.0;
    let t = (71.08 - 68.26) / (sp2 * (1.0 / 30.0 + 1.0 / 23.0)).sqrt();
    assert!((r.t - t).abs() < 1e-9);
    assert!((r.t - 1.012).abs() < 0.01);
    assert_eq!(r.df, 51);
    assert!(!r.significant_at_05);
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..150.0, 2..40)
}

proptest! {
    #[test]
    fn antisymmetric(a in sample(), b in sample()) {
        let ab = student_t_raw(&a, &b).unwrap();
        let ba = student_t_raw(&b, &a).unwrap();
        prop_assert!((ab.t + ba.t).abs() < 1e-9 * (1.0 + ab.t.abs()));
        prop_assert_eq!(ab.df, ba.df);
        prop_assert_eq!(ab.df, a.len() + b.len() - 2);
    }

    #[test]
    fn invariant_under_common_shift(a in sample(), b in sample(), shift in -100.0f64..100.0) {
        let base = student_t_raw(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|v| v + shift).collect();
        let b2: Vec<f64> = b.iter().map(|v| v + shift).collect();
        let moved = student_t_raw(&a2, &b2).unwrap();
        prop_assert!((base.t - moved.t).abs() < 1e-6 * (1.0 + base.t.abs()));
    }

    #[test]
    fn raw_matches_summary(a in sample(), b in sample()) {
        let raw = student_t_raw(&a, &b).unwrap();
        let sa = descriptive(&a).unwrap();
        let sb = descriptive(&b).unwrap();
        prop_assert_eq!(raw, student_t_independent(&sa, &sb).unwrap());
    }

    #[test]
    fn descriptive_matches_two_pass_oracle(v in sample()) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        let s = descriptive(&v).unwrap();
        prop_assert!((s.mean - m).abs() < 1e-9);
        prop_assert!((s.sd - var.sqrt()).abs() < 1e-9);
        prop_assert!(s.sd >= 0.0);
    }
}
