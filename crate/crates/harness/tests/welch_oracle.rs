//! Welch p-values against numerical integration of the t density and
//! against an independent statistics library.

use statrs::function::gamma::ln_gamma;
use graphblocks_harness::welch_t_test;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn t_density(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Composite Simpson's rule for 2 * integral over [0, |t|], then 1 minus it.
fn simpson_p(t: f64, df: f64) -> f64 {
    let n = 200_000;
    let (a, b) = (0.0, t.abs());
    let h = (b - a) / n as f64;
    let mut sum = t_density(a, df) + t_density(b, df);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * t_density(a + i as f64 * h, df);
    }
    1.0 - 2.0 * sum * h / 3.0
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..9)
}

#[test]
fn agrees_with_integration_and_statrs() {
    let mut runner = TestRunner::new(Config {
        cases: 20,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(sample(), sample()), |(a, b)| {
            let r = welch_t_test(&a, &b).unwrap();
            let by_simpson = simpson_p(r.t_statistic, r.welch_df);
            let dist = StudentsT::new(0.0, 1.0, r.welch_df).unwrap();
            let by_statrs = 2.0 * (1.0 - dist.cdf(r.t_statistic.abs()));
            prop_assert!((r.p_value_two_sided - by_simpson).abs() < 1e-6, "{} vs {}", r.p_value_two_sided, by_simpson);
            prop_assert!((r.p_value_two_sided - by_statrs).abs() < 1e-6, "{} vs {}", r.p_value_two_sided, by_statrs);
            Ok(())
        })
        .unwrap();
}

#[test]
fn textbook_example() {
    // Hand computation: means 20 and 22, variances 2.5 and 2.5, n = 5 each,
    // so t = -2 / sqrt(1) = -2 and df = 8.
    let a = [18.0, 19.0, 20.0, 21.0, 22.0];
    let b = [20.0, 21.0, 22.0, 23.0, 24.0];
    let r = welch_t_test(&a, &b).unwrap();
    assert!((r.t_statistic + 2.0).abs() < 1e-12);
    assert!((r.welch_df - 8.0).abs() < 1e-12);
    assert!((r.p_value_two_sided - 0.080_516).abs() < 1e-5);
}
