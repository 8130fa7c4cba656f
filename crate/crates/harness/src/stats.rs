//! Per-ablation accuracy summaries and Welch's unequal-variance t-test.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ablation::Ablation;
use crate::attempt::{Judged, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunCount {
    pub run_index: u32,
    pub correct: usize,
    pub total: usize,
}

impl RunCount {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub ablation: Ablation,
    /// Ordered by run index.
    pub runs: Vec<RunCount>,
    /// Correct attempts over all attempts.
    pub mean: f64,
    /// Sample standard deviation of per-run accuracy; needs two runs.
    pub std: Option<f64>,
}

impl AblationReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.runs.iter().map(RunCount::accuracy).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SummaryError {
    #[error("prompt {prompt_id}, run {run_index}, {ablation} has no verdict")]
    Unjudged { prompt_id: u8, run_index: u32, ablation: Ablation },
}

/// Groups judged attempts by ablation and run. Any unjudged row is an error.
pub fn summarize(rows: &[Judged]) -> Result<Vec<AblationReport>, SummaryError> {
    let mut grouped: BTreeMap<Ablation, BTreeMap<u32, RunCount>> = BTreeMap::new();
    for row in rows {
        if row.verdict == Verdict::Unjudged {
            return Err(SummaryError::Unjudged {
                prompt_id: row.prompt_id,
                run_index: row.run_index,
                ablation: row.ablation,
            });
        }
        let count = grouped
            .entry(row.ablation)
            .or_default()
            .entry(row.run_index)
            .or_insert(RunCount {
                run_index: row.run_index,
                correct: 0,
                total: 0,
            });
        count.total += 1;
        count.correct += usize::from(row.verdict == Verdict::Correct);
    }
    Ok(grouped
        .into_iter()
        .map(|(ablation, runs)| {
            let runs: Vec<RunCount> = runs.into_values().collect();
            let correct: usize = runs.iter().map(|r| r.correct).sum();
            let total: usize = runs.iter().map(|r| r.total).sum();
            let acc: Vec<f64> = runs.iter().map(RunCount::accuracy).collect();
            AblationReport {
                ablation,
                mean: correct as f64 / total as f64,
                std: (acc.len() >= 2).then(|| sample_variance(&acc).sqrt()),
                runs,
            }
        })
        .collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n - 1) variance.
fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub welch_df: f64,
    pub p_value_two_sided: f64,
    pub alpha: f64,
}

impl TTestResult {
    pub fn significant(&self) -> bool {
        self.p_value_two_sided < self.alpha
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TTestError {
    #[error("each sample needs at least two points")]
    TooFewPoints,
    #[error("both samples have zero variance")]
    DegenerateSample,
}

/// Two-sided Welch's t-test at the default significance level.
///
/// The p-value is `I_x(df/2, 1/2)` with `x = df / (df + t^2)`, the
/// regularized incomplete beta function evaluated by [`inc_beta`].
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, TTestError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(TTestError::TooFewPoints);
    }
    let (va, vb) = (sample_variance(a), sample_variance(b));
    if va == 0.0 && vb == 0.0 {
        return Err(TTestError::DegenerateSample);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let t = (mean(a) - mean(b)) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TTestResult {
        t_statistic: t,
        welch_df: df,
        p_value_two_sided: student_t_two_sided(t, df),
        alpha: DEFAULT_ALPHA,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    inc_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Natural log of the gamma function (Lanczos, g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection keeps the series in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// Uses the continued fraction for `I_x(a, b)` (modified Lentz), switching
/// to `1 - I_{1-x}(b, a)` past the mean where that converges faster.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(ablation: Ablation, grid: &[&str]) -> Vec<Judged> {
        let mut out = Vec::new();
        for (r, line) in grid.iter().enumerate() {
            for (p, c) in line.chars().enumerate() {
                out.push(Judged {
                    prompt_id: p as u8 + 1,
                    run_index: r as u32 + 1,
                    ablation,
                    verdict: match c {
                        'C' => Verdict::Correct,
                        'X' => Verdict::IncorrectLogic,
                        _ => Verdict::Error,
                    },
                });
            }
        }
        out
    }

    #[test]
    fn all_correct_has_zero_spread() {
        let r = summarize(&rows(Ablation::Proposed, &["CCCC"; 3])).unwrap();
        assert_eq!(r[0].mean, 1.0);
        assert_eq!(r[0].std, Some(0.0));
    }

    #[test]
    fn single_run_has_no_std() {
        let r = summarize(&rows(Ablation::NoTypes, &["CXE"])).unwrap();
        assert_eq!(r[0].runs, [RunCount { run_index: 1, correct: 1, total: 3 }]);
        assert_eq!(r[0].std, None);
    }

    #[test]
    fn unjudged_rows_are_rejected() {
        let mut r = rows(Ablation::Proposed, &["CC"]);
        r[1].verdict = Verdict::Unjudged;
        assert!(matches!(summarize(&r), Err(SummaryError::Unjudged { prompt_id: 2, .. })));
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn inc_beta_closed_forms() {
        // I_x(1, 1) = x and I_x(a, 1) = x^a.
        for x in [0.1, 0.5, 0.93] {
            assert!((inc_beta(1.0, 1.0, x) - x).abs() < 1e-13);
            assert!((inc_beta(3.0, 1.0, x) - x.powi(3)).abs() < 1e-13);
        }
        assert_eq!(inc_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(inc_beta(2.0, 3.0, 1.0), 1.0);
    }

    #[test]
    fn t_distribution_with_one_degree_is_cauchy() {
        // P(|T| >= t) = 1 - 2 atan(t) / pi.
        for t in [0.3, 1.0, 4.5] {
            let want = 1.0 - 2.0 * f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_two_sided(t, 1.0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_short_samples() {
        assert_eq!(welch_t_test(&[0.5, 0.5], &[0.7, 0.7]), Err(TTestError::DegenerateSample));
        assert_eq!(welch_t_test(&[0.5], &[0.7, 0.6]), Err(TTestError::TooFewPoints));
        let r = welch_t_test(&[0.5, 0.5], &[0.7, 0.6]).unwrap();
        assert!(r.welch_df > 0.0 && (0.0..=1.0).contains(&r.p_value_two_sided));
    }
}
