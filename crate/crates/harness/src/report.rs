//! Text tables and CSV files for a set of judged attempts.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ablation::Ablation;
use crate::attempt::{Judged, RunRecord};
use crate::stats::{welch_t_test, AblationReport, TTestError, TTestResult};

pub const RUNS_CSV: &str = "runs.csv";
pub const COUNTS_CSV: &str = "counts.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const TTESTS_CSV: &str = "ttests.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const RECORDS_JSONL: &str = "records.jsonl";

const TITLE: &str = "ScratchTest report";

/// Welch's test between two ablations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub a: Ablation,
    pub b: Ablation,
    pub result: TTestResult,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompareError {
    #[error("no records for {0}")]
    MissingAblation(Ablation),
    #[error("{a} vs {b}: {source}")]
    Test {
        a: Ablation,
        b: Ablation,
        #[source]
        source: TTestError,
    },
}

/// Tests `a` against `b` using per-run accuracies.
pub fn compare(reports: &[AblationReport], a: Ablation, b: Ablation) -> Result<Comparison, CompareError> {
    let find = |x: Ablation| {
        reports
            .iter()
            .find(|r| r.ablation == x)
            .ok_or(CompareError::MissingAblation(x))
    };
    let (ra, rb) = (find(a)?, find(b)?);
    let result = welch_t_test(&ra.accuracies(), &rb.accuracies()).map_err(|source| CompareError::Test { a, b, source })?;
    Ok(Comparison { a, b, result })
}

/// Proposed against every other ablation present. Pairs the test cannot be
/// computed for are left out.
pub fn default_comparisons(reports: &[AblationReport]) -> Vec<Comparison> {
    if !reports.iter().any(|r| r.ablation == Ablation::Proposed) {
        return Vec::new();
    }
    reports
        .iter()
        .filter(|r| r.ablation != Ablation::Proposed)
        .filter_map(|r| match compare(reports, Ablation::Proposed, r.ablation) {
            Ok(c) => Some(c),
            Err(e) => {
                log::info!("skipping t-test: {e}");
                None
            }
        })
        .collect()
}

/// Rendered report: a text page plus CSV tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub counts_csv: String,
    pub summary_csv: String,
    pub ttests_csv: String,
}

#[derive(Serialize)]
struct CountRow {
    ablation: Ablation,
    run_index: u32,
    correct: usize,
    total: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct SummaryRow {
    ablation: Ablation,
    runs: usize,
    mean: f64,
    std: Option<f64>,
}

#[derive(Serialize)]
struct TTestRow {
    a: Ablation,
    b: Ablation,
    t_statistic: f64,
    welch_df: f64,
    p_value_two_sided: f64,
    alpha: f64,
    significant: bool,
}

fn to_csv<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.serialize(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

/// The two table groups: reference-node variants, then output-graph variants.
fn groups(reports: &[AblationReport]) -> Vec<(&'static str, Vec<&AblationReport>)> {
    let has = |a: Ablation| reports.iter().any(|r| r.ablation == a);
    let pick = |set: &[Ablation]| -> Vec<&AblationReport> {
        reports.iter().filter(|r| set.contains(&r.ablation)).collect()
    };
    let mut out = Vec::new();
    let reference_variant = has(Ablation::NoTypes) || has(Ablation::ExtraDescription);
    if reference_variant || (has(Ablation::Proposed) && !has(Ablation::Alternative)) {
        out.push((
            "Reference node representation",
            pick(&[Ablation::NoTypes, Ablation::ExtraDescription, Ablation::Proposed]),
        ));
    }
    if has(Ablation::Alternative) {
        out.push(("Output graph representation", pick(&[Ablation::Alternative, Ablation::Proposed])));
    }
    out
}

fn format_p(p: f64) -> String {
    if p != 0.0 && p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

pub fn render_report(reports: &[AblationReport], comparisons: &[Comparison]) -> Report {
    let mut text = format!("{TITLE}\n");
    for (name, members) in groups(reports) {
        let runs: BTreeSet<u32> = members.iter().flat_map(|r| r.runs.iter().map(|c| c.run_index)).collect();
        let _ = write!(text, "\n{name}: correct attempts per run\n{:<20}", "Name");
        for r in &runs {
            let _ = write!(text, "{:>8}", format!("Run {r}"));
        }
        text.push('\n');
        for report in &members {
            let _ = write!(text, "{:<20}", report.ablation.label());
            for r in &runs {
                let cell = report
                    .runs
                    .iter()
                    .find(|c| c.run_index == *r)
                    .map_or("-".to_string(), |c| format!("{}/{}", c.correct, c.total));
                let _ = write!(text, "{cell:>8}");
            }
            text.push('\n');
        }
        let _ = write!(text, "\n{name}: summary\n{:<20}{:>8}{:>8}\n", "Name", "Mean", "Std");
        for report in &members {
            let std = report.std.map_or("-".to_string(), |s| format!("{s:.3}"));
            let _ = writeln!(text, "{:<20}{:>8.3}{std:>8}", report.ablation.label(), report.mean);
        }
    }
    if !comparisons.is_empty() {
        let _ = write!(
            text,
            "\nWelch's t-test, two-sided\n{:<36}{:>9}{:>8}{:>11}{:>7}  significant\n",
            "Comparison", "t", "df", "p", "alpha"
        );
        for c in comparisons {
            let r = &c.result;
            let _ = writeln!(
                text,
                "{:<36}{:>9.4}{:>8.2}{:>11}{:>7}  {}",
                format!("{} vs {}", c.a, c.b),
                r.t_statistic,
                r.welch_df,
                format_p(r.p_value_two_sided),
                r.alpha,
                if r.significant() { "yes" } else { "no" }
            );
        }
    }

    let counts_csv = to_csv(
        &["ablation", "run_index", "correct", "total", "accuracy"],
        reports.iter().flat_map(|r| {
            r.runs.iter().map(|c| CountRow {
                ablation: r.ablation,
                run_index: c.run_index,
                correct: c.correct,
                total: c.total,
                accuracy: c.accuracy(),
            })
        }),
    );
    let summary_csv = to_csv(
        &["ablation", "runs", "mean", "std"],
        reports.iter().map(|r| SummaryRow {
            ablation: r.ablation,
            runs: r.runs.len(),
            mean: r.mean,
            std: r.std,
        }),
    );
    let ttests_csv = to_csv(
        &["a", "b", "t_statistic", "welch_df", "p_value_two_sided", "alpha", "significant"],
        comparisons.iter().map(|c| TTestRow {
            a: c.a,
            b: c.b,
            t_statistic: c.result.t_statistic,
            welch_df: c.result.welch_df,
            p_value_two_sided: c.result.p_value_two_sided,
            alpha: c.result.alpha,
            significant: c.result.significant(),
        }),
    );
    Report {
        text,
        counts_csv,
        summary_csv,
        ttests_csv,
    }
}

/// `runs.csv`: one row per attempt, sorted.
pub fn runs_csv(rows: &[Judged]) -> String {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| (r.ablation, r.run_index, r.prompt_id));
    to_csv(&["prompt_id", "run_index", "ablation", "verdict"], rows)
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Writes every report file into `dir`. Records, when given, go to
/// `records.jsonl` in sorted order.
pub fn write_report_dir(
    dir: &Path,
    rows: &[Judged],
    report: &Report,
    records: Option<&[RunRecord]>,
) -> Result<(), ReportError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = vec![
        (REPORT_TXT, report.text.clone()),
        (RUNS_CSV, runs_csv(rows)),
        (COUNTS_CSV, report.counts_csv.clone()),
        (SUMMARY_CSV, report.summary_csv.clone()),
        (TTESTS_CSV, report.ttests_csv.clone()),
    ];
    if let Some(records) = records {
        let mut sorted: Vec<&RunRecord> = records.iter().collect();
        sorted.sort_by_key(|r| r.key());
        let lines: String = sorted.iter().map(|r| r.to_json().to_string() + "\n").collect();
        files.push((RECORDS_JSONL, lines));
    }
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io(&path))?;
    }
    Ok(())
}

/// Reads `runs.csv` back from a report directory.
pub fn read_runs(dir: &Path) -> Result<Vec<Judged>, ReportError> {
    let path = dir.join(RUNS_CSV);
    let mut reader = csv::Reader::from_path(&path).map_err(|source| ReportError::Csv {
        path: path.clone(),
        source,
    })?;
    reader
        .deserialize()
        .collect::<Result<Vec<Judged>, _>>()
        .map_err(|source| ReportError::Csv { path, source })
}
