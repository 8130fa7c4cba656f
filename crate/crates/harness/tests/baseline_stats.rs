//! Statistics over the recorded baseline verdict grids.

use graphblocks_harness::baseline::baseline_rows;
use graphblocks_harness::report::default_comparisons;
use graphblocks_harness::{compare, render_report, summarize, Ablation, AblationReport};

fn reports() -> Vec<AblationReport> {
    summarize(&baseline_rows()).unwrap()
}

fn get(reports: &[AblationReport], a: Ablation) -> &AblationReport {
    reports.iter().find(|r| r.ablation == a).unwrap()
}

#[test]
fn per_run_counts() {
    let r = reports();
    let counts = |a| get(&r, a).runs.iter().map(|c| c.correct).collect::<Vec<_>>();
    assert_eq!(counts(Ablation::Proposed), [16, 14, 15, 16, 14]);
    assert_eq!(counts(Ablation::NoTypes), [12, 14, 12, 15, 12]);
    assert_eq!(counts(Ablation::ExtraDescription), [14, 16, 14, 17, 13]);
    assert_eq!(counts(Ablation::Alternative), [10, 9, 10, 11, 9]);
    assert!(r.iter().flat_map(|a| &a.runs).all(|c| c.total == 20));
}

#[test]
fn means_and_spreads() {
    let r = reports();
    let check = |a, mean: f64, std: f64| {
        let rep = get(&r, a);
        assert!((rep.mean - mean).abs() < 1e-9, "{a} mean {}", rep.mean);
        assert!((rep.std.unwrap() - std).abs() < 1e-3, "{a} std {:?}", rep.std);
    };
    check(Ablation::Proposed, 0.75, 0.050);
    check(Ablation::NoTypes, 0.65, 0.071);
    check(Ablation::ExtraDescription, 0.74, 0.082);
    check(Ablation::Alternative, 0.49, 0.042);
}

#[test]
fn welch_p_values() {
    let r = reports();
    let p = |b| compare(&r, Ablation::Proposed, b).unwrap().result.p_value_two_sided;
    assert!((p(Ablation::NoTypes) - 0.036).abs() <= 0.005);
    assert!((p(Ablation::ExtraDescription) - 0.82).abs() <= 0.02);
    assert!((p(Ablation::Alternative) - 2.4e-5).abs() <= 1e-5);
    assert!(compare(&r, Ablation::Proposed, Ablation::NoTypes).unwrap().result.significant());
    assert!(!compare(&r, Ablation::Proposed, Ablation::ExtraDescription).unwrap().result.significant());
}

#[test]
fn rendered_table_lists_counts() {
    let r = reports();
    let text = render_report(&r, &default_comparisons(&r)).text;
    let row = text.lines().find(|l| l.starts_with("Proposed ")).unwrap();
    assert_eq!(row.split_whitespace().skip(1).collect::<Vec<_>>(), ["16/20", "14/20", "15/20", "16/20", "14/20"]);
    assert!(text.contains("Welch's t-test"));
}

#[test]
fn committed_report_matches() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/baseline_report");
    let r = reports();
    let report = render_report(&r, &default_comparisons(&r));
    let read = |name: &str| std::fs::read_to_string(format!("{dir}/{name}")).unwrap();
    assert_eq!(read("report.txt"), report.text);
    assert_eq!(read("counts.csv"), report.counts_csv);
    assert_eq!(read("summary.csv"), report.summary_csv);
    assert_eq!(read("ttests.csv"), report.ttests_csv);
}
