//! Hand-judged verdicts for gpt-oss-120b over five runs of every prompt,
//! as rows of `prompt_id,run_index,ablation,verdict`.

use crate::attempt::{Annotations, Judged};

/// The verdicts, in `runs.csv` format.
pub const BASELINE_RUNS_CSV: &str = include_str!("../data/baseline_runs.csv");

pub fn baseline_annotations() -> Annotations {
    Annotations::from_csv(BASELINE_RUNS_CSV).expect("bundled transcription parses")
}

pub fn baseline_rows() -> Vec<Judged> {
    baseline_annotations().rows()
}
