//! Benchmark harness for graph-based code generation.
//!
//! Each attempt sends a prompt to a chat-completion endpoint (or replays a
//! recorded answer), runs the answer through the `graphblocks` pipeline,
//! and ends with a verdict: correct, incorrect logic, or error. Verdicts
//! are summarized per ablation and compared with Welch's t-test.

pub mod ablation;
pub mod attempt;
pub mod baseline;
pub mod bench;
pub mod client;
pub mod prompts;
pub mod report;
pub mod stats;
pub mod store;
pub mod system_prompt;

pub use ablation::Ablation;
pub use attempt::{classify, run_attempt, Annotations, Judged, Judgment, RunRecord, Verdict};
pub use bench::{run_bench, BenchConfig, BenchMode, BenchOutcome};
pub use client::{query_model, ChatClient, EndpointConfig, QueryError};
pub use prompts::{prompt, prompts, PromptCase};
pub use report::{compare, render_report, Comparison, Report};
pub use stats::{summarize, welch_t_test, AblationReport, TTestResult};
pub use system_prompt::build_system_prompt;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
}
