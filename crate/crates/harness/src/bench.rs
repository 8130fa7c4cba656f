//! Runs every (ablation, run, prompt) attempt and aggregates the results.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use graphblocks::runtime::RunConfig;
use thiserror::Error;

use crate::ablation::Ablation;
use crate::attempt::{classify, run_attempt, Annotations, ClassifyError, Judged, Judgment, Live, ModelSource, Replay, RunRecord, SourceError};
use crate::client::{ChatClient, EndpointConfig, QueryError};
use crate::prompts::{prompts, PromptCase};
use crate::report::{default_comparisons, render_report, Comparison, Report};
use crate::stats::{summarize, AblationReport, SummaryError};
use crate::store::{FixtureStore, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    /// Query the endpoint and record every answer.
    Live,
    /// Serve recorded answers only.
    Replay,
}

impl std::str::FromStr for BenchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BenchMode::Live),
            "replay" => Ok(BenchMode::Replay),
            other => Err(format!("unknown mode `{other}` (expected live or replay)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub ablations: Vec<Ablation>,
    /// Runs per ablation, numbered from 1.
    pub runs: u32,
    /// Attempts in flight at once.
    pub parallel: usize,
    pub mode: BenchMode,
    pub fixtures: PathBuf,
    pub endpoint: EndpointConfig,
    pub run_config: RunConfig,
    /// Manual verdicts that override the checkers.
    pub annotations: Option<Annotations>,
    /// Prompt ids to run; all twenty when empty.
    pub prompt_ids: Vec<u8>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ablations: vec![Ablation::Proposed],
            runs: 5,
            parallel: 1,
            mode: BenchMode::Replay,
            fixtures: PathBuf::from("fixtures/replay"),
            endpoint: EndpointConfig::default(),
            run_config: RunConfig::default(),
            annotations: None,
            prompt_ids: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Client(#[from] QueryError),
    #[error("{ablation} run {run_index} prompt {prompt_id}: {source}")]
    Source {
        ablation: Ablation,
        run_index: u32,
        prompt_id: u8,
        #[source]
        source: SourceError,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
}

impl BenchError {
    /// True for failures talking to the endpoint, including bad keys.
    pub fn is_network(&self) -> bool {
        matches!(
            self,
            BenchError::Client(_)
                | BenchError::Source {
                    source: SourceError::Query(_),
                    ..
                }
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    /// Sorted by ablation, run and prompt.
    pub records: Vec<RunRecord>,
    pub rows: Vec<Judged>,
    pub reports: Vec<AblationReport>,
    pub comparisons: Vec<Comparison>,
    pub report: Report,
}

type Job<'a> = (Ablation, u32, &'a PromptCase);

pub fn run_bench(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    if config.runs < 1 || config.parallel < 1 || config.ablations.is_empty() {
        return Err(BenchError::InvalidConfig(
            "runs, parallel and the ablation list must all be non-empty".into(),
        ));
    }
    config.endpoint.check()?;
    let cases: Vec<&PromptCase> = prompts()
        .iter()
        .filter(|p| config.prompt_ids.is_empty() || config.prompt_ids.contains(&p.id))
        .collect();
    let mut jobs: Vec<Job> = Vec::new();
    for &a in &config.ablations {
        for r in 1..=config.runs {
            jobs.extend(cases.iter().map(|&c| (a, r, c)));
        }
    }

    let store = FixtureStore::new(&config.fixtures);
    let client;
    let source: Box<dyn ModelSource> = match config.mode {
        BenchMode::Replay => Box::new(Replay { store: &store }),
        BenchMode::Live => {
            client = ChatClient::from_env(config.endpoint.clone())?;
            Box::new(Live {
                client: &client,
                store: &store,
            })
        }
    };

    let mut records = execute(&jobs, source.as_ref(), config)?;
    if config.mode == BenchMode::Live {
        for &a in &config.ablations {
            for r in 1..=config.runs {
                store.normalize(a, r)?;
            }
        }
    }

    let judgment = Judgment {
        checkers: true,
        annotations: config.annotations.as_ref(),
    };
    for record in &mut records {
        record.verdict = classify(record, &judgment)?;
    }
    let rows: Vec<Judged> = records.iter().map(RunRecord::judged).collect();
    let reports = summarize(&rows)?;
    let comparisons = default_comparisons(&reports);
    let report = render_report(&reports, &comparisons);
    Ok(BenchOutcome {
        records,
        rows,
        reports,
        comparisons,
        report,
    })
}

/// Worker pool over `jobs`. Completed records flow back over a channel to
/// this thread, which is the only place they are gathered.
fn execute(jobs: &[Job], source: &dyn ModelSource, config: &BenchConfig) -> Result<Vec<RunRecord>, BenchError> {
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<RunRecord, BenchError>>();
    let mut records = Vec::with_capacity(jobs.len());
    let mut first_error = None;
    std::thread::scope(|scope| {
        for _ in 0..config.parallel.min(jobs.len()) {
            let tx = tx.clone();
            let (next, failed) = (&next, &failed);
            scope.spawn(move || loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let Some(&(ablation, run_index, case)) = jobs.get(next.fetch_add(1, Ordering::Relaxed)) else {
                    break;
                };
                let out = run_attempt(case, ablation, run_index, source, &config.endpoint, &config.run_config)
                    .map_err(|source| BenchError::Source {
                        ablation,
                        run_index,
                        prompt_id: case.id,
                        source,
                    });
                if out.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                if tx.send(out).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for out in rx {
            match out {
                Ok(record) => {
                    log::debug!("{} run {} prompt {}: done", record.ablation, record.run_index, record.prompt_id);
                    records.push(record);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    records.sort_by_key(RunRecord::key);
    Ok(records)
}
