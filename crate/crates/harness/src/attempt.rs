//! One benchmark attempt: model output through the whole pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use graphblocks::compiler::{compile, CompileError};
use graphblocks::diagnostic::{has_errors, Diagnostic};
use graphblocks::graph::{alt_to_proposed, extract_json, parse_alt_graph, parse_graph};
use graphblocks::pipeline::GraphFormat;
use graphblocks::runtime::{run, RunConfig, RunResult, Termination};
use graphblocks::{validate, Catalog};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ablation::Ablation;
use crate::client::{request_hash, strip_reasoning, ChatClient, EndpointConfig, QueryError};
use crate::prompts::PromptCase;
use crate::store::{FixtureEntry, FixtureStore, StoreError};
use crate::system_prompt::{default_system_prompt, user_message};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    IncorrectLogic,
    Error,
    Unjudged,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::IncorrectLogic => "incorrect_logic",
            Verdict::Error => "error",
            Verdict::Unjudged => "unjudged",
        }
    }

    /// One-letter grid symbol: C, X or E.
    pub fn symbol(self) -> char {
        match self {
            Verdict::Correct => 'C',
            Verdict::IncorrectLogic => 'X',
            Verdict::Error => 'E',
            Verdict::Unjudged => '?',
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown verdict `{0}`")]
pub struct UnknownVerdict(pub String);

impl FromStr for Verdict {
    type Err = UnknownVerdict;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Verdict::Correct, Verdict::IncorrectLogic, Verdict::Error, Verdict::Unjudged]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownVerdict(s.to_string()))
    }
}

/// Pipeline step where an attempt failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extract,
    Parse,
    Convert,
    Validate,
    Compile,
    Run,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Parse => "parse",
            Stage::Convert => "convert",
            Stage::Validate => "validate",
            Stage::Compile => "compile",
            Stage::Run => "run",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub stage: Stage,
    /// A diagnostic code or runtime error code.
    pub code: String,
    pub message: String,
}

/// One attempt's identity and verdict; also a row of `runs.csv` and of an
/// annotation file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Judged {
    pub prompt_id: u8,
    pub run_index: u32,
    pub ablation: Ablation,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub prompt_id: u8,
    /// 1 through the number of runs.
    pub run_index: u32,
    pub ablation: Ablation,
    pub raw_output: String,
    pub diagnostics: Vec<Diagnostic>,
    pub failure: Option<Failure>,
    pub run_result: Option<RunResult>,
    pub verdict: Verdict,
}

impl RunRecord {
    pub fn judged(&self) -> Judged {
        Judged {
            prompt_id: self.prompt_id,
            run_index: self.run_index,
            ablation: self.ablation,
            verdict: self.verdict,
        }
    }

    /// Sort key used wherever records are listed.
    pub fn key(&self) -> (Ablation, u32, u8) {
        (self.ablation, self.run_index, self.prompt_id)
    }

    pub fn to_json(&self) -> Value {
        let result = self.run_result.as_ref().map(|r| {
            json!({
                "behavior_log": r.behavior_log,
                "final_state": r.final_state.to_json(),
                "termination": r.termination.to_string(),
                "ticks": r.ticks,
            })
        });
        json!({
            "prompt_id": self.prompt_id,
            "run_index": self.run_index,
            "ablation": self.ablation.as_str(),
            "verdict": self.verdict.as_str(),
            "failure": self.failure.as_ref().map(|f| json!({
                "stage": f.stage.as_str(),
                "code": f.code,
                "message": f.message,
            })),
            "diagnostics": self.diagnostics,
            "run_result": result,
            "raw_output": self.raw_output,
        })
    }
}

/// Where raw model outputs come from.
pub trait ModelSource: Sync {
    fn complete(&self, ablation: Ablation, run_index: u32, prompt_id: u8, request: &Value) -> Result<String, SourceError>;
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Serves recorded outputs. A request whose hash differs from the recorded
/// one is still served, with a warning, since prompts may be revised.
pub struct Replay<'a> {
    pub store: &'a FixtureStore,
}

impl ModelSource for Replay<'_> {
    fn complete(&self, ablation: Ablation, run_index: u32, prompt_id: u8, request: &Value) -> Result<String, SourceError> {
        let entry = self.store.lookup(ablation, run_index, prompt_id)?;
        if entry.request_hash != request_hash(request) {
            log::warn!("{ablation} run {run_index} prompt {prompt_id}: recorded request hash differs");
        }
        Ok(entry.raw_output)
    }
}

/// Queries the endpoint and records every answer.
pub struct Live<'a> {
    pub client: &'a ChatClient,
    pub store: &'a FixtureStore,
}

impl ModelSource for Live<'_> {
    fn complete(&self, ablation: Ablation, run_index: u32, prompt_id: u8, request: &Value) -> Result<String, SourceError> {
        let raw_output = self.client.query(request)?;
        let entry = FixtureEntry {
            prompt_id,
            request_hash: request_hash(request),
            raw_output: raw_output.clone(),
        };
        self.store.append(ablation, run_index, &entry)?;
        Ok(raw_output)
    }
}

/// Runs one model output through every stage. Stage failures are captured
/// in the record; only source failures are returned as errors.
pub fn run_attempt(
    case: &PromptCase,
    ablation: Ablation,
    run_index: u32,
    source: &dyn ModelSource,
    endpoint: &EndpointConfig,
    run_config: &RunConfig,
) -> Result<RunRecord, SourceError> {
    let request = endpoint.request_body(&default_system_prompt(ablation), &user_message(&case.text));
    let raw_output = source.complete(ablation, run_index, case.id, &request)?;
    Ok(evaluate_output(case, ablation, run_index, raw_output, run_config))
}

/// The pipeline part of [`run_attempt`], for outputs already in hand.
pub fn evaluate_output(
    case: &PromptCase,
    ablation: Ablation,
    run_index: u32,
    raw_output: String,
    run_config: &RunConfig,
) -> RunRecord {
    let mut record = RunRecord {
        prompt_id: case.id,
        run_index,
        ablation,
        raw_output,
        diagnostics: Vec::new(),
        failure: None,
        run_result: None,
        verdict: Verdict::Unjudged,
    };
    if let Err((stage, diags)) = pipeline(case, ablation, run_config, &mut record) {
        let first = diags.iter().find(|d| d.is_error()).or(diags.first());
        record.failure = Some(Failure {
            stage,
            code: first.map(|d| d.code.to_string()).unwrap_or_default(),
            message: first.map(|d| d.message.clone()).unwrap_or_default(),
        });
        record.diagnostics = diags;
        record.verdict = Verdict::Error;
    }
    record
}

type StageError = (Stage, Vec<Diagnostic>);

fn pipeline(case: &PromptCase, ablation: Ablation, config: &RunConfig, record: &mut RunRecord) -> Result<(), StageError> {
    let catalog = Catalog::builtin();
    let text = strip_reasoning(&record.raw_output);
    let json = extract_json(&text).map_err(|e| (Stage::Extract, vec![e.to_diagnostic()]))?;
    let graph = match ablation.graph_format() {
        GraphFormat::Proposed => parse_graph(&json).map_err(|e| (Stage::Parse, vec![e.to_diagnostic()]))?,
        GraphFormat::Alternative => {
            let alt = parse_alt_graph(&json).map_err(|e| (Stage::Parse, vec![e.to_diagnostic()]))?;
            alt_to_proposed(&alt, catalog).map_err(|e| (Stage::Convert, vec![e.to_diagnostic()]))?
        }
    };
    let diagnostics = validate(&graph, catalog);
    if has_errors(&diagnostics) {
        return Err((Stage::Validate, diagnostics));
    }
    record.diagnostics = diagnostics;
    let plan = compile(&graph, catalog).map_err(|e| {
        let diags = match e {
            CompileError::Invalid(d) => d,
            CompileError::InternalInconsistency(m) => {
                vec![Diagnostic::new(graphblocks::DiagnosticCode::SchemaViolation, m)]
            }
        };
        (Stage::Compile, diags)
    })?;
    let result = run(&plan, &case.schedule(), config);
    if let Termination::RuntimeError(e) = &result.termination {
        let failure = Failure {
            stage: Stage::Run,
            code: e.code().to_string(),
            message: e.to_string(),
        };
        record.run_result = Some(result);
        record.failure = Some(failure);
        record.verdict = Verdict::Error;
        return Ok(());
    }
    record.run_result = Some(result);
    Ok(())
}

/// Manual verdicts keyed by (prompt, run, ablation).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotations(pub BTreeMap<(u8, u32, Ablation), Verdict>);

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("annotation file: {0}")]
    Csv(#[from] csv::Error),
    #[error("annotation row {row}: verdict must be correct, incorrect_logic or error")]
    Unjudged { row: usize },
}

impl Annotations {
    /// Reads `prompt_id,run_index,ablation,verdict` rows.
    pub fn from_csv(text: &str) -> Result<Annotations, AnnotationError> {
        let mut map = BTreeMap::new();
        for (i, row) in csv::Reader::from_reader(text.as_bytes()).deserialize::<Judged>().enumerate() {
            let row = row?;
            if row.verdict == Verdict::Unjudged {
                return Err(AnnotationError::Unjudged { row: i + 1 });
            }
            map.insert((row.prompt_id, row.run_index, row.ablation), row.verdict);
        }
        Ok(Annotations(map))
    }

    pub fn rows(&self) -> Vec<Judged> {
        self.0
            .iter()
            .map(|(&(prompt_id, run_index, ablation), &verdict)| Judged {
                prompt_id,
                run_index,
                ablation,
                verdict,
            })
            .collect()
    }

    pub fn get(&self, prompt_id: u8, run_index: u32, ablation: Ablation) -> Option<Verdict> {
        self.0.get(&(prompt_id, run_index, ablation)).copied()
    }
}

/// What decides between correct and incorrect logic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Judgment<'a> {
    /// Use the per-prompt checkers.
    pub checkers: bool,
    /// Manual verdicts; these win over checkers.
    pub annotations: Option<&'a Annotations>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("no checker or annotation covers prompt {prompt_id}, run {run_index}, {ablation}")]
    MissingJudgment { prompt_id: u8, run_index: u32, ablation: Ablation },
    #[error("prompt {prompt_id}, run {run_index}, {ablation}: annotated as error but every stage succeeded")]
    ConflictingAnnotation { prompt_id: u8, run_index: u32, ablation: Ablation },
}

/// Decides a record's verdict. Records that failed a stage stay errors.
pub fn classify(record: &RunRecord, judgment: &Judgment<'_>) -> Result<Verdict, ClassifyError> {
    if record.verdict == Verdict::Error {
        return Ok(Verdict::Error);
    }
    let (prompt_id, run_index, ablation) = (record.prompt_id, record.run_index, record.ablation);
    if let Some(v) = judgment.annotations.and_then(|a| a.get(prompt_id, run_index, ablation)) {
        if v == Verdict::Error {
            return Err(ClassifyError::ConflictingAnnotation { prompt_id, run_index, ablation });
        }
        return Ok(v);
    }
    let case = crate::prompts::prompt(prompt_id);
    match (judgment.checkers, case, &record.run_result) {
        (true, Some(case), Some(result)) => Ok(if case.check(result) {
            Verdict::Correct
        } else {
            Verdict::IncorrectLogic
        }),
        _ => Err(ClassifyError::MissingJudgment { prompt_id, run_index, ablation }),
    }
}
