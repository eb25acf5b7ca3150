//! The evaluation harness: two-stage runs per question, self-consistency
//! voting across schemes, deterministic parallel execution and report
//! aggregation.
//!
//! For each question the harness issues two completions — generate the
//! reasoning table, then read the answer back — parses and validates the
//! table, extracts a typed answer and scores it against the gold label.
//! A voting run does this under three different schemes and keeps the
//! majority answer.
//!
//! Determinism is a hard requirement: evaluating the same dataset against
//! the same fixture store must produce byte-identical reports, whatever the
//! worker count. Everything that could vary between runs — wall-clock
//! timings, parallelism, thread interleavings — is therefore kept out of the
//! report; workers write into per-question slots so aggregation order is
//! dataset order.

mod probe;
mod report;

pub use probe::{probe_prompt, probe_scheme, run_probe, ProbeId, ProbeTranscript};
pub use report::{emit_report, report_to_string, ReportFormat};

use crate::backend::{
    BackendError, CompletionBackend, CompletionRequest, DEFAULT_MAX_TOKENS, DEFAULT_MODEL,
};
use crate::dataset::QuestionRecord;
use crate::extract::{
    extract_answer, normalize_gold, AnswerValue, ExtractError, ExtractedAnswer,
};
use crate::prompt::{build_extraction_prompt, build_generation_prompt, extraction_template, Exemplar};
use crate::scheme::TableScheme;
use crate::table::{parse_table, validate_structure, ReasoningTable, StructureViolation};
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Errors from the harness itself.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    /// A gold label that does not normalize; datasets validate golds on
    /// load, so this points at a hand-built [`QuestionRecord`].
    #[error("gold label: {0}")]
    Gold(ExtractError),
    #[error("config: {0}")]
    Config(String),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
}

/// Default worker count for [`evaluate`].
pub const DEFAULT_PARALLELISM: usize = 4;

/// How a whole evaluation run is set up.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Dataset name, echoed into the report.
    pub dataset: String,
    pub model: String,
    /// One scheme for single runs; exactly three distinct schemes when
    /// `vote` is set.
    pub schemes: Vec<TableScheme>,
    /// Majority voting across the three schemes.
    pub vote: bool,
    /// Worked examples prepended to every prompt; empty for zero-shot.
    pub exemplars: Vec<Exemplar>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Option<Vec<String>>,
    /// Worker threads; affects wall-clock time only, never report bytes.
    pub parallelism: usize,
}

impl EvalConfig {
    /// A single-scheme zero-shot config with the crate defaults.
    pub fn new(dataset: impl Into<String>, scheme: TableScheme) -> EvalConfig {
        EvalConfig {
            dataset: dataset.into(),
            model: DEFAULT_MODEL.to_string(),
            schemes: vec![scheme],
            vote: false,
            exemplars: Vec::new(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            stop: None,
            parallelism: DEFAULT_PARALLELISM,
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.vote {
            if self.schemes.len() != 3 {
                return Err(EvalError::Config(format!(
                    "voting needs exactly three schemes, got {}",
                    self.schemes.len()
                )));
            }
            for (i, a) in self.schemes.iter().enumerate() {
                for b in &self.schemes[i + 1..] {
                    if a == b {
                        return Err(EvalError::Config(format!(
                            "voting schemes must be distinct; {} and {} render the same header",
                            a.id(),
                            b.id()
                        )));
                    }
                }
            }
        } else if self.schemes.len() != 1 {
            return Err(EvalError::Config(format!(
                "single runs take exactly one scheme, got {}",
                self.schemes.len()
            )));
        }
        Ok(())
    }

    fn params(&self) -> CompletionParams {
        CompletionParams {
            model: self.model.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            stop: self.stop.clone(),
        }
    }
}

/// The request-shaping knobs shared by every completion in a run.
#[derive(Debug, Clone)]
pub struct CompletionParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Option<Vec<String>>,
}

impl Default for CompletionParams {
    fn default() -> Self {
        CompletionParams {
            model: DEFAULT_MODEL.to_string(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            stop: None,
        }
    }
}

impl CompletionParams {
    pub fn request(&self, prompt: impl Into<String>) -> CompletionRequest {
        CompletionRequest {
            model: self.model.clone(),
            prompt: prompt.into(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            stop: self.stop.clone(),
        }
    }
}

/// Wall-clock spent in each stage; diagnostic only, never serialized.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub generation: Duration,
    pub extraction: Duration,
}

/// Everything the harness learned about one question under one scheme.
#[derive(Debug, Clone)]
pub struct PerQuestionResult {
    pub question_id: String,
    pub scheme_id: String,
    /// Raw stage-one completion.
    pub generation_text: String,
    /// The parsed table; `None` when the completion contained none.
    pub table: Option<ReasoningTable>,
    pub violations: Vec<StructureViolation>,
    /// Raw stage-two completion.
    pub extraction_text: String,
    /// The extracted answer; `None` counts as an extraction failure.
    pub predicted: Option<ExtractedAnswer>,
    pub correct: bool,
    /// Backend failure that aborted this question, if any.
    pub error: Option<String>,
    pub timings: StageTimings,
}

/// Renders the question text a prompt should carry: multiple-choice records
/// get their choices appended inline, the way the exemplars phrase them.
pub fn render_question(record: &QuestionRecord) -> String {
    match &record.choices {
        None => record.question.clone(),
        Some(choices) => {
            let rendered: Vec<String> = choices
                .iter()
                .map(|(letter, text)| format!("({letter}) {text}"))
                .collect();
            format!(
                "{} Answer Choices: {}",
                record.question.trim_end(),
                rendered.join(" ")
            )
        }
    }
}

/// Runs the two-stage pipeline for one question under one scheme.
///
/// Stage one generates the table; if the completion contains no table the
/// question is not abandoned — stage two runs over the raw completion text,
/// since the answer extraction prompt is meaningful either way. Backend
/// errors abort the question and surface as `Err`.
pub fn run_question(
    record: &QuestionRecord,
    scheme: &TableScheme,
    exemplars: &[Exemplar],
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<PerQuestionResult, EvalError> {
    let gold = normalize_gold(&record.gold, record.answer_type).map_err(EvalError::Gold)?;
    let question = render_question(record);
    let generation_prompt = build_generation_prompt(&question, scheme, exemplars);

    let started = Instant::now();
    let generation = backend.complete(&params.request(generation_prompt.clone()))?;
    let generation_elapsed = started.elapsed();

    let (table, table_text) = match parse_table(&generation.text, scheme) {
        Ok((table, _rest)) => {
            let text = table.raw().to_string();
            (Some(table), text)
        }
        Err(_) => (None, generation.text.clone()),
    };
    let violations = table.as_ref().map(validate_structure).unwrap_or_default();

    let template = extraction_template(record.answer_type);
    let extraction_prompt = build_extraction_prompt(&generation_prompt, &table_text, &template);
    let started = Instant::now();
    let extraction = backend.complete(&params.request(extraction_prompt))?;
    let extraction_elapsed = started.elapsed();

    let predicted = extract_answer(&extraction.text, record.answer_type).ok();
    let correct = predicted
        .as_ref()
        .map(|p| p.value.matches(&gold.value))
        .unwrap_or(false);

    Ok(PerQuestionResult {
        question_id: record.id.clone(),
        scheme_id: scheme.id().to_string(),
        generation_text: generation.text,
        table,
        violations,
        extraction_text: extraction.text,
        predicted,
        correct,
        error: None,
        timings: StageTimings {
            generation: generation_elapsed,
            extraction: extraction_elapsed,
        },
    })
}

/// Outcome of a three-scheme voting run on one question.
#[derive(Debug, Clone)]
pub struct VoteOutcome {
    /// The result that carried the vote (a copy of the winning scheme's
    /// result, tagged `vote[<scheme>]`).
    pub voted: PerQuestionResult,
    /// All three per-scheme results, in scheme order.
    pub per_scheme: Vec<PerQuestionResult>,
}

/// The voting rule: the index of the scheme whose answer wins.
///
/// A value that at least two of the three answers agree on (under
/// match-equality) wins, represented by the first scheme holding it. With
/// no such majority — all three differ, or too many extraction failures —
/// the first-listed scheme wins by default. Extraction failures (`None`)
/// never match anything, including each other.
pub fn vote_index(answers: [Option<&AnswerValue>; 3]) -> usize {
    let agree = |a: Option<&AnswerValue>, b: Option<&AnswerValue>| match (a, b) {
        (Some(a), Some(b)) => a.matches(b),
        _ => false,
    };
    if agree(answers[0], answers[1]) || agree(answers[0], answers[2]) {
        0
    } else if agree(answers[1], answers[2]) {
        1
    } else {
        0
    }
}

/// Runs one question under three schemes and applies [`vote_index`].
pub fn self_consistency(
    record: &QuestionRecord,
    schemes: &[TableScheme],
    exemplars: &[Exemplar],
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<VoteOutcome, EvalError> {
    if schemes.len() != 3 {
        return Err(EvalError::Config(format!(
            "voting needs exactly three schemes, got {}",
            schemes.len()
        )));
    }
    let mut per_scheme = Vec::with_capacity(3);
    for scheme in schemes {
        per_scheme.push(run_question(record, scheme, exemplars, backend, params)?);
    }
    let answers: Vec<Option<&AnswerValue>> = per_scheme
        .iter()
        .map(|r| r.predicted.as_ref().map(|p| &p.value))
        .collect();
    let winner = vote_index([answers[0], answers[1], answers[2]]);
    let mut voted = per_scheme[winner].clone();
    voted.scheme_id = format!("vote[{}]", per_scheme[winner].scheme_id);
    Ok(VoteOutcome { voted, per_scheme })
}

/// Aggregate counts for one slice of results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub n_correct: usize,
    pub n_extraction_failures: usize,
    pub accuracy: f64,
}

impl ScoreSummary {
    fn from_results<'a>(results: impl IntoIterator<Item = &'a PerQuestionResult>) -> ScoreSummary {
        let mut n = 0usize;
        let mut n_correct = 0usize;
        let mut n_extraction_failures = 0usize;
        for result in results {
            n += 1;
            if result.correct {
                n_correct += 1;
            }
            if result.predicted.is_none() {
                n_extraction_failures += 1;
            }
        }
        ScoreSummary {
            n_correct,
            n_extraction_failures,
            // Guard the empty case: NaN is not representable in JSON.
            accuracy: if n == 0 { 0.0 } else { n_correct as f64 / n as f64 },
        }
    }
}

/// Per-scheme slice of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub scheme_id: String,
    #[serde(flatten)]
    pub score: ScoreSummary,
}

/// One row per question in the report: identification and outcome, no bulky
/// texts (those stay on [`PerQuestionResult`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionRow {
    pub id: String,
    /// Winning scheme for voting runs, the single scheme otherwise.
    pub scheme_id: String,
    pub correct: bool,
    /// Display form of the extracted answer.
    pub predicted: Option<String>,
    /// Number of structure violations in the generated table.
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The aggregated outcome of an evaluation run.
///
/// Contains nothing run-environment-specific: no timings, no worker counts,
/// no paths — the same dataset over the same fixtures serializes to the same
/// bytes every time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub dataset: String,
    pub model: String,
    /// `"zero-shot"` or `"few-shot"`.
    pub mode: String,
    pub vote: bool,
    pub schemes: Vec<String>,
    pub n_questions: usize,
    pub overall: ScoreSummary,
    pub per_scheme: Vec<SchemeSummary>,
    pub questions: Vec<QuestionRow>,
}

/// Evaluates a dataset: every record through the pipeline, aggregated into
/// an [`EvalReport`].
///
/// Questions run on `config.parallelism` worker threads; results land in
/// per-question slots keyed by dataset position, so the report is identical
/// whatever the interleaving. A backend error on one question marks that
/// question failed (and incorrect) rather than aborting the run.
pub fn evaluate(
    records: &[QuestionRecord],
    config: &EvalConfig,
    backend: &dyn CompletionBackend,
) -> Result<EvalReport, EvalError> {
    config.validate()?;
    let params = config.params();
    let n = records.len();
    let workers = config.parallelism.max(1).min(n.max(1));

    // (voted result, per-scheme results) per question, filled by workers.
    type Slot = Option<(PerQuestionResult, Vec<PerQuestionResult>)>;
    let slots: Vec<Mutex<Slot>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= n {
                    break;
                }
                let outcome = evaluate_one(&records[index], config, backend, &params);
                *slots[index].lock().expect("result slot") = Some(outcome);
            });
        }
    });

    let mut voted_results = Vec::with_capacity(n);
    let mut scheme_results: Vec<Vec<PerQuestionResult>> =
        config.schemes.iter().map(|_| Vec::new()).collect();
    for slot in slots {
        let (voted, per_scheme) = slot
            .into_inner()
            .expect("result slot")
            .expect("every index was claimed by a worker");
        debug_assert_eq!(per_scheme.len(), config.schemes.len());
        for (bucket, result) in scheme_results.iter_mut().zip(per_scheme) {
            bucket.push(result);
        }
        voted_results.push(voted);
    }

    let questions = voted_results
        .iter()
        .map(|r| QuestionRow {
            id: r.question_id.clone(),
            scheme_id: r.scheme_id.clone(),
            correct: r.correct,
            predicted: r.predicted.as_ref().map(|p| p.value.to_string()),
            violations: r.violations.len(),
            error: r.error.clone(),
        })
        .collect();

    Ok(EvalReport {
        dataset: config.dataset.clone(),
        model: config.model.clone(),
        mode: if config.exemplars.is_empty() {
            "zero-shot".to_string()
        } else {
            "few-shot".to_string()
        },
        vote: config.vote,
        schemes: config.schemes.iter().map(|s| s.id().to_string()).collect(),
        n_questions: n,
        overall: ScoreSummary::from_results(&voted_results),
        per_scheme: config
            .schemes
            .iter()
            .zip(&scheme_results)
            .map(|(scheme, results)| SchemeSummary {
                scheme_id: scheme.id().to_string(),
                score: ScoreSummary::from_results(results),
            })
            .collect(),
        questions,
    })
}

/// Runs one question under the configured mode, converting backend errors
/// into failure rows so one flaky question cannot sink a whole run.
fn evaluate_one(
    record: &QuestionRecord,
    config: &EvalConfig,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> (PerQuestionResult, Vec<PerQuestionResult>) {
    if config.vote {
        match self_consistency(record, &config.schemes, &config.exemplars, backend, params) {
            Ok(outcome) => (outcome.voted, outcome.per_scheme),
            Err(e) => {
                let failures: Vec<PerQuestionResult> = config
                    .schemes
                    .iter()
                    .map(|s| failure_result(record, s.id(), &e))
                    .collect();
                let mut voted = failure_result(record, config.schemes[0].id(), &e);
                voted.scheme_id = format!("vote[{}]", voted.scheme_id);
                (voted, failures)
            }
        }
    } else {
        let scheme = &config.schemes[0];
        match run_question(record, scheme, &config.exemplars, backend, params) {
            Ok(result) => (result.clone(), vec![result]),
            Err(e) => {
                let failure = failure_result(record, scheme.id(), &e);
                (failure.clone(), vec![failure])
            }
        }
    }
}

fn failure_result(record: &QuestionRecord, scheme_id: &str, error: &EvalError) -> PerQuestionResult {
    PerQuestionResult {
        question_id: record.id.clone(),
        scheme_id: scheme_id.to_string(),
        generation_text: String::new(),
        table: None,
        violations: Vec::new(),
        extraction_text: String::new(),
        predicted: None,
        correct: false,
        error: Some(error.to_string()),
        timings: StageTimings::default(),
    }
}
