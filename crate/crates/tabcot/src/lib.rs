//! Tabular chain-of-thought prompting, end to end.
//!
//! Instead of free-form reasoning prose, the model is prompted to lay out its
//! reasoning as a `|`-delimited table: the prompt ends with a header line such
//! as `|step|subquestion|process|result|`, the model fills in rows, and a
//! second, short completion reads the finished table back and states the
//! answer. This crate implements the whole pipeline:
//!
//! * [`scheme`] — table schemes (the ordered column headers) and the builtin
//!   catalog of general, domain-specific and task-specific schemes.
//! * [`table`] — a strict grammar for the generated tables, with structure
//!   diagnostics for ragged rows, skipped steps and empty cells.
//! * [`prompt`] — zero-shot and few-shot prompt assembly plus the per-answer-type
//!   extraction suffixes ("Therefore, the answer (arabic numerals) is").
//! * [`extract`] — typed answer extraction from stage-two completions: exact
//!   decimal numerals, multiple-choice letters, yes/no, free text.
//! * [`backend`] — the completion backends: a live OpenAI-compatible client,
//!   a deterministic replay backend over recorded fixtures, and a caching
//!   wrapper, all behind one trait.
//! * [`dataset`] — JSONL dataset loading with manifest validation.
//! * [`eval`] — the two-stage pipeline per question, three-scheme
//!   self-consistency voting, a deterministic parallel harness, report
//!   emission and the table-sensitivity probes.
//! * [`cli`] — the `tabcot` command-line interface.

pub mod backend;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod extract;
pub mod prompt;
pub mod scheme;
pub mod table;

pub use backend::{
    BackendError, CachedBackend, CompletionBackend, CompletionRequest, CompletionResponse,
    FixtureStore, LiveBackend, ReplayBackend,
};
pub use dataset::{DatasetManifest, QuestionRecord};
pub use eval::{
    evaluate, run_probe, EvalConfig, EvalReport, PerQuestionResult, ProbeId, ReportFormat,
};
pub use extract::{extract_answer, AnswerType, AnswerValue, ExtractedAnswer};
pub use prompt::{build_extraction_prompt, build_generation_prompt, Exemplar};
pub use scheme::TableScheme;
pub use table::{parse_table, ReasoningTable, StructureViolation};
