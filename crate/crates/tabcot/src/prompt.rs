//! Prompt assembly for the two completion stages.
//!
//! Stage one (table generation) places the scheme header directly under the
//! question, so the model's natural continuation is the table body:
//!
//! ```text
//! a=2, b=3, what is 2*a+3*b?
//! |step|solution|
//! ```
//!
//! Few-shot runs prepend worked examples, each a question, a finished table
//! and a conclusion sentence, separated by blank lines. Stage two (answer
//! extraction) replays the generation prompt plus the generated table and
//! appends the answer-type-specific suffix, ending in a space so the model
//! continues with the answer itself.

use crate::extract::AnswerType;
use crate::scheme::TableScheme;
use crate::table::{parse_table, serialize, ReasoningTable};
use thiserror::Error;

/// Errors from exemplar construction and exemplar-file parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("exemplar question must be a single non-empty line")]
    BadQuestion,
    #[error("exemplar conclusion must be a single non-empty line")]
    BadConclusion,
    /// An exemplar table without verbatim source text must be rectangular,
    /// otherwise it cannot be rendered into a prompt.
    #[error("exemplar table is ragged and has no verbatim source text")]
    UnrenderableTable,
    #[error("exemplar file, line {line}: {msg}")]
    MalformedFile { line: usize, msg: String },
}

/// One worked example for few-shot prompts: a question, its reasoning table
/// and the conclusion sentence that states the answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    question: String,
    table: ReasoningTable,
    conclusion: String,
}

impl Exemplar {
    /// Builds an exemplar, validating that question and conclusion are
    /// single non-empty lines and that the table is renderable (rectangular,
    /// unless it carries verbatim source text from a fixture file).
    pub fn new(
        question: impl Into<String>,
        table: ReasoningTable,
        conclusion: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let question = question.into();
        let conclusion = conclusion.into();
        if question.trim().is_empty() || question.contains('\n') {
            return Err(PromptError::BadQuestion);
        }
        if conclusion.trim().is_empty() || conclusion.contains('\n') {
            return Err(PromptError::BadConclusion);
        }
        if table.raw().is_empty() && serialize(&table, true).is_err() {
            return Err(PromptError::UnrenderableTable);
        }
        Ok(Exemplar {
            question,
            table,
            conclusion,
        })
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    pub fn table(&self) -> &ReasoningTable {
        &self.table
    }

    pub fn conclusion(&self) -> &str {
        &self.conclusion
    }

    /// The table as it should appear in a prompt: the verbatim fixture text
    /// when available, otherwise the canonical serialization with an
    /// alignment separator.
    fn table_text(&self) -> String {
        if !self.table.raw().is_empty() {
            self.table.raw().to_string()
        } else {
            let text = serialize(&self.table, true).expect("checked rectangular at construction");
            text.trim_end_matches('\n').to_string()
        }
    }
}

/// The stage-two suffix for one answer type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionTemplate {
    answer_type: AnswerType,
    text: &'static str,
}

impl ExtractionTemplate {
    pub fn answer_type(&self) -> AnswerType {
        self.answer_type
    }

    /// The suffix sentence, without the trailing space the prompt adds.
    pub fn text(&self) -> &str {
        self.text
    }
}

/// Returns the extraction suffix for an answer type. The wording matters:
/// it steers the model to answer in the form the extractor scans for.
pub fn extraction_template(answer_type: AnswerType) -> ExtractionTemplate {
    let text = match answer_type {
        AnswerType::Numeral => "Therefore, the answer (arabic numerals) is",
        AnswerType::MultipleChoice => "Therefore, among A through E, the answer is",
        AnswerType::YesNo => "Therefore, the answer (Yes or No) is",
        AnswerType::Text => "Therefore, the answer is",
    };
    ExtractionTemplate { answer_type, text }
}

/// Builds the stage-one prompt: optional exemplar blocks, then the question
/// with the scheme header on the next line. Ends with a newline so the model
/// continues with the first table row (or a separator line).
///
/// The question is used as given and should be non-empty, single-line text.
pub fn build_generation_prompt(
    question: &str,
    scheme: &TableScheme,
    exemplars: &[Exemplar],
) -> String {
    let mut prompt = String::new();
    for exemplar in exemplars {
        prompt.push_str(exemplar.question());
        prompt.push('\n');
        prompt.push_str(&exemplar.table_text());
        prompt.push('\n');
        prompt.push_str(exemplar.conclusion());
        prompt.push_str("\n\n");
    }
    prompt.push_str(question);
    prompt.push('\n');
    prompt.push_str(&scheme.render_header());
    prompt.push('\n');
    prompt
}

/// Builds the stage-two prompt: the generation prompt, the generated table
/// verbatim, then the extraction suffix and a trailing space.
pub fn build_extraction_prompt(
    generation_prompt: &str,
    table_text: &str,
    template: &ExtractionTemplate,
) -> String {
    format!("{generation_prompt}{table_text}\n{} ", template.text())
}

/// Parses an exemplar file.
///
/// The format is line-oriented: `#` comment lines and blank lines between
/// blocks are skipped; each block is a `Q: <question>` line, a run of
/// `|`-prefixed table lines (header first), and one conclusion line.
pub fn parse_exemplar_file(text: &str) -> Result<Vec<Exemplar>, PromptError> {
    let mut exemplars = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let question = trimmed
            .strip_prefix("Q:")
            .ok_or(PromptError::MalformedFile {
                line: idx + 1,
                msg: "expected a 'Q:' question line".into(),
            })?
            .trim()
            .to_string();

        let mut table_lines: Vec<&str> = Vec::new();
        let mut table_start = idx + 2;
        while let Some((i, l)) = lines.peek() {
            if !l.trim_start().is_empty() && l.trim().starts_with('|') {
                if table_lines.is_empty() {
                    table_start = i + 1;
                }
                table_lines.push(l.trim());
                lines.next();
            } else {
                break;
            }
        }
        if table_lines.is_empty() {
            return Err(PromptError::MalformedFile {
                line: idx + 1,
                msg: "question has no table block".into(),
            });
        }
        let scheme = crate::scheme::parse_scheme(table_lines[0]).map_err(|e| {
            PromptError::MalformedFile {
                line: table_start,
                msg: format!("bad table header: {e}"),
            }
        })?;
        let block = table_lines.join("\n");
        let (table, rest) =
            parse_table(&block, &scheme).map_err(|e| PromptError::MalformedFile {
                line: table_start,
                msg: format!("bad table block: {e}"),
            })?;
        debug_assert!(rest.is_empty(), "block contains only table lines");

        let conclusion = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => {
                    let c = l.trim();
                    if c.starts_with('#') || c.starts_with("Q:") {
                        return Err(PromptError::MalformedFile {
                            line: i + 1,
                            msg: "table block has no conclusion line".into(),
                        });
                    }
                    break c.to_string();
                }
                None => {
                    return Err(PromptError::MalformedFile {
                        line: idx + 1,
                        msg: "exemplar ends without a conclusion line".into(),
                    })
                }
            }
        };
        exemplars.push(Exemplar::new(question, table, conclusion)?);
    }
    Ok(exemplars)
}

/// Names of the exemplar sets shipped with the crate.
pub const BUILTIN_EXEMPLAR_SETS: &[&str] = &[
    "arithmetic",
    "aqua",
    "commonsenseqa",
    "strategyqa",
    "coinflip",
    "lastletter",
];

/// Loads a builtin exemplar set by name; `None` for unknown names.
pub fn builtin_exemplars(name: &str) -> Option<Vec<Exemplar>> {
    let text = match name {
        "arithmetic" => include_str!("../fixtures/exemplars/arithmetic.txt"),
        "aqua" => include_str!("../fixtures/exemplars/aqua.txt"),
        "commonsenseqa" => include_str!("../fixtures/exemplars/commonsenseqa.txt"),
        "strategyqa" => include_str!("../fixtures/exemplars/strategyqa.txt"),
        "coinflip" => include_str!("../fixtures/exemplars/coinflip.txt"),
        "lastletter" => include_str!("../fixtures/exemplars/lastletter.txt"),
        _ => return None,
    };
    Some(parse_exemplar_file(text).expect("builtin exemplar sets parse"))
}
