//! Dataset loading: JSONL question files plus a manifest that pins the
//! answer type and expected size.
//!
//! One JSON object per line, e.g.
//!
//! ```json
//! {"id": "q1", "question": "Olivia has $23 ...", "answer": "8"}
//! {"question": "...", "answer": 42}
//! {"question": "...", "answer": "B", "choices": [["A", "50"], ["B", "45"]]}
//! ```
//!
//! `id` is optional (synthesized from the line number), `answer` may be a
//! string, number or boolean, and `choices` is required exactly for
//! multiple-choice datasets. Every gold answer must normalize under the
//! dataset's answer type; a gold that the harness could never match is a
//! data bug worth failing loudly on. A record count that differs from the
//! manifest's expected size is only a warning — subsets are legitimate.

use crate::extract::{normalize_gold, AnswerType};
use serde::Deserialize;
use std::collections::HashSet;
use std::path::Path;
use thiserror::Error;

/// Errors from manifest construction and dataset loading.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: invalid JSON: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: invalid {field:?}: {msg}")]
    InvalidRecord {
        line: usize,
        field: &'static str,
        msg: String,
    },
    /// The manifest disagrees with the built-in catalog entry of the same
    /// name, e.g. `gsm8k` declared as anything but 1319 numeral questions.
    #[error("manifest for {name:?} conflicts with the catalog: {msg}")]
    CatalogMismatch { name: String, msg: String },
}

/// What a dataset is: its name, how many questions it should have, and the
/// answer type its golds are scored under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    name: String,
    expected_size: usize,
    answer_type: AnswerType,
}

/// The ten evaluation tasks with their published sizes and answer types.
const KNOWN_TASKS: &[(&str, usize, AnswerType)] = &[
    ("singleeq", 508, AnswerType::Numeral),
    ("addsub", 395, AnswerType::Numeral),
    ("multiarith", 600, AnswerType::Numeral),
    ("gsm8k", 1319, AnswerType::Numeral),
    ("aqua", 254, AnswerType::MultipleChoice),
    ("svamp", 1000, AnswerType::Numeral),
    ("coinflip", 1000, AnswerType::YesNo),
    ("lastletter", 254, AnswerType::Text),
    ("strategyqa", 2290, AnswerType::YesNo),
    ("commonsenseqa", 1221, AnswerType::MultipleChoice),
];

/// Canonical key for catalog lookups: lowercase, separators removed, so
/// `Coin_Flip`, `coin-flip` and `coinflip` all name the same task.
fn catalog_key(name: &str) -> String {
    name.to_ascii_lowercase().replace(['-', '_', ' '], "")
}

impl DatasetManifest {
    /// Builds a manifest. Names matching a catalog task must agree with the
    /// catalog's size and answer type; unknown names are accepted as ad-hoc
    /// datasets.
    pub fn new(
        name: impl Into<String>,
        expected_size: usize,
        answer_type: AnswerType,
    ) -> Result<Self, DatasetError> {
        let name = name.into();
        if let Some(known) = Self::known(&name) {
            if known.expected_size != expected_size || known.answer_type != answer_type {
                return Err(DatasetError::CatalogMismatch {
                    name,
                    msg: format!(
                        "catalog says {} {} questions, manifest says {} {}",
                        known.expected_size, known.answer_type, expected_size, answer_type
                    ),
                });
            }
        }
        Ok(DatasetManifest {
            name,
            expected_size,
            answer_type,
        })
    }

    /// The catalog manifest for a known task name, if any.
    pub fn known(name: &str) -> Option<DatasetManifest> {
        let key = catalog_key(name);
        KNOWN_TASKS
            .iter()
            .find(|(task, _, _)| *task == key)
            .map(|(task, size, at)| DatasetManifest {
                name: (*task).to_string(),
                expected_size: *size,
                answer_type: *at,
            })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expected_size(&self) -> usize {
        self.expected_size
    }

    pub fn answer_type(&self) -> AnswerType {
        self.answer_type
    }
}

/// One question as the harness sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub answer_type: AnswerType,
    /// The gold answer, verbatim from the dataset (validated to normalize).
    pub gold: String,
    /// Letter/text pairs for multiple-choice questions, in display order.
    pub choices: Option<Vec<(String, String)>>,
}

/// A loaded dataset plus any non-fatal observations.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub records: Vec<QuestionRecord>,
    pub warnings: Vec<String>,
}

/// The shape of one JSONL line.
#[derive(Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<String>,
    question: String,
    answer: serde_json::Value,
    #[serde(default)]
    choices: Option<Vec<(String, String)>>,
}

/// Renders the `answer` field to the gold string the harness scores against.
fn gold_text(answer: &serde_json::Value) -> Option<String> {
    match answer {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(if *b { "yes" } else { "no" }.to_string()),
        _ => None,
    }
}

/// Loads a JSONL dataset file and validates it against the manifest.
///
/// Blank lines are skipped. Fails on unreadable files, malformed JSON,
/// empty questions, duplicate ids, golds that do not normalize under the
/// manifest's answer type, and `choices` that are missing on a
/// multiple-choice dataset or present on any other. A size mismatch with
/// the manifest is reported as a warning, not an error.
pub fn load_dataset(path: &Path, manifest: &DatasetManifest) -> Result<LoadedDataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_dataset_str(&text, manifest)
}

/// [`load_dataset`] over in-memory text; line numbers are 1-based.
pub fn load_dataset_str(
    text: &str,
    manifest: &DatasetManifest,
) -> Result<LoadedDataset, DatasetError> {
    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| DatasetError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
        let invalid = |field: &'static str, msg: String| DatasetError::InvalidRecord {
            line: line_no,
            field,
            msg,
        };

        if raw.question.trim().is_empty() {
            return Err(invalid("question", "question is empty".into()));
        }
        let gold = gold_text(&raw.answer)
            .ok_or_else(|| invalid("answer", "must be a string, number or boolean".into()))?;
        normalize_gold(&gold, manifest.answer_type())
            .map_err(|e| invalid("answer", e.to_string()))?;

        match (manifest.answer_type(), &raw.choices) {
            (AnswerType::MultipleChoice, None) => {
                return Err(invalid(
                    "choices",
                    "multiple-choice datasets must list choices".into(),
                ));
            }
            (AnswerType::MultipleChoice, Some(choices)) => {
                if choices.is_empty() {
                    return Err(invalid("choices", "choice list is empty".into()));
                }
                for (letter, _) in choices {
                    if letter.len() != 1 || !('A'..='E').contains(&letter.chars().next().unwrap())
                    {
                        return Err(invalid(
                            "choices",
                            format!("choice letter {letter:?} is not one of A-E"),
                        ));
                    }
                }
            }
            (_, Some(_)) => {
                return Err(invalid(
                    "choices",
                    format!("{} datasets take no choices", manifest.answer_type()),
                ));
            }
            (_, None) => {}
        }

        let id = raw.id.unwrap_or_else(|| format!("q{line_no}"));
        if !seen_ids.insert(id.clone()) {
            return Err(invalid("id", format!("duplicate id {id:?}")));
        }
        records.push(QuestionRecord {
            id,
            question: raw.question,
            answer_type: manifest.answer_type(),
            gold,
            choices: raw.choices,
        });
    }

    let mut warnings = Vec::new();
    if records.len() != manifest.expected_size() {
        warnings.push(format!(
            "dataset {:?} has {} records, manifest expects {}",
            manifest.name(),
            records.len(),
            manifest.expected_size()
        ));
    }
    Ok(LoadedDataset { records, warnings })
}
