//! Report serialization: markdown for reading, CSV for spreadsheets, JSON
//! for everything else.
//!
//! All three formats are pure functions of the [`EvalReport`] — re-emitting
//! the same report always yields the same bytes.

use super::{EvalReport, QuestionRow};
use crate::table::{self, ReasoningTable};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "markdown",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!(
                "unknown report format {other:?} (expected markdown, csv or json)"
            )),
        }
    }
}

/// Serializes `report` in `format` and writes it to `out`.
pub fn emit_report(
    report: &EvalReport,
    format: ReportFormat,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    out.write_all(report_to_string(report, format).as_bytes())
}

/// Serializes `report` in `format`.
pub fn report_to_string(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(report),
        ReportFormat::Csv => csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

/// Pipe tables cannot carry `|` or newlines inside a cell; everything
/// user-controlled gets folded before rendering.
fn md_cell(s: &str) -> String {
    s.replace('|', "/").replace(['\n', '\r'], " ")
}

fn accuracy_cell(accuracy: f64) -> String {
    format!("{accuracy:.4}")
}

fn markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("# Evaluation report\n\n");
    out.push_str(&format!("- dataset: {}\n", report.dataset));
    out.push_str(&format!("- model: {}\n", report.model));
    out.push_str(&format!("- mode: {}\n", report.mode));
    out.push_str(&format!(
        "- vote: {}\n",
        if report.vote { "yes" } else { "no" }
    ));
    out.push_str(&format!("- schemes: {}\n", report.schemes.join(", ")));
    out.push_str(&format!("- questions: {}\n", report.n_questions));
    out.push('\n');

    // The summary is itself a reasoning-style pipe table: the crate's own
    // serializer guarantees it parses back.
    let columns = ["scope", "questions", "correct", "extraction_failures", "accuracy"];
    let mut rows = Vec::new();
    if report.n_questions > 0 {
        rows.push(vec![
            "overall".to_string(),
            report.n_questions.to_string(),
            report.overall.n_correct.to_string(),
            report.overall.n_extraction_failures.to_string(),
            accuracy_cell(report.overall.accuracy),
        ]);
        for scheme in &report.per_scheme {
            rows.push(vec![
                md_cell(&scheme.scheme_id),
                report.n_questions.to_string(),
                scheme.score.n_correct.to_string(),
                scheme.score.n_extraction_failures.to_string(),
                accuracy_cell(scheme.score.accuracy),
            ]);
        }
    }
    out.push_str(&pipe_table(&columns, rows));

    if !report.questions.is_empty() {
        out.push('\n');
        let columns = ["id", "scheme", "correct", "predicted", "violations", "error"];
        let rows = report
            .questions
            .iter()
            .map(|q| {
                vec![
                    md_cell(&q.id),
                    md_cell(&q.scheme_id),
                    if q.correct { "yes" } else { "no" }.to_string(),
                    md_cell(q.predicted.as_deref().unwrap_or("")),
                    q.violations.to_string(),
                    md_cell(q.error.as_deref().unwrap_or("")),
                ]
            })
            .collect();
        out.push_str(&pipe_table(&columns, rows));
    }
    out
}

fn pipe_table(columns: &[&str], rows: Vec<Vec<String>>) -> String {
    let columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
    let table = ReasoningTable::from_parts(columns, rows).expect("report table is well-formed");
    table::serialize(&table, true).expect("report table is rectangular")
}

/// One CSV row per question; summaries live in the JSON and markdown forms.
fn csv(report: &EvalReport) -> String {
    let mut out = String::from("id,scheme,correct,predicted,violations,error\n");
    for q in &report.questions {
        out.push_str(&csv_row(q));
    }
    out
}

fn csv_row(q: &QuestionRow) -> String {
    let fields = [
        csv_field(&q.id),
        csv_field(&q.scheme_id),
        (if q.correct { "true" } else { "false" }).to_string(),
        csv_field(q.predicted.as_deref().unwrap_or("")),
        q.violations.to_string(),
        csv_field(q.error.as_deref().unwrap_or("")),
    ];
    let mut line = fields.join(",");
    line.push('\n');
    line
}

/// Minimal CSV quoting: quote only when the field needs it, double inner
/// quotes.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{QuestionRow, ScoreSummary, SchemeSummary};
    use crate::scheme::parse_scheme;
    use crate::table::parse_table;

    fn sample_report() -> EvalReport {
        EvalReport {
            dataset: "desk".into(),
            model: "code-davinci-002".into(),
            mode: "zero-shot".into(),
            vote: false,
            schemes: vec!["main".into()],
            n_questions: 2,
            overall: ScoreSummary {
                n_correct: 1,
                n_extraction_failures: 0,
                accuracy: 0.5,
            },
            per_scheme: vec![SchemeSummary {
                scheme_id: "main".into(),
                score: ScoreSummary {
                    n_correct: 1,
                    n_extraction_failures: 0,
                    accuracy: 0.5,
                },
            }],
            questions: vec![
                QuestionRow {
                    id: "q1".into(),
                    scheme_id: "main".into(),
                    correct: true,
                    predicted: Some("4".into()),
                    violations: 0,
                    error: None,
                },
                QuestionRow {
                    id: "q2".into(),
                    scheme_id: "main".into(),
                    correct: false,
                    predicted: Some("7, maybe \"8\"".into()),
                    violations: 2,
                    error: None,
                },
            ],
        }
    }

    #[test]
    fn format_names_parse() {
        assert_eq!("markdown".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert_eq!("MD".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!(" json ".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }

    /// The markdown summary table must parse back through the crate's own
    /// table grammar with the right cells.
    #[test]
    fn markdown_summary_reparses() {
        let text = report_to_string(&sample_report(), ReportFormat::Markdown);
        let scheme =
            parse_scheme("|scope|questions|correct|extraction_failures|accuracy|").unwrap();
        let start = text.find("|scope|").unwrap();
        let (table, _rest) = parse_table(&text[start..], &scheme).unwrap();
        assert_eq!(table.row_count(), 2);
        assert_eq!(table.cell(0, 0), Some("overall"));
        assert_eq!(table.cell(0, 4), Some("0.5000"));
        assert_eq!(table.cell(1, 0), Some("main"));
    }

    #[test]
    fn markdown_of_empty_report_has_header_only_table() {
        let mut report = sample_report();
        report.n_questions = 0;
        report.questions.clear();
        report.overall = ScoreSummary {
            n_correct: 0,
            n_extraction_failures: 0,
            accuracy: 0.0,
        };
        let text = report_to_string(&report, ReportFormat::Markdown);
        let scheme =
            parse_scheme("|scope|questions|correct|extraction_failures|accuracy|").unwrap();
        let start = text.find("|scope|").unwrap();
        let (table, _rest) = parse_table(&text[start..], &scheme).unwrap();
        assert_eq!(table.row_count(), 0);
    }

    #[test]
    fn markdown_folds_pipes_out_of_cells() {
        let mut report = sample_report();
        report.questions[0].predicted = Some("a|b".into());
        let text = report_to_string(&report, ReportFormat::Markdown);
        assert!(text.contains("|a/b|"));
    }

    #[test]
    fn csv_quotes_only_what_needs_quoting() {
        let text = report_to_string(&sample_report(), ReportFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "id,scheme,correct,predicted,violations,error");
        assert_eq!(lines[1], "q1,main,true,4,0,");
        assert_eq!(lines[2], "q2,main,false,\"7, maybe \"\"8\"\"\",2,");
    }

    #[test]
    fn json_round_trips_the_counts() {
        let text = report_to_string(&sample_report(), ReportFormat::Json);
        assert!(text.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["n_questions"], 2);
        assert_eq!(value["overall"]["n_correct"], 1);
        assert_eq!(value["per_scheme"][0]["scheme_id"], "main");
        assert_eq!(value["questions"][0]["predicted"], "4");
        // Absent errors are omitted, not null.
        assert!(value["questions"][0].get("error").is_none());
    }

    #[test]
    fn emit_writes_the_same_bytes() {
        let report = sample_report();
        for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json] {
            let mut buf = Vec::new();
            emit_report(&report, format, &mut buf).unwrap();
            assert_eq!(buf, report_to_string(&report, format).into_bytes());
        }
    }
}
