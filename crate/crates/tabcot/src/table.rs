//! Strict grammar for generated reasoning tables.
//!
//! A table in a completion is the maximal run of consecutive lines beginning
//! with `|`, optionally preceded by a repeat of the header line the prompt
//! ended with and optionally followed by an alignment separator line (cells
//! of only `-` and `:` characters, as in `|:---|:---|`). Everything after
//! that run — typically a conclusion sentence — is returned unconsumed so
//! the caller can keep it.
//!
//! Models do not always produce rectangular tables. Rather than reject such
//! output, parsing normalizes it (short rows are padded with empty cells,
//! overlong rows fold their overflow into the last cell) and
//! [`validate_structure`] reports what was wrong: ragged rows, step columns
//! that do not count 1..m, and empty or `---` filler cells. These diagnostics
//! mirror the failure modes actually observed in generated tables, and they
//! feed the evaluation reports rather than aborting a run.

use crate::scheme::TableScheme;
use serde::Serialize;
use thiserror::Error;

/// Errors from table parsing and serialization.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    /// The completion's first non-blank line does not begin with `|`, so
    /// there is no table to parse.
    #[error("completion contains no table: first non-blank line does not begin with '|'")]
    NoTableFound,
    /// A table must have at least one column.
    #[error("table must have at least one column")]
    NoColumns,
    /// [`serialize`] refuses ragged tables; normalize or rebuild them first.
    #[error("table is not rectangular: row {row} has {got} cells, expected {expected}")]
    NotRectangular {
        row: usize,
        got: usize,
        expected: usize,
    },
}

/// The kind of a structure problem found in a parsed table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A row was written with a different number of cells than the header.
    RaggedRow,
    /// A `step` column exists but its cells do not count 1, 2, ... m.
    NonSequentialStep,
    /// A cell is empty or contains only `-` filler.
    EmptyCell,
    /// Reserved for layouts that omit the alignment separator where one is
    /// required; [`validate_structure`] itself never reports this kind.
    MissingSeparator,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ViolationKind::RaggedRow => "ragged_row",
            ViolationKind::NonSequentialStep => "non_sequential_step",
            ViolationKind::EmptyCell => "empty_cell",
            ViolationKind::MissingSeparator => "missing_separator",
        };
        f.write_str(name)
    }
}

/// One structure problem in a parsed table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureViolation {
    pub kind: ViolationKind,
    /// Zero-based body-row index the problem was found in.
    pub row: usize,
    /// Human-readable description of the problem.
    pub detail: String,
}

/// A parsed reasoning table: column names plus normalized rectangular rows.
///
/// Equality compares columns and rows only; the raw source text and the
/// originally written row widths are diagnostics and do not take part, so
/// `parse(serialize(t)) == t` holds even though serialization is canonical.
#[derive(Debug, Clone, Serialize)]
pub struct ReasoningTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    /// The table's span in the source completion, verbatim (header repeat and
    /// separator included, no trailing newline). Empty for built tables.
    #[serde(skip)]
    raw: String,
    /// Cell count of each row as originally written, before normalization.
    #[serde(skip)]
    source_widths: Vec<usize>,
}

impl PartialEq for ReasoningTable {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns && self.rows == other.rows
    }
}

impl Eq for ReasoningTable {}

impl ReasoningTable {
    /// Builds a table directly from parts, e.g. for tests or prompt fixtures.
    ///
    /// Rows may be ragged; they are kept as given and reported by
    /// [`validate_structure`]. The raw text is left empty.
    pub fn from_parts(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, TableError> {
        if columns.is_empty() {
            return Err(TableError::NoColumns);
        }
        let source_widths = rows.iter().map(Vec::len).collect();
        Ok(ReasoningTable {
            columns,
            rows,
            raw: String::new(),
            source_widths,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Number of body rows (the header does not count).
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// The verbatim source span this table was parsed from, or `""` for
    /// tables built with [`ReasoningTable::from_parts`].
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Cell at row `i`, column `j`, if present.
    pub fn cell(&self, i: usize, j: usize) -> Option<&str> {
        self.rows.get(i).and_then(|r| r.get(j)).map(String::as_str)
    }

    /// Cell at row `i` in the column named `name`, if both exist.
    pub fn cell_by_name(&self, i: usize, name: &str) -> Option<&str> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.cell(i, j)
    }
}

/// True iff the line's cells make it an alignment separator such as
/// `|---|---|` or `|:---|:---|`.
fn is_separator_line(line: &str) -> bool {
    let cells = split_cells(line);
    !cells.is_empty()
        && cells
            .iter()
            .all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':'))
}

/// Splits one `|`-prefixed line into trimmed cells.
///
/// The leading `|` contributes an empty first fragment that is dropped; a
/// trailing `|` likewise drops the empty last fragment. Interior empty cells
/// are preserved.
fn split_cells(line: &str) -> Vec<String> {
    let line = line.trim_end_matches('\r');
    let body = match line.strip_prefix('|') {
        Some(rest) => rest,
        None => line,
    };
    let body = body.strip_suffix('|').unwrap_or(body);
    body.split('|').map(|c| c.trim().to_string()).collect()
}

/// Extracts the table from a completion.
///
/// Skips leading blank lines, then consumes the maximal run of lines
/// beginning with `|`: an optional repeat of `expected`'s header, an optional
/// alignment separator, then body rows. Rows are normalized to the scheme's
/// width — short rows are padded with empty cells and overlong rows fold the
/// overflow back into the last cell — and the original widths are kept so
/// [`validate_structure`] can report the raggedness.
///
/// Returns the table and the unconsumed remainder of the completion (the
/// text after the table run, byte for byte). Fails with
/// [`TableError::NoTableFound`] when the first non-blank line does not begin
/// with `|`, including for empty completions.
pub fn parse_table(
    completion: &str,
    expected: &TableScheme,
) -> Result<(ReasoningTable, String), TableError> {
    // Walk the text line by line, tracking byte offsets so the remainder can
    // be returned exactly as written.
    let mut offset = 0;
    let mut lines: Vec<(usize, &str)> = Vec::new(); // (start offset, content w/o terminator)
    for line in completion.split_inclusive('\n') {
        let content = line.strip_suffix('\n').unwrap_or(line);
        lines.push((offset, content));
        offset += line.len();
    }

    let mut idx = 0;
    while idx < lines.len() && lines[idx].1.trim().is_empty() {
        idx += 1;
    }
    let first_table_line = idx;
    if first_table_line >= lines.len() || !lines[first_table_line].1.starts_with('|') {
        return Err(TableError::NoTableFound);
    }

    let header = expected.render_header();
    let n = expected.columns().len();

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut source_widths: Vec<usize> = Vec::new();
    let mut at_start = true; // before any body row: header/separator position
    let mut seen_header = false;
    while idx < lines.len() && lines[idx].1.starts_with('|') {
        let line = lines[idx].1;
        if at_start {
            if !seen_header && line.trim_end_matches('\r').trim() == header {
                seen_header = true;
                idx += 1;
                continue;
            }
            if is_separator_line(line) {
                at_start = false;
                idx += 1;
                continue;
            }
            at_start = false;
        }
        let cells = split_cells(line);
        source_widths.push(cells.len());
        rows.push(normalize_row(cells, n));
        idx += 1;
    }

    let raw_start = lines[first_table_line].0;
    let raw_end = {
        let (last_start, last_content) = lines[idx - 1];
        last_start + last_content.len()
    };
    let raw = completion[raw_start..raw_end].to_string();
    let remainder = if idx < lines.len() {
        completion[lines[idx].0..].to_string()
    } else {
        String::new()
    };

    Ok((
        ReasoningTable {
            columns: expected.columns().to_vec(),
            rows,
            raw,
            source_widths,
        },
        remainder,
    ))
}

/// Pads or folds one row of cells to exactly `n` cells.
fn normalize_row(mut cells: Vec<String>, n: usize) -> Vec<String> {
    use std::cmp::Ordering;
    match cells.len().cmp(&n) {
        Ordering::Equal => cells,
        Ordering::Less => {
            cells.resize(n, String::new());
            cells
        }
        Ordering::Greater => {
            let tail = cells.split_off(n - 1).join("|");
            cells.push(tail);
            cells
        }
    }
}

/// Serializes a table canonically: header line, an optional `|:---|`
/// alignment separator, then one line per row, each cell list joined with
/// `|`, wrapped in `|`, each line ending in a single newline.
///
/// Only rectangular tables serialize; ragged ones fail with
/// [`TableError::NotRectangular`].
pub fn serialize(table: &ReasoningTable, include_separator: bool) -> Result<String, TableError> {
    let n = table.columns.len();
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != n {
            return Err(TableError::NotRectangular {
                row: i,
                got: row.len(),
                expected: n,
            });
        }
    }
    let mut out = String::new();
    out.push_str(&format!("|{}|\n", table.columns.join("|")));
    if include_separator {
        out.push_str(&format!("|{}|\n", vec![":---"; n].join("|")));
    }
    for row in &table.rows {
        out.push_str(&format!("|{}|\n", row.join("|")));
    }
    Ok(out)
}

/// Reports the structure problems of a parsed table, in row order.
///
/// * [`ViolationKind::RaggedRow`] — the row was written with a cell count
///   different from the header's.
/// * [`ViolationKind::NonSequentialStep`] — the table has a `step` column
///   but the cell in row `i` (zero-based) is not `i + 1`.
/// * [`ViolationKind::EmptyCell`] — a cell is empty or `-` filler only.
///
/// A table from the happy path — rectangular, steps counting upward, every
/// cell filled — yields an empty report.
pub fn validate_structure(table: &ReasoningTable) -> Vec<StructureViolation> {
    let n = table.columns.len();
    let step_col = table.columns.iter().position(|c| c == "step");
    let mut violations = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let written = table.source_widths.get(i).copied().unwrap_or(row.len());
        if written != n || row.len() != n {
            violations.push(StructureViolation {
                kind: ViolationKind::RaggedRow,
                row: i,
                detail: format!("row written with {written} cells, expected {n}"),
            });
        }
        if let Some(j) = step_col {
            let expected = (i + 1).to_string();
            let got = row.get(j).map(String::as_str).unwrap_or("");
            if got != expected {
                violations.push(StructureViolation {
                    kind: ViolationKind::NonSequentialStep,
                    row: i,
                    detail: format!("step cell is {got:?}, expected {expected:?}"),
                });
            }
        }
        for (j, cell) in row.iter().enumerate() {
            let filler = !cell.is_empty() && cell.chars().all(|ch| ch == '-');
            if cell.is_empty() || filler {
                let column = table
                    .columns
                    .get(j)
                    .map(String::as_str)
                    .unwrap_or("(overflow)");
                violations.push(StructureViolation {
                    kind: ViolationKind::EmptyCell,
                    row: i,
                    detail: format!("cell in column {column:?} is {cell:?}"),
                });
            }
        }
    }
    violations
}
