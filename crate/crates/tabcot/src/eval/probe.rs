//! Structure-sensitivity probes.
//!
//! Each probe shows the model a small arithmetic grid — header
//! `|step|v1|v2|v3|v4|`, six rows where row *i* reads
//! `|i|i+1|i+2|i+3|i+4|` — manipulated in one specific way, and asks for a
//! continuation. Parsing the continuation back through the table grammar
//! shows whether the model treated the text as a two-dimensional grid or as
//! a flat token stream:
//!
//! * **A** — the grid verbatim; a structure-following continuation appends
//!   `|7|8|9|10|11|`.
//! * **B** — the same values comma-separated; whether the continuation
//!   recovers `|`-delimited structure or stays flat.
//! * **C** — row 4 carries a wrong value (`|4|5|9|7|8|`); whether the
//!   continuation resumes the true pattern or propagates the error.
//! * **D** — a final row skips ahead and stops mid-row (`|9|10|`, no
//!   newline). A continuation that reads both across the row and down the
//!   columns finishes `11|12|13`; one that only reads down the last column
//!   writes `11` where `13` belongs.

use super::{CompletionParams, EvalError};
use crate::backend::CompletionBackend;
use crate::scheme::{parse_scheme, TableScheme};
use crate::table::{parse_table, validate_structure, ReasoningTable, StructureViolation};
use std::fmt;
use std::str::FromStr;

/// Which probe to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeId {
    A,
    B,
    C,
    D,
}

impl ProbeId {
    pub const ALL: [ProbeId; 4] = [ProbeId::A, ProbeId::B, ProbeId::C, ProbeId::D];

    /// One line on what the probe manipulates and what to look for.
    pub fn description(self) -> &'static str {
        match self {
            ProbeId::A => {
                "well-formed grid; a structure-following continuation appends |7|8|9|10|11|"
            }
            ProbeId::B => {
                "same values comma-separated; does the continuation recover | delimiters?"
            }
            ProbeId::C => {
                "row 4 holds a wrong value (9 for 6); does the continuation resume the pattern?"
            }
            ProbeId::D => {
                "final row skips to step 9 and stops after |9|10|; reading the grid both ways \
                 finishes the row with 13, reading only down the last column gives 11"
            }
        }
    }
}

impl fmt::Display for ProbeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeId::A => "A",
            ProbeId::B => "B",
            ProbeId::C => "C",
            ProbeId::D => "D",
        })
    }
}

impl FromStr for ProbeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "a" | "A" => Ok(ProbeId::A),
            "b" | "B" => Ok(ProbeId::B),
            "c" | "C" => Ok(ProbeId::C),
            "d" | "D" => Ok(ProbeId::D),
            other => Err(format!("unknown probe {other:?} (expected A, B, C or D)")),
        }
    }
}

/// The scheme every probe grid uses.
pub fn probe_scheme() -> TableScheme {
    parse_scheme("|step|v1|v2|v3|v4|").expect("probe header is well-formed")
}

/// Row *i* of the base grid: `|i|i+1|i+2|i+3|i+4|`.
fn base_row(i: u32) -> String {
    format!("|{}|{}|{}|{}|{}|", i, i + 1, i + 2, i + 3, i + 4)
}

fn base_grid() -> String {
    let mut grid = probe_scheme().render_header();
    grid.push('\n');
    for i in 1..=6 {
        grid.push_str(&base_row(i));
        grid.push('\n');
    }
    grid
}

/// Builds the full prompt for `id`: one instruction line, a blank line, then
/// the manipulated grid. Probe D's prompt ends mid-row with no trailing
/// newline so the completion continues the row itself.
pub fn probe_prompt(id: ProbeId) -> String {
    let instruction = match id {
        ProbeId::D => "Complete the final row of the following table.",
        _ => "Continue the following table with the next row.",
    };
    let grid = match id {
        ProbeId::A => base_grid(),
        ProbeId::B => {
            let lines: Vec<String> = base_grid()
                .lines()
                .map(|line| line.trim_matches('|').replace('|', ","))
                .collect();
            lines.join("\n") + "\n"
        }
        ProbeId::C => base_grid().replace("|4|5|6|7|8|", "|4|5|9|7|8|"),
        ProbeId::D => {
            let mut g = base_grid();
            g.push_str("|9|10|");
            g
        }
    };
    format!("{instruction}\n\n{grid}")
}

/// A probe run: the exchange plus the structural reading of the result.
#[derive(Debug, Clone)]
pub struct ProbeTranscript {
    pub id: ProbeId,
    pub prompt: String,
    pub completion: String,
    /// The grid block of the prompt joined with the completion — what the
    /// table grammar was applied to.
    pub parsed_text: String,
    pub table: Option<ReasoningTable>,
    pub violations: Vec<StructureViolation>,
}

impl ProbeTranscript {
    /// Human-readable transcript for terminal output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("probe {}: {}\n", self.id, self.id.description()));
        out.push_str("\n--- prompt ---\n");
        out.push_str(&self.prompt);
        if !self.prompt.ends_with('\n') {
            out.push('\n');
        }
        out.push_str("--- completion ---\n");
        out.push_str(&self.completion);
        if !self.completion.ends_with('\n') {
            out.push('\n');
        }
        out.push_str("--- reading ---\n");
        match &self.table {
            None => out.push_str("no table found in the combined text\n"),
            Some(table) => {
                out.push_str(&format!(
                    "table: {} rows x {} columns\n",
                    table.row_count(),
                    table.column_count()
                ));
                if self.violations.is_empty() {
                    out.push_str("structure: clean\n");
                } else {
                    for v in &self.violations {
                        out.push_str(&format!("row {}: {} — {}\n", v.row + 1, v.kind, v.detail));
                    }
                }
            }
        }
        out
    }
}

/// Runs one probe: sends the prompt, then parses the grid block of the
/// prompt plus the completion as one table. For probe D that glues the
/// half-written `|9|10|` row to whatever the model wrote after it.
pub fn run_probe(
    id: ProbeId,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
) -> Result<ProbeTranscript, EvalError> {
    let prompt = probe_prompt(id);
    let response = backend.complete(&params.request(prompt.clone()))?;

    let grid = prompt
        .split_once("\n\n")
        .map(|(_, grid)| grid)
        .unwrap_or(&prompt);
    let parsed_text = format!("{grid}{}", response.text);

    let (table, violations) = match parse_table(&parsed_text, &probe_scheme()) {
        Ok((table, _rest)) => {
            let violations = validate_structure(&table);
            (Some(table), violations)
        }
        Err(_) => (None, Vec::new()),
    };

    Ok(ProbeTranscript {
        id,
        prompt,
        completion: response.text,
        parsed_text,
        table,
        violations,
    })
}
