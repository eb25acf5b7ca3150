//! Table schemes: the ordered column lists that drive table generation.
//!
//! A scheme renders as a single `|`-delimited header line, e.g.
//! `|step|subquestion|process|result|`. Placed at the end of a prompt, the
//! header both asks the model to reason step by step and dictates the shape
//! of the table it fills in. Schemes come in three flavours: general-purpose
//! ones that work across tasks, domain-specific ones phrased for a family of
//! tasks (state tracking, string manipulation), and task-specific ones whose
//! columns name the entities of a single task.

use serde::Serialize;
use thiserror::Error;

/// How widely applicable a scheme is meant to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeCategory {
    /// Works across tasks (e.g. `|step|subquestion|process|result|`).
    General,
    /// Phrased for a family of tasks, such as state-tracking puzzles.
    DomainSpecific,
    /// Columns name the entities of one specific task.
    TaskSpecific,
}

/// Errors from scheme construction and parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    /// A scheme must have at least one column.
    #[error("scheme must have at least one column")]
    NoColumns,
    /// Column names must be non-empty after trimming.
    #[error("column name is empty")]
    EmptyColumnName,
    /// Column names may not contain `|` or newlines, which would corrupt the
    /// rendered header.
    #[error("column name {0:?} contains a reserved character")]
    ReservedCharacter(String),
    /// Duplicate column names are forbidden: `validate_structure` and cell
    /// lookup address cells by column name, which requires names to be unique.
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    /// The text handed to [`parse_scheme`] is not a well-formed header line.
    #[error("malformed header line {0:?}")]
    MalformedHeader(String),
    /// [`TableScheme::ablate`] was asked to drop a column the scheme lacks.
    #[error("column {0:?} is not part of the scheme")]
    UnknownColumn(String),
    /// Dropping a column would leave the scheme empty.
    #[error("cannot drop a column from a single-column scheme")]
    TooFewColumns,
}

/// An ordered, non-empty list of column names plus identification metadata.
///
/// Two schemes are equal iff their column lists are equal: the rendered
/// header is what the model sees, so the header is the scheme's identity.
/// The `id` and `category` are bookkeeping for catalogs, CLI flags and
/// reports.
#[derive(Debug, Clone, Serialize)]
pub struct TableScheme {
    id: String,
    columns: Vec<String>,
    category: SchemeCategory,
}

impl PartialEq for TableScheme {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
    }
}

impl Eq for TableScheme {}

impl TableScheme {
    /// Builds a scheme, validating the column names.
    ///
    /// Names are trimmed; they must be non-empty, unique, and free of `|`
    /// and newlines.
    pub fn new(
        id: impl Into<String>,
        columns: &[&str],
        category: SchemeCategory,
    ) -> Result<Self, SchemeError> {
        if columns.is_empty() {
            return Err(SchemeError::NoColumns);
        }
        let mut cleaned = Vec::with_capacity(columns.len());
        for raw in columns {
            let name = raw.trim();
            if name.is_empty() {
                return Err(SchemeError::EmptyColumnName);
            }
            if name.contains('|') || name.contains('\n') || name.contains('\r') {
                return Err(SchemeError::ReservedCharacter(name.to_string()));
            }
            if cleaned.iter().any(|c| c == name) {
                return Err(SchemeError::DuplicateColumn(name.to_string()));
            }
            cleaned.push(name.to_string());
        }
        Ok(TableScheme {
            id: id.into(),
            columns: cleaned,
            category,
        })
    }

    /// Short identifier used in CLI flags and reports, e.g. `"main"`.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The ordered column names.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn category(&self) -> SchemeCategory {
        self.category
    }

    /// Renders the header line: columns joined with `|`, wrapped in `|`,
    /// no trailing newline.
    ///
    /// ```
    /// use tabcot::scheme::builtin_scheme;
    ///
    /// let main = builtin_scheme("main").unwrap();
    /// assert_eq!(main.render_header(), "|step|subquestion|process|result|");
    /// ```
    pub fn render_header(&self) -> String {
        format!("|{}|", self.columns.join("|"))
    }

    /// Returns a copy with one named column removed, for column ablations.
    ///
    /// The id of the result is the original id suffixed with `-drop-<name>`.
    pub fn ablate(&self, drop: &str) -> Result<TableScheme, SchemeError> {
        if !self.columns.iter().any(|c| c == drop) {
            return Err(SchemeError::UnknownColumn(drop.to_string()));
        }
        if self.columns.len() < 2 {
            return Err(SchemeError::TooFewColumns);
        }
        Ok(TableScheme {
            id: format!("{}-drop-{}", self.id, drop),
            columns: self
                .columns
                .iter()
                .filter(|c| c.as_str() != drop)
                .cloned()
                .collect(),
            category: self.category,
        })
    }
}

/// Parses a rendered header line back into a scheme.
///
/// The input must be a single line of the form `|a|b|c|`; cells are trimmed
/// and must be non-empty. The resulting scheme has a synthesized id (column
/// names joined with `-`, spaces replaced by `-`) and category
/// [`SchemeCategory::General`].
pub fn parse_scheme(header: &str) -> Result<TableScheme, SchemeError> {
    let line = header.trim();
    if line.contains('\n') {
        return Err(SchemeError::MalformedHeader(header.to_string()));
    }
    let interior = line
        .strip_prefix('|')
        .and_then(|rest| rest.strip_suffix('|'))
        .ok_or_else(|| SchemeError::MalformedHeader(header.to_string()))?;
    let columns: Vec<&str> = interior.split('|').map(str::trim).collect();
    if columns.iter().any(|c| c.is_empty()) {
        return Err(SchemeError::MalformedHeader(header.to_string()));
    }
    let id = columns
        .iter()
        .map(|c| c.replace(' ', "-"))
        .collect::<Vec<_>>()
        .join("-");
    TableScheme::new(id, &columns, SchemeCategory::General)
}

/// The builtin scheme catalog.
///
/// Contains the main general-purpose scheme, the two alternates used as
/// voting partners, the four single-column ablations of the main scheme, and
/// the domain- and task-specific schemes for the two symbolic tasks (coin
/// flipping and last-letter concatenation).
pub fn builtin_catalog() -> Vec<TableScheme> {
    let main = TableScheme::new(
        "main",
        &["step", "subquestion", "process", "result"],
        SchemeCategory::General,
    )
    .expect("builtin scheme is valid");
    let mut catalog = vec![
        main.clone(),
        TableScheme::new(
            "vote-2",
            &["step", "subquestion", "procedure", "result"],
            SchemeCategory::General,
        )
        .expect("builtin scheme is valid"),
        TableScheme::new(
            "vote-3",
            &["step", "question", "response"],
            SchemeCategory::General,
        )
        .expect("builtin scheme is valid"),
    ];
    for column in ["step", "subquestion", "process", "result"] {
        catalog.push(main.ablate(column).expect("main has this column"));
    }
    catalog.push(
        TableScheme::new(
            "coinflip-domain",
            &["step", "initial state", "action", "next state"],
            SchemeCategory::DomainSpecific,
        )
        .expect("builtin scheme is valid"),
    );
    catalog.push(
        TableScheme::new(
            "coinflip-task",
            &["step", "name", "flip or not", "result"],
            SchemeCategory::TaskSpecific,
        )
        .expect("builtin scheme is valid"),
    );
    catalog.push(
        TableScheme::new(
            "lastletter-domain",
            &["step", "original answer", "action", "updated answer"],
            SchemeCategory::DomainSpecific,
        )
        .expect("builtin scheme is valid"),
    );
    catalog.push(
        TableScheme::new(
            "lastletter-task",
            &["step", "word", "last letter", "answer"],
            SchemeCategory::TaskSpecific,
        )
        .expect("builtin scheme is valid"),
    );
    catalog
}

/// Looks a scheme up in the builtin catalog by id.
pub fn builtin_scheme(id: &str) -> Option<TableScheme> {
    builtin_catalog().into_iter().find(|s| s.id() == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn main_scheme_renders_reference_header() {
        let main = builtin_scheme("main").unwrap();
        assert_eq!(main.render_header(), "|step|subquestion|process|result|");
        assert_eq!(main.category(), SchemeCategory::General);
    }

    #[test]
    fn catalog_headers_are_exact() {
        let expected = [
            ("main", "|step|subquestion|process|result|"),
            ("vote-2", "|step|subquestion|procedure|result|"),
            ("vote-3", "|step|question|response|"),
            ("main-drop-step", "|subquestion|process|result|"),
            ("main-drop-subquestion", "|step|process|result|"),
            ("main-drop-process", "|step|subquestion|result|"),
            ("main-drop-result", "|step|subquestion|process|"),
            ("coinflip-domain", "|step|initial state|action|next state|"),
            ("coinflip-task", "|step|name|flip or not|result|"),
            ("lastletter-domain", "|step|original answer|action|updated answer|"),
            ("lastletter-task", "|step|word|last letter|answer|"),
        ];
        let catalog = builtin_catalog();
        assert_eq!(catalog.len(), expected.len());
        for (scheme, (id, header)) in catalog.iter().zip(expected) {
            assert_eq!(scheme.id(), id);
            assert_eq!(scheme.render_header(), header);
        }
    }

    #[test]
    fn catalog_entries_are_distinct() {
        let catalog = builtin_catalog();
        for (i, a) in catalog.iter().enumerate() {
            for b in &catalog[i + 1..] {
                assert_ne!(a.id(), b.id());
                assert_ne!(a.render_header(), b.render_header());
            }
        }
    }

    #[test]
    fn equality_is_by_columns_not_id() {
        let a = TableScheme::new("a", &["step", "result"], SchemeCategory::General).unwrap();
        let b = TableScheme::new("b", &["step", "result"], SchemeCategory::TaskSpecific).unwrap();
        let c = TableScheme::new("a", &["result", "step"], SchemeCategory::General).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn construction_rejects_bad_columns() {
        let cat = SchemeCategory::General;
        assert_eq!(TableScheme::new("x", &[], cat), Err(SchemeError::NoColumns));
        assert_eq!(
            TableScheme::new("x", &["a", "  "], cat),
            Err(SchemeError::EmptyColumnName)
        );
        assert_eq!(
            TableScheme::new("x", &["a|b"], cat),
            Err(SchemeError::ReservedCharacter("a|b".into()))
        );
        assert_eq!(
            TableScheme::new("x", &["a", "a"], cat),
            Err(SchemeError::DuplicateColumn("a".into()))
        );
    }

    #[test]
    fn parse_scheme_round_trips_catalog() {
        for scheme in builtin_catalog() {
            let parsed = parse_scheme(&scheme.render_header()).unwrap();
            assert_eq!(parsed, scheme);
        }
    }

    #[test]
    fn parse_scheme_rejects_malformed_headers() {
        for bad in ["", "|", "||", "step|result", "|step|result", "|a||b|", "|a|\n|b|"] {
            assert!(parse_scheme(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn ablate_removes_one_column_and_tags_id() {
        let main = builtin_scheme("main").unwrap();
        let dropped = main.ablate("process").unwrap();
        assert_eq!(dropped.id(), "main-drop-process");
        assert_eq!(dropped.render_header(), "|step|subquestion|result|");
        assert_eq!(
            main.ablate("answer"),
            Err(SchemeError::UnknownColumn("answer".into()))
        );
        let single = TableScheme::new("s", &["step"], SchemeCategory::General).unwrap();
        assert_eq!(single.ablate("step"), Err(SchemeError::TooFewColumns));
    }

    /// Column names that survive trimming unchanged and contain no reserved
    /// characters, so render/parse is lossless.
    fn column_name() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9 ]{0,10}[a-z0-9]|[a-z]".prop_filter("trim-stable", |s| s.trim() == s)
    }

    proptest! {
        #[test]
        fn parse_inverts_render(names in proptest::collection::vec(column_name(), 1..6)) {
            let mut unique = names.clone();
            unique.sort();
            unique.dedup();
            prop_assume!(unique.len() == names.len());
            let cols: Vec<&str> = names.iter().map(String::as_str).collect();
            let scheme = TableScheme::new("prop", &cols, SchemeCategory::General).unwrap();
            let parsed = parse_scheme(&scheme.render_header()).unwrap();
            prop_assert_eq!(parsed, scheme);
        }

        #[test]
        fn ablation_always_shrinks_by_one(drop_idx in 0usize..4) {
            let main = builtin_scheme("main").unwrap();
            let name = main.columns()[drop_idx].clone();
            let ablated = main.ablate(&name).unwrap();
            prop_assert_eq!(ablated.columns().len(), main.columns().len() - 1);
            prop_assert!(!ablated.columns().contains(&name));
        }
    }
}
