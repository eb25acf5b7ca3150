//! Typed answer extraction from stage-two completions.
//!
//! After the model reads its own table back, the completion continues a
//! suffix like "Therefore, the answer (arabic numerals) is" with a short
//! phrase containing the answer. Extraction finds the first token of the
//! expected type in that phrase:
//!
//! * **Numeral** — the earliest numeral token, longest match at that
//!   position. Tokens allow an optional single leading `$` or `-`, digits
//!   either plain (`16800`) or comma-grouped (`16,800`), and an optional
//!   decimal fraction. Values compare as exact decimals: `16,800`, `$16800`
//!   and `16800.00` are all the same answer, and no binary floating point is
//!   involved anywhere.
//! * **Multiple choice** — the first standalone capital `A`–`E` (standalone:
//!   no letter immediately before or after).
//! * **Yes/no** — the first whole-word `yes` or `no`, case-insensitive.
//! * **Text** — the first double-quoted span; if none, the remainder of the
//!   line after `answer is`, trimmed.
//!
//! Gold labels go through [`normalize_gold`], which reuses the same token
//! grammar so that predictions and golds meet on identical terms.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// The four answer shapes a task can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerType {
    Numeral,
    MultipleChoice,
    YesNo,
    Text,
}

impl fmt::Display for AnswerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AnswerType::Numeral => "numeral",
            AnswerType::MultipleChoice => "multiple-choice",
            AnswerType::YesNo => "yes-no",
            AnswerType::Text => "text",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for AnswerType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "numeral" | "number" | "numeric" => Ok(AnswerType::Numeral),
            "multiplechoice" | "choice" | "mc" => Ok(AnswerType::MultipleChoice),
            "yesno" => Ok(AnswerType::YesNo),
            "text" | "string" => Ok(AnswerType::Text),
            _ => Err(format!("unknown answer type {s:?}")),
        }
    }
}

/// Errors from extraction and gold normalization.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    /// The completion contains no token of the expected type.
    #[error("no {0} answer found in completion")]
    NotFound(AnswerType),
    /// A gold label failed to normalize under its dataset's answer type.
    #[error("gold label {gold:?} does not contain a {answer_type} answer")]
    MalformedGold { gold: String, answer_type: AnswerType },
    /// Two answers of different kinds were compared.
    #[error("cannot compare {0} against {1}")]
    KindMismatch(AnswerType, AnswerType),
}

/// An exact decimal number: sign, integer digits, fraction digits.
///
/// Normalized on construction — no leading zeros in the integer part, no
/// trailing zeros in the fraction, no negative zero — so equality is numeric
/// identity: `42`, `042` and `42.0` are one value. Deliberately not a binary
/// float; `16800.1` is exactly `16800.1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    negative: bool,
    int_digits: String,
    frac_digits: String,
}

impl Decimal {
    /// Builds a decimal from raw digit strings, normalizing as described
    /// above. Empty `int_digits` is read as `0`.
    fn from_digits(negative: bool, int_digits: &str, frac_digits: &str) -> Decimal {
        debug_assert!(int_digits.chars().all(|c| c.is_ascii_digit()));
        debug_assert!(frac_digits.chars().all(|c| c.is_ascii_digit()));
        let int_digits = int_digits.trim_start_matches('0');
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let frac_digits = frac_digits.trim_end_matches('0');
        let is_zero = int_digits == "0" && frac_digits.is_empty();
        Decimal {
            negative: negative && !is_zero,
            int_digits: int_digits.to_string(),
            frac_digits: frac_digits.to_string(),
        }
    }

    /// Parses a string that is entirely one numeral token (leading `$` or
    /// `-` allowed, comma grouping allowed). Returns `None` otherwise.
    pub fn parse(s: &str) -> Option<Decimal> {
        let len = longest_numeral_at(s.as_bytes(), 0)?;
        if len != s.len() {
            return None;
        }
        Some(decimal_from_token(s))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        f.write_str(&self.int_digits)?;
        if !self.frac_digits.is_empty() {
            write!(f, ".{}", self.frac_digits)?;
        }
        Ok(())
    }
}

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// A typed answer value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AnswerValue {
    Numeral(Decimal),
    /// A capital letter `A`..`E`.
    Choice(char),
    /// `true` for yes.
    YesNo(bool),
    Text(String),
}

impl AnswerValue {
    pub fn answer_type(&self) -> AnswerType {
        match self {
            AnswerValue::Numeral(_) => AnswerType::Numeral,
            AnswerValue::Choice(_) => AnswerType::MultipleChoice,
            AnswerValue::YesNo(_) => AnswerType::YesNo,
            AnswerValue::Text(_) => AnswerType::Text,
        }
    }

    /// Match-equality between two values of the same kind: numerals compare
    /// as exact decimals, letters and booleans literally, text
    /// case-insensitively after trimming. Values of different kinds never
    /// match.
    pub fn matches(&self, other: &AnswerValue) -> bool {
        match (self, other) {
            (AnswerValue::Numeral(a), AnswerValue::Numeral(b)) => a == b,
            (AnswerValue::Choice(a), AnswerValue::Choice(b)) => a == b,
            (AnswerValue::YesNo(a), AnswerValue::YesNo(b)) => a == b,
            (AnswerValue::Text(a), AnswerValue::Text(b)) => {
                a.trim().eq_ignore_ascii_case(b.trim())
            }
            _ => false,
        }
    }
}

impl fmt::Display for AnswerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerValue::Numeral(d) => d.fmt(f),
            AnswerValue::Choice(c) => write!(f, "{c}"),
            AnswerValue::YesNo(b) => f.write_str(if *b { "yes" } else { "no" }),
            AnswerValue::Text(t) => f.write_str(t),
        }
    }
}

/// An extracted answer: the value plus the byte span it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedAnswer {
    pub value: AnswerValue,
    /// Half-open byte range of the matched token in the source text.
    pub span: (usize, usize),
}

/// Extracts the first answer of `answer_type` from a completion.
///
/// ```
/// use tabcot::extract::{extract_answer, AnswerType, AnswerValue, Decimal};
///
/// let hit = extract_answer(" $16,800.", AnswerType::Numeral).unwrap();
/// assert_eq!(hit.value, AnswerValue::Numeral(Decimal::parse("16800").unwrap()));
/// ```
pub fn extract_answer(
    completion: &str,
    answer_type: AnswerType,
) -> Result<ExtractedAnswer, ExtractError> {
    let found = match answer_type {
        AnswerType::Numeral => scan_numeral(completion),
        AnswerType::MultipleChoice => scan_choice(completion),
        AnswerType::YesNo => scan_yes_no(completion),
        AnswerType::Text => scan_text(completion),
    };
    found.ok_or(ExtractError::NotFound(answer_type))
}

/// Normalizes a gold label into the same representation extraction produces.
///
/// Numeral, choice and yes/no golds are scanned with the exact token grammar
/// used on completions. Text golds are taken whole: trimmed of whitespace
/// and surrounding double quotes (datasets store the bare string, with no
/// carrier sentence to scan).
pub fn normalize_gold(gold: &str, answer_type: AnswerType) -> Result<ExtractedAnswer, ExtractError> {
    let malformed = || ExtractError::MalformedGold {
        gold: gold.to_string(),
        answer_type,
    };
    match answer_type {
        AnswerType::Numeral | AnswerType::MultipleChoice | AnswerType::YesNo => {
            extract_answer(gold, answer_type).map_err(|_| malformed())
        }
        AnswerType::Text => {
            let trimmed = gold.trim().trim_matches('"').trim();
            if trimmed.is_empty() {
                return Err(malformed());
            }
            let start = gold.find(trimmed).unwrap_or(0);
            Ok(ExtractedAnswer {
                value: AnswerValue::Text(trimmed.to_string()),
                span: (start, start + trimmed.len()),
            })
        }
    }
}

/// Compares a prediction against a normalized gold under match-equality.
///
/// Errors with [`ExtractError::KindMismatch`] when the two answers are of
/// different kinds; that is a harness bug, not a wrong answer.
pub fn answers_match(
    predicted: &ExtractedAnswer,
    gold: &ExtractedAnswer,
) -> Result<bool, ExtractError> {
    let (pt, gt) = (predicted.value.answer_type(), gold.value.answer_type());
    if pt != gt {
        return Err(ExtractError::KindMismatch(pt, gt));
    }
    Ok(predicted.value.matches(&gold.value))
}

// --- numeral scanning ---------------------------------------------------

/// Length of the longest numeral token starting exactly at `start`, if any.
///
/// Token grammar (ASCII): optional single `$` or `-`, then digits — either a
/// plain run, or comma-grouped as one to three digits followed by one or
/// more `,ddd` groups — then an optional `.` plus a digit run. Because the
/// grammar is self-contained, the longest valid prefix at a position is
/// found by direct construction, with no lookahead beyond the token.
fn longest_numeral_at(bytes: &[u8], start: usize) -> Option<usize> {
    let mut i = start;
    if i < bytes.len() && (bytes[i] == b'$' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_at = |mut j: usize| {
        let from = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j - from
    };
    let d = digits_at(i);
    if d == 0 {
        return None;
    }
    // Comma grouping is only reachable when the whole leading digit run is a
    // legal first group (1-3 digits) and a `,ddd` group follows immediately;
    // a longer run would put a digit, not a comma, after the first group.
    let mut end = i + d;
    if d <= 3 {
        let mut j = i + d;
        while j + 3 < bytes.len()
            && bytes[j] == b','
            && bytes[j + 1..=j + 3].iter().all(u8::is_ascii_digit)
        {
            j += 4;
        }
        if j > i + d {
            end = j; // grouped form is strictly longer than the plain run
        }
    }
    if bytes.get(end) == Some(&b'.') {
        let frac = digits_at(end + 1);
        if frac > 0 {
            end += 1 + frac;
        }
    }
    Some(end - start)
}

/// Converts a token matched by [`longest_numeral_at`] into a [`Decimal`].
fn decimal_from_token(token: &str) -> Decimal {
    let token = token.strip_prefix('$').unwrap_or(token);
    let (negative, token) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    let (int_part, frac_part) = match token.split_once('.') {
        Some((i, f)) => (i, f),
        None => (token, ""),
    };
    let int_digits: String = int_part.chars().filter(|c| *c != ',').collect();
    Decimal::from_digits(negative, &int_digits, frac_part)
}

fn scan_numeral(text: &str) -> Option<ExtractedAnswer> {
    let bytes = text.as_bytes();
    for start in 0..bytes.len() {
        if let Some(len) = longest_numeral_at(bytes, start) {
            let token = &text[start..start + len];
            return Some(ExtractedAnswer {
                value: AnswerValue::Numeral(decimal_from_token(token)),
                span: (start, start + len),
            });
        }
    }
    None
}

// --- choice / yes-no / text scanning --------------------------------------

/// First standalone capital `A`..`E`: not preceded or followed by another
/// letter. Digits and punctuation do not disqualify, so `B.`, `(B)` and
/// `B2` all yield `B`; lowercase letters never match.
fn scan_choice(text: &str) -> Option<ExtractedAnswer> {
    let mut prev: Option<char> = None;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        let next = iter.peek().map(|(_, n)| *n);
        if ('A'..='E').contains(&c)
            && !prev.is_some_and(char::is_alphabetic)
            && !next.is_some_and(char::is_alphabetic)
        {
            return Some(ExtractedAnswer {
                value: AnswerValue::Choice(c),
                span: (i, i + c.len_utf8()),
            });
        }
        prev = Some(c);
    }
    None
}

/// First whole-word `yes` or `no`, case-insensitive: the characters before
/// and after the word (when present) must not be letters.
fn scan_yes_no(text: &str) -> Option<ExtractedAnswer> {
    let mut prev: Option<char> = None;
    for (i, c) in text.char_indices() {
        let boundary_before = !prev.is_some_and(char::is_alphabetic);
        prev = Some(c);
        if !boundary_before {
            continue;
        }
        let rest = &text[i..];
        for (word, value) in [("yes", true), ("no", false)] {
            if rest.len() >= word.len()
                && rest.is_char_boundary(word.len())
                && rest[..word.len()].eq_ignore_ascii_case(word)
            {
                let after = rest[word.len()..].chars().next();
                if !after.is_some_and(char::is_alphabetic) {
                    return Some(ExtractedAnswer {
                        value: AnswerValue::YesNo(value),
                        span: (i, i + word.len()),
                    });
                }
            }
        }
    }
    None
}

/// First double-quoted span (the value excludes the quotes, the span
/// includes them); otherwise the remainder of the line after `answer is`
/// (case-insensitive), trimmed.
fn scan_text(text: &str) -> Option<ExtractedAnswer> {
    if let Some(open) = text.find('"') {
        if let Some(close_rel) = text[open + 1..].find('"') {
            let close = open + 1 + close_rel;
            return Some(ExtractedAnswer {
                value: AnswerValue::Text(text[open + 1..close].to_string()),
                span: (open, close + 1),
            });
        }
    }
    const MARKER: &[u8] = b"answer is";
    // ASCII case-insensitive search over bytes: the marker is pure ASCII, so
    // a byte-window match is also a valid char-boundary match.
    let bytes = text.as_bytes();
    let last = bytes.len().checked_sub(MARKER.len())?;
    let at = (0..=last).find(|&i| bytes[i..i + MARKER.len()].eq_ignore_ascii_case(MARKER))?;
    let tail_start = at + MARKER.len();
    let line_end = text[tail_start..]
        .find('\n')
        .map(|o| tail_start + o)
        .unwrap_or(text.len());
    let value = text[tail_start..line_end].trim();
    if value.is_empty() {
        return None;
    }
    let start = tail_start + text[tail_start..line_end].find(value).unwrap_or(0);
    Some(ExtractedAnswer {
        value: AnswerValue::Text(value.to_string()),
        span: (start, start + value.len()),
    })
}
