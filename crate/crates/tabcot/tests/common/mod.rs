//! Shared fixtures and reference oracles for the integration tests.
//!
//! Everything here is deliberately independent of the library internals it
//! checks: the extraction oracles re-derive answers by brute force, the
//! vote oracle enumerates pairs, and the recorded desk transcripts carry
//! hand-computed correctness labels.

#![allow(dead_code)]

use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;

use tabcot::backend::{
    CompletionRequest, CompletionResponse, FinishReason, FixtureStore,
};
use tabcot::dataset::{load_dataset_str, DatasetManifest, QuestionRecord};
use tabcot::eval::{render_question, CompletionParams};
use tabcot::extract::AnswerType;
use tabcot::prompt::{
    build_extraction_prompt, build_generation_prompt, extraction_template, Exemplar,
};
use tabcot::scheme::{builtin_scheme, parse_scheme, TableScheme};
use tabcot::table::{parse_table, ReasoningTable};

// --- recorded completions --------------------------------------------------

/// Records one (request, completion) pair into a fixture store.
pub fn record(store: &FixtureStore, request: &CompletionRequest, text: &str) {
    let response = CompletionResponse {
        text: text.to_string(),
        finish_reason: FinishReason::Stop,
        token_usage: None,
    };
    store.record(request, &response).expect("record fixture");
}

/// Records both stages of the pipeline for one question under the default
/// request parameters, deriving the stage-two prompt the same way the
/// harness does: from the parsed table's verbatim span when the completion
/// contains a table, otherwise from the full completion text.
pub fn record_two_stage(
    store: &FixtureStore,
    question: &str,
    scheme: &TableScheme,
    exemplars: &[Exemplar],
    answer_type: AnswerType,
    table_completion: &str,
    answer_completion: &str,
) {
    let params = CompletionParams::default();
    let generation_prompt = build_generation_prompt(question, scheme, exemplars);
    record(store, &params.request(generation_prompt.clone()), table_completion);

    let table_text = match parse_table(table_completion, scheme) {
        Ok((table, _rest)) => table.raw().to_string(),
        Err(_) => table_completion.to_string(),
    };
    let template = extraction_template(answer_type);
    let extraction_prompt = build_extraction_prompt(&generation_prompt, &table_text, &template);
    record(store, &params.request(extraction_prompt), answer_completion);
}

// --- the reference two-column walkthrough ----------------------------------

pub const REFERENCE_QUESTION: &str = "a=2, b=3, what is 2*a+3*b?";

/// Stage-one completion for the reference question: alignment separator,
/// then four two-cell rows ending in the final result 13.
pub const REFERENCE_TABLE_COMPLETION: &str =
    "|:---|:---|\n|1|2*a+3*b|\n|2|2*2+3*3|\n|3|4+9|\n|4|13|";

pub const REFERENCE_ANSWER_COMPLETION: &str = "13.";

pub fn reference_scheme() -> TableScheme {
    parse_scheme("|step|solution|").expect("two-column scheme parses")
}

/// A store holding both recorded stages for the reference question.
pub fn reference_store() -> FixtureStore {
    let store = FixtureStore::in_memory();
    record_two_stage(
        &store,
        REFERENCE_QUESTION,
        &reference_scheme(),
        &[],
        AnswerType::Numeral,
        REFERENCE_TABLE_COMPLETION,
        REFERENCE_ANSWER_COMPLETION,
    );
    store
}

// --- the ten-question desk set ----------------------------------------------

/// The desk dataset shipped with the crate, embedded for tests.
pub const DESK_DATASET: &str = include_str!("../../fixtures/datasets/desk-numeral.jsonl");

/// Hand-written completions for one desk question.
pub struct DeskTranscript {
    pub id: &'static str,
    pub table_completion: String,
    pub answer_completion: &'static str,
    /// Whether the transcript's final answer matches the gold label,
    /// decided by hand when the transcript was written.
    pub correct: bool,
}

fn transcript(
    id: &'static str,
    rows: &[&str],
    conclusion: Option<&str>,
    answer_completion: &'static str,
    correct: bool,
) -> DeskTranscript {
    let mut table_completion = String::from("|---|---|---|---|\n");
    for row in rows {
        table_completion.push_str(row);
        table_completion.push('\n');
    }
    if let Some(line) = conclusion {
        table_completion.push_str(line);
        table_completion.push('\n');
    }
    DeskTranscript {
        id,
        table_completion,
        answer_completion,
        correct,
    }
}

/// The ten transcripts: seven answer correctly, three famously do not
/// (distracted by redundant information in the question).
pub fn desk_transcripts() -> Vec<DeskTranscript> {
    vec![
        transcript(
            "gretchen-coins",
            &[
                "|1|How many gold coins does Gretchen have?|30 more gold coins than silver coins|70 gold coins|",
                "|2|How many silver coins does Gretchen have?|30 more gold coins than silver coins|40 silver coins|",
                "|3|How many coins does Gretchen have in total?|70 gold coins + 40 silver coins|110 coins|",
            ],
            Some("Therefore, the answer (arabic numerals) is 110."),
            "110.",
            true,
        ),
        transcript(
            "adam-candy",
            &[
                "|1|How many pieces of chocolate candy did Adam buy?|2 boxes x 4 pieces per box|8 pieces|",
                "|2|How many pieces of caramel candy did Adam buy?|5 boxes x 4 pieces per box|20 pieces|",
                "|3|How many pieces of candy did Adam buy?|8 pieces + 20 pieces|28 pieces|",
            ],
            None,
            "28.",
            true,
        ),
        transcript(
            "pet-store-cages",
            &[
                "|1|How many puppies are left?|102 - 21 = 81|81|",
                "|2|How many puppies are in each cage?|9|9|",
                "|3|How many cages are needed?|81 / 9 = 9|9|",
            ],
            None,
            "9.",
            true,
        ),
        transcript(
            "four-birds",
            &[
                "|1|How old is Sally Four?|8 years|8 years|",
                "|2|How old is Sally Thirtytwo?|8 years|8 years|",
                "|3|How old is Granny Red?|8 years / 2 = 4 years|4 years|",
                "|4|How old is Sally Two?|4 years + 3 years = 7 years|7 years|",
                "|5|What's the total age of the four birds?|8 years + 8 years + 4 years + 7 years = 27 years|27 years|",
            ],
            None,
            "27.",
            true,
        ),
        transcript(
            "bakery-loaves",
            &[
                "|1|How many loaves of bread are produced each day?|60 loaves|60 loaves|",
                "|2|How many loaves of bread are sold in the morning?|2/3 * 60 loaves = 40 loaves|40 loaves|",
                "|3|How many loaves of bread are left?|60 loaves - 40 loaves = 20 loaves|20 loaves|",
                "|4|How many loaves of bread are sold in the afternoon and evening?|20 loaves|20 loaves|",
                "|5|How many loaves of bread are sold in the afternoon?|20 loaves / 2 = 10 loaves|10 loaves|",
            ],
            None,
            "10.",
            true,
        ),
        transcript(
            "grove-trees",
            &[
                "|1|How many trees are in the grove?|15|15|",
                "|2|How many trees will be in the grove after the workers are done?|21|21|",
                "|3|How many trees did the workers plant?|21 - 15|6|",
            ],
            None,
            "6.",
            true,
        ),
        transcript(
            "olivia-bagels",
            &[
                "|1|How much money does Olivia have?|$23|$23|",
                "|2|How much does each bagel cost?|$3|$3|",
                "|3|How many bagels did she buy?|5|5|",
                "|4|How much money did she spend on bagels?|$3 * 5|$15|",
                "|5|How much money does she have left?|$23 - $15|$8|",
            ],
            None,
            "$8.",
            true,
        ),
        // Wrong: treats the shorts as a toy and sums all three purchases.
        transcript(
            "tom-toys",
            &[
                "|1|How much did Tom spend on a skateboard?|$9.46|$9.46|",
                "|2|How much did Tom spend on marbles?|$9.56|$9.56|",
                "|3|How much did Tom spend on shorts?|$14.50|$14.50|",
                "|4|How much did Tom spend on toys?|$9.46 + $9.56 + $14.50|$33.52|",
            ],
            Some("Therefore, the answer (arabic numerals) is $33.52."),
            "$33.52.",
            false,
        ),
        // Wrong: subtracts the cracked shells although they were still found.
        transcript(
            "seashells",
            &[
                "|1|How many seashells did Tom find?|15|15|",
                "|2|How many seashells did Fred find?|43|43|",
                "|3|How many seashells were cracked?|29|29|",
                "|4|How many seashells did they find together?|15 + 43|58|",
                "|5|How many seashells did they keep?|58 - 29|29|",
            ],
            Some("Therefore, the answer (arabic numerals) is 29."),
            "29.",
            false,
        ),
        // Wrong: drags the mouse into a question that never needed it.
        transcript(
            "grasshopper-jump",
            &[
                "|1|How far did the grasshopper jump?|19|19|",
                "|2|How far did the grasshopper jump farther than the frog?|4|4|",
                "|3|How far did the mouse jump lesser than the frog?|44|44|",
                "|4|How far did the frog jump?|19 - 4|15|",
                "|5|How far did the frog jump?|19 + 44|63|",
                "|6|How far did the frog jump?|63 - 15|48|",
            ],
            Some("Therefore, the answer (arabic numerals) is 48."),
            "48.",
            false,
        ),
    ]
}

/// How many desk transcripts answer correctly.
pub fn desk_expected_correct() -> usize {
    desk_transcripts().iter().filter(|t| t.correct).count()
}

pub fn desk_manifest() -> DatasetManifest {
    DatasetManifest::new("desk-numeral", 10, AnswerType::Numeral).expect("ad-hoc manifest")
}

pub fn desk_records() -> Vec<QuestionRecord> {
    load_dataset_str(DESK_DATASET, &desk_manifest())
        .expect("desk dataset loads")
        .records
}

/// Records both stages for every desk question into `store`, under the main
/// scheme, zero-shot, with the default request parameters.
pub fn populate_desk_store(store: &FixtureStore) {
    let scheme = builtin_scheme("main").expect("main scheme exists");
    let records = desk_records();
    for t in desk_transcripts() {
        let rec = records
            .iter()
            .find(|r| r.id == t.id)
            .unwrap_or_else(|| panic!("transcript {} has no dataset record", t.id));
        record_two_stage(
            store,
            &render_question(rec),
            &scheme,
            &[],
            AnswerType::Numeral,
            &t.table_completion,
            t.answer_completion,
        );
    }
}

/// An in-memory store with all twenty desk completions recorded.
pub fn desk_store() -> FixtureStore {
    let store = FixtureStore::in_memory();
    populate_desk_store(&store);
    store
}

// --- random rectangular tables ----------------------------------------------

const WORD_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
const FILL_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789 +*/=$.,()-:";

/// A random cell that survives serialization: no `|` or newline, non-empty,
/// and trim-stable because the first and last characters are alphanumeric
/// (which also keeps it from ever looking like `---` filler).
pub fn random_cell(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(1..=10);
    (0..len)
        .map(|i| {
            let pool = if i == 0 || i + 1 == len { WORD_CHARS } else { FILL_CHARS };
            pool[rng.gen_range(0..pool.len())] as char
        })
        .collect()
}

fn random_word(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| WORD_CHARS[rng.gen_range(0..WORD_CHARS.len())] as char)
        .collect()
}

/// A random rectangular table with 1..=6 columns and 0..=8 rows. Column
/// names get an index suffix so they are pairwise distinct, and the first
/// row is nudged when it happens to equal the header, so a serialized copy
/// never contains an accidental header echo.
pub fn random_table(rng: &mut impl Rng) -> ReasoningTable {
    let n_cols = rng.gen_range(1..=6);
    let n_rows = rng.gen_range(0..=8);
    let columns: Vec<String> = (0..n_cols)
        .map(|i| format!("{}{}", random_word(rng, 5), i))
        .collect();
    let mut rows: Vec<Vec<String>> = (0..n_rows)
        .map(|_| (0..n_cols).map(|_| random_cell(rng)).collect())
        .collect();
    if let Some(first) = rows.first_mut() {
        if *first == columns {
            first[0].push('z');
        }
    }
    ReasoningTable::from_parts(columns, rows).expect("generated table is well-formed")
}

/// The scheme a generated table would have been parsed under.
pub fn scheme_of(table: &ReasoningTable) -> TableScheme {
    let columns: Vec<&str> = table.columns().iter().map(String::as_str).collect();
    TableScheme::new("random", &columns, tabcot::scheme::SchemeCategory::General)
        .expect("generated columns form a valid scheme")
}

// --- voting oracle -----------------------------------------------------------

/// Reference voting rule, written as plain pair enumeration: the first
/// agreeing pair (in the order 0-1, 0-2, 1-2) elects its first member;
/// without any agreeing pair the first scheme wins. `None` agrees with
/// nothing.
pub fn naive_vote<T: PartialEq>(answers: [Option<&T>; 3]) -> usize {
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        if let (Some(x), Some(y)) = (answers[a], answers[b]) {
            if x == y {
                return a;
            }
        }
    }
    0
}

// --- extraction oracles --------------------------------------------------------

/// Full-token pattern for one numeral: optional `$` or `-`, digits either
/// plain or comma-grouped in threes, optional fraction.
fn numeral_token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?:[$-])?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?$").expect("pattern compiles")
    })
}

/// Brute-force numeral search: the longest substring at the earliest start
/// that is a complete numeral token. Returns the byte span.
pub fn oracle_numeral(text: &str) -> Option<(usize, usize)> {
    let re = numeral_token_regex();
    for start in 0..text.len() {
        for end in (start + 1..=text.len()).rev() {
            let Some(candidate) = text.get(start..end) else {
                continue;
            };
            if re.is_match(candidate) {
                return Some((start, end));
            }
        }
    }
    None
}

/// Brute-force choice search: the first `A`..`E` with no letter on either
/// side. Returns the letter and its byte offset.
pub fn oracle_choice(text: &str) -> Option<(usize, char)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(offset, c)) in chars.iter().enumerate() {
        if !('A'..='E').contains(&c) {
            continue;
        }
        let prev_ok = k == 0 || !chars[k - 1].1.is_alphabetic();
        let next_ok = k + 1 == chars.len() || !chars[k + 1].1.is_alphabetic();
        if prev_ok && next_ok {
            return Some((offset, c));
        }
    }
    None
}

/// Brute-force yes/no search: the first whole word `yes` or `no`, ignoring
/// ASCII case, with no letter on either side. At equal positions `yes` is
/// preferred, matching the published extraction behaviour.
pub fn oracle_yes_no(text: &str) -> Option<(usize, bool)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    for k in 0..n {
        if k > 0 && chars[k - 1].1.is_alphabetic() {
            continue;
        }
        for (word, value) in [("yes", true), ("no", false)] {
            let len = word.chars().count();
            if k + len > n {
                continue;
            }
            let window_matches = chars[k..k + len]
                .iter()
                .zip(word.chars())
                .all(|(&(_, a), b)| a.eq_ignore_ascii_case(&b));
            if !window_matches {
                continue;
            }
            let after_ok = k + len == n || !chars[k + len].1.is_alphabetic();
            if after_ok {
                return Some((chars[k].0, value));
            }
        }
    }
    None
}

/// Brute-force text search: the first double-quoted span (value without the
/// quotes, span with them); otherwise the rest of the line after a
/// case-insensitive `answer is`, trimmed. Returns the span and the value.
pub fn oracle_text(text: &str) -> Option<((usize, usize), String)> {
    if let Some(open) = text.find('"') {
        if let Some(rel) = text[open + 1..].find('"') {
            let close = open + 1 + rel;
            return Some(((open, close + 1), text[open + 1..close].to_string()));
        }
    }
    let marker = "answer is";
    let lower = text.to_ascii_lowercase();
    let at = lower.find(marker)?;
    let tail_start = at + marker.len();
    let line_end = text[tail_start..]
        .find('\n')
        .map(|o| tail_start + o)
        .unwrap_or(text.len());
    let value = text[tail_start..line_end].trim();
    if value.is_empty() {
        return None;
    }
    let start = tail_start + text[tail_start..line_end].find(value).unwrap_or(0);
    Some(((start, start + value.len()), value.to_string()))
}

// --- random scanning inputs -----------------------------------------------------

fn soup_from(rng: &mut impl Rng, pool: &[&str], pieces: usize) -> String {
    (0..rng.gen_range(0..=pieces))
        .map(|_| pool[rng.gen_range(0..pool.len())])
        .collect()
}

/// Digit-heavy noise for the numeral scanner; includes grouping and
/// currency characters, plus a multi-byte char to exercise byte offsets.
pub fn numeral_soup(rng: &mut impl Rng) -> String {
    const POOL: &[&str] = &[
        "0", "1", "2", "3", "5", "7", "9", "12", "345", "$", "-", ",", ".", " ", "a", "x", "é",
        "|", "1,000",
    ];
    soup_from(rng, POOL, 10)
}

/// Noise around standalone capital letters for the choice scanner.
pub fn choice_soup(rng: &mut impl Rng) -> String {
    const POOL: &[&str] = &[
        "A", "B", "C", "D", "E", "F", "a", "e", "z", " ", "(", ")", ".", ",", "2", "é", "AB",
        "Be", "answer", " B ",
    ];
    soup_from(rng, POOL, 8)
}

/// Word-shaped noise for the yes/no scanner, full of boundary traps.
pub fn yes_no_soup(rng: &mut impl Rng) -> String {
    const POOL: &[&str] = &[
        "yes", "no", "Yes", "No", "YES", "NO", "eyes", "snow", "noon", "yesterday", "nose",
        "maybe", " ", ".", ",", "(", ")", "é", "-", "answer", "y", "n",
    ];
    soup_from(rng, POOL, 8)
}

/// Quote- and marker-laden noise for the free-text scanner.
pub fn text_soup(rng: &mut impl Rng) -> String {
    const POOL: &[&str] = &[
        "\"", "ab", "answer is", "Answer IS", "the answer", " ", "\n", "é", "x", ".", "yajc",
        "  ", "ANSWER", "is",
    ];
    soup_from(rng, POOL, 8)
}
