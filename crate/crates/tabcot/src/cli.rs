//! The `tabcot` command line: datasets through the two-stage pipeline
//! (`eval`, `record`), one-off questions (`ask`), catalog listing
//! (`schemes`), structure probes (`probe`) and fixture-store upkeep
//! (`cache`).
//!
//! Conventions, kept strictly so output is machine-pipeable:
//!
//! * stdout carries only the requested artifact — a report, a table, a
//!   listing; every diagnostic goes to stderr.
//! * exit 0 on success, 2 for configuration problems (bad flags, unknown
//!   schemes, unreadable files), 3 for backend failures.
//! * settings resolve as flags > environment > `--config` file; nothing
//!   contacts a backend until the whole configuration has been validated.
//! * the API credential is read from `TABCOT_API_KEY` only. There is
//!   deliberately no `--api-key` flag: secrets on the command line end up
//!   in shell history and process listings.

use crate::backend::{
    BackendError, CachedBackend, CompletionBackend, CompletionRequest, CompletionResponse,
    FixtureStore, LiveBackend, ReplayBackend, DEFAULT_MAX_TOKENS, DEFAULT_MODEL,
};
use crate::dataset::{load_dataset_str, DatasetManifest};
use crate::eval::{
    evaluate, report_to_string, run_probe, CompletionParams, EvalConfig, EvalError, EvalReport,
    ProbeId, ReportFormat, DEFAULT_PARALLELISM,
};
use crate::extract::{extract_answer, AnswerType};
use crate::prompt::{
    build_extraction_prompt, build_generation_prompt, builtin_exemplars, extraction_template,
    parse_exemplar_file, Exemplar, BUILTIN_EXEMPLAR_SETS,
};
use crate::scheme::{builtin_catalog, builtin_scheme, parse_scheme, SchemeCategory, TableScheme};
use crate::table::{parse_table, validate_structure};
use clap::{Args, Parser, Subcommand};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Entry point for the `tabcot` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap routes --help/--version to stdout and usage errors to
            // stderr on its own; mirror its exit codes.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Backend(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tabcot",
    version,
    about = "Tabular chain-of-thought prompting: schemes, table parsing, answer extraction and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a JSONL dataset and emit a report.
    Eval(EvalArgs),
    /// Run one ad-hoc question through the pipeline and print the table and answer.
    Ask(AskArgs),
    /// List the builtin scheme catalog.
    Schemes,
    /// Run a structure-sensitivity probe (A, B, C or D) and print the transcript.
    Probe(ProbeArgs),
    /// Evaluate a dataset against the live backend, recording every completion into a fixture store.
    Record(RecordArgs),
    /// Inspect or clear a fixture store.
    Cache(CacheArgs),
}

/// Request shaping and the settings file, shared by every network-touching
/// command.
#[derive(Args)]
struct ModelArgs {
    /// Model identifier sent with each completion request.
    #[arg(long)]
    model: Option<String>,
    /// Token budget per completion request.
    #[arg(long)]
    max_tokens: Option<u32>,
    /// key=value settings file (lowest precedence; flags and TABCOT_* environment variables win).
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Backend selection for commands that can run offline.
#[derive(Args)]
struct BackendSelect {
    /// Completion backend: live or replay.
    #[arg(long)]
    backend: Option<String>,
    /// Fixture store the replay backend reads (JSONL).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Read-through cache store (JSONL, created if missing).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset JSONL file; the file stem names the dataset.
    #[arg(long)]
    dataset: PathBuf,
    /// Scheme id from the catalog (repeatable; voting runs default to main, vote-2, vote-3).
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Additional scheme read from a file holding one |a|b|c| header line.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Three-scheme self-consistency voting.
    #[arg(long)]
    vote: bool,
    /// Exemplar set for few-shot prompts: a builtin name or a file path.
    #[arg(long)]
    few_shot: Option<String>,
    /// Answer type for datasets not in the catalog (numeral, choice, yes-no, text).
    #[arg(long)]
    answer_type: Option<String>,
    /// Worker threads (affects speed only, never report bytes).
    #[arg(long)]
    parallel: Option<usize>,
    /// Report format: markdown, csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendSelect,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct AskArgs {
    /// The question to run.
    question: String,
    /// Expected answer type (numeral, choice, yes-no, text).
    #[arg(long, default_value = "numeral")]
    answer_type: String,
    /// Scheme id from the catalog.
    #[arg(long)]
    scheme: Option<String>,
    /// Scheme read from a file holding one |a|b|c| header line.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Exemplar set for few-shot prompts: a builtin name or a file path.
    #[arg(long)]
    few_shot: Option<String>,
    #[command(flatten)]
    backend: BackendSelect,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct ProbeArgs {
    /// Probe id: A, B, C or D.
    id: String,
    #[command(flatten)]
    backend: BackendSelect,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct RecordArgs {
    /// Dataset JSONL file; the file stem names the dataset.
    #[arg(long)]
    dataset: PathBuf,
    /// Fixture store to record into (JSONL, created if missing).
    #[arg(long)]
    fixtures: PathBuf,
    /// Scheme id from the catalog (repeatable).
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Additional scheme read from a file holding one |a|b|c| header line.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Three-scheme self-consistency voting.
    #[arg(long)]
    vote: bool,
    /// Exemplar set for few-shot prompts: a builtin name or a file path.
    #[arg(long)]
    few_shot: Option<String>,
    /// Answer type for datasets not in the catalog.
    #[arg(long)]
    answer_type: Option<String>,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Report format: markdown, csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct CacheArgs {
    /// Fixture store to inspect or clear (JSONL).
    #[arg(long)]
    fixtures: PathBuf,
    /// Remove every record from the store.
    #[arg(long)]
    clear: bool,
    /// List each record (digest, model, prompt head).
    #[arg(long)]
    list: bool,
}

/// Every failure, already routed to its exit code.
#[derive(Debug)]
enum CliError {
    /// Exit 2: the run was misconfigured; nothing happened.
    Config(String),
    /// Exit 3: a backend call failed.
    Backend(String),
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> CliError {
        CliError::Backend(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::Backend(b) => CliError::Backend(b.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Ask(args) => cmd_ask(args),
        Command::Schemes => cmd_schemes(),
        Command::Probe(args) => cmd_probe(args),
        Command::Record(args) => cmd_record(args),
        Command::Cache(args) => cmd_cache(args),
    }
}

// ---------------------------------------------------------------------------
// Settings: flags > environment > config file.

/// The environment/file fallback layers behind the flags.
struct Layers {
    file: HashMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "model",
    "backend",
    "fixtures",
    "cache",
    "max-tokens",
    "parallel",
    "format",
];

impl Layers {
    fn load(path: Option<&Path>) -> Result<Layers, CliError> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Config(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        idx + 1
                    ))
                })?;
                let key = key.trim();
                if !CONFIG_KEYS.contains(&key) {
                    return Err(CliError::Config(format!(
                        "{}:{}: unknown key {key:?} (known: {})",
                        path.display(),
                        idx + 1,
                        CONFIG_KEYS.join(", ")
                    )));
                }
                file.insert(key.to_string(), value.trim().to_string());
            }
        }
        Ok(Layers { file })
    }

    /// Resolves one setting: an explicit flag wins, then the environment
    /// variable, then the config file, then `None`.
    fn setting<T>(
        &self,
        flag: Option<T>,
        env_key: &str,
        file_key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        let (value, source) = match std::env::var(env_key) {
            Ok(v) if !v.trim().is_empty() => (v, env_key.to_string()),
            _ => match self.file.get(file_key) {
                Some(v) => (v.clone(), format!("config key {file_key:?}")),
                None => return Ok(None),
            },
        };
        parse(&value)
            .map(Some)
            .map_err(|e| CliError::Config(format!("invalid {source}: {e}")))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BackendKind {
    Live,
    Replay,
}

fn parse_backend_kind(s: &str) -> Result<BackendKind, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "live" => Ok(BackendKind::Live),
        "replay" => Ok(BackendKind::Replay),
        other => Err(format!("unknown backend {other:?} (expected live or replay)")),
    }
}

/// The fully resolved run configuration; nothing past this point consults
/// flags, the environment or the config file again.
struct Settings {
    backend: BackendKind,
    fixtures: Option<PathBuf>,
    cache: Option<PathBuf>,
    model: String,
    max_tokens: u32,
    parallel: usize,
    format: ReportFormat,
}

impl Settings {
    fn resolve(
        model_args: &ModelArgs,
        backend_select: Option<&BackendSelect>,
        parallel: Option<usize>,
        format: Option<&str>,
    ) -> Result<Settings, CliError> {
        let layers = Layers::load(model_args.config.as_deref())?;
        let path = |s: &str| Ok(PathBuf::from(s));
        let (backend_flag, fixtures_flag, cache_flag) = match backend_select {
            Some(b) => (b.backend.clone(), b.fixtures.clone(), b.cache.clone()),
            None => (None, None, None),
        };

        let backend = layers
            .setting(
                backend_flag.as_deref().map(parse_backend_kind).transpose().map_err(
                    |e| CliError::Config(format!("invalid --backend: {e}")),
                )?,
                "TABCOT_BACKEND",
                "backend",
                parse_backend_kind,
            )?
            .unwrap_or(BackendKind::Replay);
        let fixtures = layers.setting(fixtures_flag, "TABCOT_FIXTURES", "fixtures", path)?;
        let cache = layers.setting(cache_flag, "TABCOT_CACHE", "cache", path)?;
        let model = layers
            .setting(model_args.model.clone(), "TABCOT_MODEL", "model", |s| {
                Ok(s.to_string())
            })?
            .unwrap_or_else(|| DEFAULT_MODEL.to_string());
        let max_tokens = layers
            .setting(model_args.max_tokens, "TABCOT_MAX_TOKENS", "max-tokens", |s| {
                s.parse::<u32>().map_err(|e| e.to_string())
            })?
            .unwrap_or(DEFAULT_MAX_TOKENS);
        if max_tokens == 0 {
            return Err(CliError::Config("max-tokens must be at least 1".into()));
        }
        let parallel = layers
            .setting(parallel, "TABCOT_PARALLEL", "parallel", |s| {
                s.parse::<usize>().map_err(|e| e.to_string())
            })?
            .unwrap_or(DEFAULT_PARALLELISM)
            .max(1);
        let format = layers
            .setting(
                format.map(ReportFormat::from_str).transpose().map_err(|e| {
                    CliError::Config(format!("invalid --format: {e}"))
                })?,
                "TABCOT_FORMAT",
                "format",
                ReportFormat::from_str,
            )?
            .unwrap_or(ReportFormat::Markdown);

        Ok(Settings {
            backend,
            fixtures,
            cache,
            model,
            max_tokens,
            parallel,
            format,
        })
    }

    fn params(&self) -> CompletionParams {
        CompletionParams {
            model: self.model.clone(),
            temperature: 0.0,
            max_tokens: self.max_tokens,
            stop: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Backend construction.

/// The backend stack a command runs against, chosen at startup.
enum AnyBackend {
    Replay(ReplayBackend),
    Live(LiveBackend),
    CachedReplay(CachedBackend<ReplayBackend>),
    CachedLive(CachedBackend<LiveBackend>),
}

impl CompletionBackend for AnyBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        match self {
            AnyBackend::Replay(b) => b.complete(request),
            AnyBackend::Live(b) => b.complete(request),
            AnyBackend::CachedReplay(b) => b.complete(request),
            AnyBackend::CachedLive(b) => b.complete(request),
        }
    }
}

fn open_cache(path: &Path) -> Result<FixtureStore, CliError> {
    FixtureStore::open(path)
        .map_err(|e| CliError::Config(format!("cannot open cache {}: {e}", path.display())))
}

fn build_backend(settings: &Settings) -> Result<AnyBackend, CliError> {
    match settings.backend {
        BackendKind::Replay => {
            let path = settings.fixtures.as_ref().ok_or_else(|| {
                CliError::Config("the replay backend needs --fixtures <path>".into())
            })?;
            let replay = ReplayBackend::from_path(path).map_err(|e| {
                CliError::Config(format!("cannot load fixtures {}: {e}", path.display()))
            })?;
            Ok(match &settings.cache {
                None => AnyBackend::Replay(replay),
                Some(cache) => AnyBackend::CachedReplay(CachedBackend::new(replay, open_cache(cache)?)),
            })
        }
        BackendKind::Live => {
            // A missing key is a configuration problem (exit 2), unlike an
            // authentication rejection from the server at call time (exit 3).
            let live = LiveBackend::from_env().map_err(|e| CliError::Config(e.to_string()))?;
            Ok(match &settings.cache {
                None => AnyBackend::Live(live),
                Some(cache) => AnyBackend::CachedLive(CachedBackend::new(live, open_cache(cache)?)),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Shared resolution helpers.

fn resolve_schemes(
    ids: &[String],
    scheme_file: Option<&Path>,
    vote: bool,
) -> Result<Vec<TableScheme>, CliError> {
    let mut schemes = Vec::new();
    for id in ids {
        schemes.push(builtin_scheme(id).ok_or_else(|| {
            CliError::Config(format!(
                "unknown scheme {id:?}; run `tabcot schemes` for the catalog"
            ))
        })?);
    }
    if let Some(path) = scheme_file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read scheme file {}: {e}", path.display()))
        })?;
        let header = text.lines().map(str::trim).find(|l| !l.is_empty()).ok_or_else(|| {
            CliError::Config(format!("scheme file {} is empty", path.display()))
        })?;
        schemes.push(parse_scheme(header).map_err(|e| {
            CliError::Config(format!("scheme file {}: {e}", path.display()))
        })?);
    }
    if schemes.is_empty() {
        let default_ids: &[&str] = if vote {
            &["main", "vote-2", "vote-3"]
        } else {
            &["main"]
        };
        for id in default_ids {
            schemes.push(builtin_scheme(id).expect("default schemes are builtin"));
        }
    }
    Ok(schemes)
}

fn resolve_exemplars(arg: Option<&str>) -> Result<Vec<Exemplar>, CliError> {
    let Some(name) = arg else {
        return Ok(Vec::new());
    };
    if let Some(set) = builtin_exemplars(name) {
        return Ok(set);
    }
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read exemplar file {}: {e}", path.display()))
        })?;
        return parse_exemplar_file(&text)
            .map_err(|e| CliError::Config(format!("exemplar file {}: {e}", path.display())));
    }
    Err(CliError::Config(format!(
        "no exemplar set {name:?}: not a builtin ({}) and not a file",
        BUILTIN_EXEMPLAR_SETS.join(", ")
    )))
}

fn parse_answer_type(s: &str) -> Result<AnswerType, CliError> {
    AnswerType::from_str(s).map_err(CliError::Config)
}

/// Reads a dataset file and settles its manifest: catalog entry for known
/// names, `--answer-type` for ad-hoc files, consistency-checked when both
/// are present.
fn resolve_dataset(
    path: &Path,
    answer_type: Option<&str>,
) -> Result<(DatasetManifest, Vec<crate::dataset::QuestionRecord>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read dataset {}: {e}", path.display()))
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let flag = answer_type.map(parse_answer_type).transpose()?;

    let manifest = match (DatasetManifest::known(&stem), flag) {
        (Some(known), None) => known,
        (Some(known), Some(requested)) => {
            DatasetManifest::new(known.name(), known.expected_size(), requested)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        (None, Some(requested)) => {
            let n = text.lines().filter(|l| !l.trim().is_empty()).count();
            DatasetManifest::new(&stem, n, requested).map_err(|e| CliError::Config(e.to_string()))?
        }
        (None, None) => {
            return Err(CliError::Config(format!(
                "dataset {stem:?} is not in the catalog; pass --answer-type \
                 (numeral, choice, yes-no or text)"
            )))
        }
    };

    let loaded = load_dataset_str(&text, &manifest)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    Ok((manifest, loaded.records))
}

// ---------------------------------------------------------------------------
// Commands.

/// Emits the report to stdout or `--out`, then a one-line summary to stderr.
/// Exit 3 (with the report still emitted) when every question failed on the
/// backend — a run that answered nothing should not look successful.
fn finish_eval(report: &EvalReport, format: ReportFormat, out: Option<&Path>) -> Result<(), CliError> {
    let rendered = report_to_string(report, format);
    match out {
        None => print!("{rendered}"),
        Some(path) => {
            std::fs::write(path, rendered).map_err(|e| {
                CliError::Config(format!("cannot write report {}: {e}", path.display()))
            })?;
            eprintln!("report written to {}", path.display());
        }
    }
    eprintln!(
        "{}: {}/{} correct, {} extraction failures",
        report.dataset, report.overall.n_correct, report.n_questions, report.overall.n_extraction_failures
    );
    let all_failed =
        report.n_questions > 0 && report.questions.iter().all(|q| q.error.is_some());
    if all_failed {
        let first = report.questions[0].error.as_deref().unwrap_or("unknown error");
        return Err(CliError::Backend(format!(
            "every question failed on the backend; first error: {first}"
        )));
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let settings = Settings::resolve(
        &args.model,
        Some(&args.backend),
        args.parallel,
        args.format.as_deref(),
    )?;
    let schemes = resolve_schemes(&args.schemes, args.scheme_file.as_deref(), args.vote)?;
    let exemplars = resolve_exemplars(args.few_shot.as_deref())?;
    let (manifest, records) = resolve_dataset(&args.dataset, args.answer_type.as_deref())?;
    let backend = build_backend(&settings)?;

    let config = EvalConfig {
        dataset: manifest.name().to_string(),
        model: settings.model.clone(),
        schemes,
        vote: args.vote,
        exemplars,
        temperature: 0.0,
        max_tokens: settings.max_tokens,
        stop: None,
        parallelism: settings.parallel,
    };
    let report = evaluate(&records, &config, &backend)?;
    finish_eval(&report, settings.format, args.out.as_deref())
}

fn cmd_record(args: RecordArgs) -> Result<(), CliError> {
    let settings = Settings::resolve(&args.model, None, args.parallel, args.format.as_deref())?;
    let schemes = resolve_schemes(&args.schemes, args.scheme_file.as_deref(), args.vote)?;
    let exemplars = resolve_exemplars(args.few_shot.as_deref())?;
    let (manifest, records) = resolve_dataset(&args.dataset, args.answer_type.as_deref())?;

    let live = LiveBackend::from_env().map_err(|e| CliError::Config(e.to_string()))?;
    let backend = CachedBackend::new(live, open_cache(&args.fixtures)?);

    let config = EvalConfig {
        dataset: manifest.name().to_string(),
        model: settings.model.clone(),
        schemes,
        vote: args.vote,
        exemplars,
        temperature: 0.0,
        max_tokens: settings.max_tokens,
        stop: None,
        parallelism: settings.parallel,
    };
    let report = evaluate(&records, &config, &backend)?;
    eprintln!(
        "recorded {} new completions into {} ({} served from the store)",
        backend.misses(),
        args.fixtures.display(),
        backend.hits()
    );
    finish_eval(&report, settings.format, args.out.as_deref())
}

fn cmd_ask(args: AskArgs) -> Result<(), CliError> {
    let settings = Settings::resolve(&args.model, Some(&args.backend), None, None)?;
    if args.scheme.is_some() && args.scheme_file.is_some() {
        return Err(CliError::Config(
            "pass either --scheme or --scheme-file, not both".into(),
        ));
    }
    let schemes = match &args.scheme {
        Some(id) => resolve_schemes(std::slice::from_ref(id), None, false)?,
        None => resolve_schemes(&[], args.scheme_file.as_deref(), false)?,
    };
    let scheme = &schemes[0];
    let answer_type = parse_answer_type(&args.answer_type)?;
    let exemplars = resolve_exemplars(args.few_shot.as_deref())?;
    let question = args.question.trim();
    if question.is_empty() {
        return Err(CliError::Config("the question is empty".into()));
    }
    let backend = build_backend(&settings)?;
    let params = settings.params();

    let generation_prompt = build_generation_prompt(question, scheme, &exemplars);
    let generation = backend.complete(&params.request(generation_prompt.clone()))?;
    let (table, table_text) = match parse_table(&generation.text, scheme) {
        Ok((table, _rest)) => {
            let text = table.raw().to_string();
            (Some(table), text)
        }
        Err(_) => {
            eprintln!("warning: the completion contained no table");
            (None, generation.text.clone())
        }
    };
    if let Some(table) = &table {
        for v in validate_structure(table) {
            eprintln!("warning: table row {}: {} — {}", v.row + 1, v.kind, v.detail);
        }
    }

    let extraction_prompt =
        build_extraction_prompt(&generation_prompt, &table_text, &extraction_template(answer_type));
    let extraction = backend.complete(&params.request(extraction_prompt))?;

    print!("{table_text}");
    if !table_text.ends_with('\n') {
        println!();
    }
    match extract_answer(&extraction.text, answer_type) {
        Ok(answer) => println!("\nanswer: {}", answer.value),
        Err(e) => {
            println!("\nanswer: (not found)");
            eprintln!("warning: {e}");
        }
    }
    Ok(())
}

fn cmd_schemes() -> Result<(), CliError> {
    for scheme in builtin_catalog() {
        let category = match scheme.category() {
            SchemeCategory::General => "general",
            SchemeCategory::DomainSpecific => "domain-specific",
            SchemeCategory::TaskSpecific => "task-specific",
        };
        println!("{}\t{}\t{}", scheme.id(), category, scheme.render_header());
    }
    Ok(())
}

fn cmd_probe(args: ProbeArgs) -> Result<(), CliError> {
    let settings = Settings::resolve(&args.model, Some(&args.backend), None, None)?;
    let id = ProbeId::from_str(&args.id).map_err(CliError::Config)?;
    let backend = build_backend(&settings)?;
    let transcript = run_probe(id, &backend, &settings.params())?;
    print!("{}", transcript.render());
    Ok(())
}

fn cmd_cache(args: CacheArgs) -> Result<(), CliError> {
    if args.clear {
        let store = open_cache(&args.fixtures)?;
        let n = store.len();
        store.clear().map_err(|e| {
            CliError::Config(format!("cannot clear {}: {e}", args.fixtures.display()))
        })?;
        eprintln!("cleared {} records from {}", n, args.fixtures.display());
        return Ok(());
    }
    let store = FixtureStore::load(&args.fixtures).map_err(|e| {
        CliError::Config(format!("cannot load {}: {e}", args.fixtures.display()))
    })?;
    println!("path: {}", args.fixtures.display());
    println!("records: {}", store.len());
    if args.list {
        for record in store.records() {
            let head: String = record.prompt.chars().take(48).collect();
            println!("{}\t{}\t{:?}", record.digest, record.model, head);
        }
    }
    Ok(())
}
