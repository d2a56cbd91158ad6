//! Command-line front end and HTTP service for the grading engine.

pub mod service;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use codegrade::corpus::{run_batch, run_distribution, BatchOptions, Engines};
use codegrade::inspectors::ConfigError;
use codegrade::report::{EngineError, StudentHistory};
use codegrade::taxonomy::{load_registry, RegistryError};
use codegrade::{Difficulty, GradingEngine, HistoryStore, InspectorConfig, RuleRegistry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "codegrade",
    version,
    about = "Grade the code quality of student submissions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grade one source file and print the report as JSON.
    Grade {
        path: PathBuf,
        #[arg(long, value_enum)]
        language: Language,
        #[command(flatten)]
        opts: GradeOpts,
    },
    /// Grade a corpus laid out as <student>/<submission>.<ext>.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        opts: BatchOpts,
    },
    /// Per-subcategory frequency tables over a corpus.
    Distribution {
        dir: PathBuf,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// List the enabled rules of a language.
    Rules {
        #[arg(value_enum)]
        language: Language,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Serve POST /grade and GET /health.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        history_dir: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Language {
    Python,
    Java,
}

impl Language {
    pub fn name(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Easy,
    Medium,
    Hard,
}

impl From<Level> for Difficulty {
    fn from(level: Level) -> Self {
        match level {
            Level::Easy => Difficulty::Easy,
            Level::Medium => Difficulty::Medium,
            Level::Hard => Difficulty::Hard,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineOpts {
    /// Rule registry replacing the shipped one for its language.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Inspector configuration file.
    #[arg(long)]
    pub inspectors: Option<PathBuf>,
    /// Run only the built-in checks.
    #[arg(long)]
    pub no_external: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GradeOpts {
    #[arg(long, value_enum, default_value = "hard")]
    pub level: Level,
    #[arg(long, requires = "student")]
    pub history_dir: Option<PathBuf>,
    #[arg(long, requires = "history_dir")]
    pub student: Option<String>,
    #[command(flatten)]
    pub engine: EngineOpts,
}

#[derive(Debug, Clone, Args)]
pub struct BatchOpts {
    #[arg(long, value_enum, default_value = "hard")]
    pub level: Level,
    /// Persist each student's history here instead of keeping it in memory.
    #[arg(long, conflicts_with = "no_history")]
    pub history_dir: Option<PathBuf>,
    /// Grade every submission independently, without recurrence penalties.
    #[arg(long)]
    pub no_history: bool,
    #[command(flatten)]
    pub engine: EngineOpts,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m,
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Grading(_) => CliError::Usage(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

/// One engine per shipped language. A custom registry replaces the default
/// for the language it declares.
pub fn build_engines(opts: &EngineOpts) -> Result<Engines, CliError> {
    let configs = if opts.no_external {
        Vec::new()
    } else {
        match &opts.inspectors {
            Some(path) => InspectorConfig::load(path)?,
            None => InspectorConfig::defaults(),
        }
    };
    let mut engines = Engines::new();
    for language in RuleRegistry::default_languages() {
        let registry = RuleRegistry::default_for(language)?;
        engines.insert(
            language.to_string(),
            GradingEngine::new(registry, configs.clone()),
        );
    }
    if let Some(path) = &opts.registry {
        let registry = load_registry(path)?;
        let language = registry.language().to_string();
        engines.insert(language, GradingEngine::new(registry, configs));
    }
    Ok(engines)
}

fn engine_for(engines: &Engines, language: Language) -> Result<&GradingEngine, CliError> {
    engines
        .get(language.name())
        .ok_or_else(|| CliError::Usage(format!("no registry for language `{}`", language.name())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn print(out: &mut impl Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn cmd_grade(
    path: &Path,
    language: Language,
    opts: &GradeOpts,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let engines = build_engines(&opts.engine)?;
    let engine = engine_for(&engines, language)?;
    let store = opts.history_dir.as_ref().map(HistoryStore::new);
    let history = match (&store, &opts.student) {
        (Some(store), Some(student_id)) => Some(StudentHistory { store, student_id }),
        _ => None,
    };
    let report = engine.build_report(path, opts.level.into(), history)?;
    print(out, &report.to_json())
}

fn cmd_batch(dir: &Path, opts: &BatchOpts, out: &mut impl Write) -> Result<(), CliError> {
    let engines = build_engines(&opts.engine)?;
    let batch = BatchOptions {
        level: opts.level.into(),
        use_history: !opts.no_history,
        store: opts.history_dir.as_ref().map(HistoryStore::new),
    };
    let result = run_batch(dir, &engines, &batch).map_err(|e| CliError::Io(e.to_string()))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    print(out, &to_json(&result))
}

fn cmd_distribution(dir: &Path, opts: &EngineOpts, out: &mut impl Write) -> Result<(), CliError> {
    let engines = build_engines(opts)?;
    let (tables, warnings) =
        run_distribution(dir, &engines).map_err(|e| CliError::Io(e.to_string()))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    print(out, &to_json(&tables))
}

fn cmd_rules(
    language: Language,
    registry: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let registry = match registry {
        Some(path) => {
            let r = load_registry(path)?;
            if r.language() != language.name() {
                return Err(CliError::Usage(format!(
                    "registry {} is for `{}`, not `{}`",
                    path.display(),
                    r.language(),
                    language.name()
                )));
            }
            r
        }
        None => RuleRegistry::default_for(language.name())?,
    };
    let mut text = String::from("inspector\trule\tcategory\tsubcategory\tdifficulty\tcriteria");
    for rule in registry.enabled_rules() {
        let c = rule.penalty;
        text.push_str(&format!(
            "\n{}\t{}\t{}\t{}\t{}\t{},{},{}",
            rule.inspector,
            rule.rule_id,
            rule.category.name(),
            rule.subcategory_id,
            rule.difficulty,
            c.prevalence,
            c.difficulty,
            c.importance
        ));
    }
    print(out, &text)
}

fn cmd_serve(
    port: u16,
    host: &str,
    history_dir: Option<&Path>,
    opts: &EngineOpts,
) -> Result<(), CliError> {
    let engines = build_engines(opts)?;
    let state = service::AppState::new(engines, history_dir.map(HistoryStore::new));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Io(format!("cannot bind {host}:{port}: {e}")))?;
        eprintln!(
            "listening on http://{}",
            listener
                .local_addr()
                .map_err(|e| CliError::Io(e.to_string()))?
        );
        axum::serve(listener, service::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Io(e.to_string()))
    })
}

/// Runs a parsed command, writing results to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut impl Write) -> i32 {
    let result = match &cli.command {
        Command::Grade {
            path,
            language,
            opts,
        } => cmd_grade(path, *language, opts, out),
        Command::Batch { dir, opts } => cmd_batch(dir, opts, out),
        Command::Distribution { dir, engine } => cmd_distribution(dir, engine, out),
        Command::Rules { language, registry } => cmd_rules(*language, registry.as_deref(), out),
        Command::Serve {
            port,
            host,
            history_dir,
            engine,
        } => cmd_serve(*port, host, history_dir.as_deref(), engine),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {}", e.message());
            e.exit_code()
        }
    }
}
