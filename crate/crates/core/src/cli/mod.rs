//! The `seatok` command line.
//!
//! Exit codes: 0 on success, 1 when arguments, config or inputs are invalid,
//! 2 when processing fails. Every failure prints one line of the form
//! `error[<code>]: <message>` on stderr, optionally followed by usage.

mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

pub use args::Cli;
use args::{Command, DataCommand, MetricsCommand, PrefCommand, VocabCommand};
use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable consulted for a seed when neither a flag nor the
/// config file provides one.
pub const SEED_ENV: &str = "SEATOK_SEED";

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
    usage: Option<String>,
}

impl CliError {
    fn validation(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: EXIT_VALIDATION,
            usage: None,
        }
    }

    fn runtime(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: EXIT_RUNTIME,
            usage: None,
        }
    }

    fn with_usage(mut self, usage: String) -> Self {
        self.usage = Some(usage);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message.replace('\n', " "))
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        let exit = if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME };
        Self {
            code: e.code(),
            message: e.to_string(),
            exit,
            usage: None,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return report_clap_error(e),
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            if let Some(usage) = &e.usage {
                eprintln!("{}", usage.trim_end());
            }
            e.exit
        }
    }
}

fn report_clap_error(e: clap::Error) -> i32 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            print!("{e}");
            return EXIT_OK;
        }
        _ => {}
    }
    let code = match e.kind() {
        ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand | ErrorKind::MissingSubcommand => {
            "unknown-subcommand"
        }
        ErrorKind::MissingRequiredArgument => "missing-arg",
        ErrorKind::InvalidValue | ErrorKind::ValueValidation => "invalid-value",
        _ => "usage",
    };
    let rendered = e.render().to_string();
    let mut lines = rendered.lines();
    let first = lines.next().unwrap_or_default();
    let first = first.strip_prefix("error: ").unwrap_or(first);
    eprintln!("error[{code}]: {first}");
    for line in lines.filter(|l| !l.trim().is_empty()) {
        eprintln!("{line}");
    }
    EXIT_VALIDATION
}

/// Settings shared by every subcommand run.
struct Context {
    config: Config,
    print_effective: bool,
}

impl Context {
    /// Merges flags over the config table at `section`, fills a missing seed
    /// from the environment, and echoes the result when requested.
    fn resolve<A>(&self, flags: &A, section: &[&str]) -> CliResult<A>
    where
        A: serde::Serialize + serde::de::DeserializeOwned,
    {
        let mut merged = self.config.merge(flags, section)?;
        if let Some(obj) = merged.as_object_mut() {
            if obj.get("seed").is_some_and(serde_json::Value::is_null) {
                if let Some(seed) = seed_from_env()? {
                    obj.insert("seed".into(), seed.into());
                }
            }
        }
        if self.print_effective {
            eprint!("{}", config::render_effective(section, &merged)?);
        }
        serde_json::from_value(merged).map_err(|e| CliError::validation("invalid-config", e.to_string()))
    }
}

fn seed_from_env() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::validation("invalid-value", format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn usage_of(section: &[&str]) -> String {
    let mut cmd = Cli::command();
    for name in section {
        match cmd.find_subcommand(name) {
            Some(c) => cmd = c.clone(),
            None => break,
        }
    }
    cmd.render_usage().to_string()
}

/// Required value check; the error names both the flag and the config key.
fn require<T: Clone>(value: &Option<T>, key: &str, section: &[&str]) -> CliResult<T> {
    value.clone().ok_or_else(|| {
        CliError::validation(
            "missing-arg",
            format!(
                "--{} is required (or set `{key}` under [{}] in the config file)",
                key.replace('_', "-"),
                section.join(".")
            ),
        )
        .with_usage(usage_of(section))
    })
}

fn require_seed(value: Option<u64>, section: &[&str]) -> CliResult<u64> {
    value.ok_or_else(|| {
        CliError::validation(
            "missing-seed",
            format!(
                "this subcommand is randomized: pass --seed, set `seed` under [{}], or set {SEED_ENV}",
                section.join(".")
            ),
        )
        .with_usage(usage_of(section))
    })
}

fn existing(path: &Path) -> CliResult<PathBuf> {
    if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(CliError::validation("path-not-found", format!("{} does not exist", path.display())))
    }
}

/// A required input path that must exist.
fn input(value: &Option<PathBuf>, key: &str, section: &[&str]) -> CliResult<PathBuf> {
    existing(&require(value, key, section)?)
}

/// An output path whose directory must exist.
fn output(path: &Path) -> CliResult<PathBuf> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::validation(
            "path-not-found",
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(path.to_path_buf()),
    }
}

fn required_output(value: &Option<PathBuf>, key: &str, section: &[&str]) -> CliResult<PathBuf> {
    output(&require(value, key, section)?)
}

fn dispatch(cli: Cli) -> CliResult {
    let config = match &cli.config {
        Some(path) => Config::load(&existing(path)?)?,
        None => Config::default(),
    };
    let ctx = Context {
        config,
        print_effective: cli.print_effective_config,
    };
    match cli.command {
        Command::Vocab(VocabCommand::Build(a)) => commands::vocab_build(&ctx, &a),
        Command::Vocab(VocabCommand::Import(a)) => commands::vocab_import(&ctx, &a),
        Command::Vocab(VocabCommand::Extend(a)) => commands::vocab_extend(&ctx, &a),
        Command::Vocab(VocabCommand::Inspect(a)) => commands::vocab_inspect(&ctx, &a),
        Command::Metrics(MetricsCommand::Ratio(a)) => commands::metrics_ratio(&ctx, &a),
        Command::Metrics(MetricsCommand::Stats(a)) => commands::metrics_stats(&ctx, &a),
        Command::Data(DataCommand::Filter(a)) => commands::data_filter(&ctx, &a),
        Command::Data(DataCommand::Sample(a)) => commands::data_sample(&ctx, &a),
        Command::Data(DataCommand::Pack(a)) => commands::data_pack(&ctx, &a),
        Command::Data(DataCommand::PackHybrid(a)) => commands::data_pack_hybrid(&ctx, &a),
        Command::Data(DataCommand::JoinMultiturn(a)) => commands::data_join_multiturn(&ctx, &a),
        Command::Pref(PrefCommand::Generate(a)) => commands::pref_generate(&ctx, &a),
        Command::Pref(PrefCommand::Export(a)) => commands::pref_export(&ctx, &a),
    }
}
