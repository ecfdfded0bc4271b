//! The `routegate` command line: seeding the experience memory, indexing,
//! one-off routing, benchmark evaluation, score arithmetic and the HTTP
//! service.

pub mod args;
pub mod commands;
pub mod score;
pub mod seed;

use std::io::Write;
use std::path::PathBuf;

use routegate_core::config::{load_config, ConfigSources};
use routegate_core::eval::render_tables;
use routegate_core::setup::{self, SetupError};
use routegate_core::{AppConfig, BackendError, ConfigError, EvalError, MemoryError, RetrievalError, RoutingError};
use routegate_gateway::GatewayError;

pub use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
/// Anything not classified below, e.g. a failed write.
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_UPSTREAM: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{} contains no entries", .0.display())]
    EmptyInput(PathBuf),
    #[error("{0} is not set")]
    Missing(&'static str),
    #[error("every seed question failed ({failed} failures)")]
    AllFailed { failed: usize },
    #[error("{0}")]
    Upstream(String),
}

fn is_upstream(err: &(dyn std::error::Error + 'static)) -> bool {
    if err.is::<BackendError>() {
        return true;
    }
    match err.downcast_ref::<RoutingError>() {
        Some(RoutingError::BackendUnavailable(_)) => return true,
        Some(_) => return false,
        None => {}
    }
    matches!(
        err.downcast_ref::<CliError>(),
        Some(CliError::AllFailed { .. } | CliError::Upstream(_))
    )
}

fn is_input(err: &(dyn std::error::Error + 'static)) -> bool {
    err.is::<CliError>()
        || err.is::<ConfigError>()
        || err.is::<EvalError>()
        || err.is::<MemoryError>()
        || err.is::<RetrievalError>()
        || err.is::<RoutingError>()
        || err.is::<SetupError>()
        || matches!(
            err.downcast_ref::<GatewayError>(),
            Some(GatewayError::Listen(_) | GatewayError::Setup(_))
        )
}

/// Upstream failures win over input errors anywhere in the chain.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(is_upstream) {
        EXIT_UPSTREAM
    } else if err.chain().any(is_input) {
        EXIT_INPUT
    } else {
        EXIT_FAILURE
    }
}

/// Files from `--config` (or `ROUTEGATE_CONFIG`), `ROUTEGATE_*` variables,
/// then flags.
pub fn resolve_config(cli: &Cli) -> anyhow::Result<AppConfig> {
    let mut files = cli.config.clone();
    if files.is_empty() {
        if let Some(path) = std::env::var_os("ROUTEGATE_CONFIG") {
            files.push(PathBuf::from(path));
        }
    }
    let sources = ConfigSources {
        files,
        flags: cli.flag_overrides()?,
        ..Default::default()
    }
    .with_process_env();
    Ok(load_config(&sources)?.config)
}

fn print_json(out: &mut dyn Write, value: &impl serde::Serialize) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs one subcommand against the real backends, writing results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<u8> {
    if let Command::Score { file } = &cli.command {
        let summary = score::run_score(file)?;
        write!(out, "{}", score::render_scores(&summary))?;
        return Ok(EXIT_OK);
    }
    let config = resolve_config(cli)?;
    match &cli.command {
        Command::Seed { questions, output } => {
            let output = output
                .clone()
                .or_else(|| config.memory.path.clone())
                .ok_or(CliError::Missing("memory.path (--memory or --output)"))?;
            let options = seed::SeedOptions {
                execution: config.execution(),
                max_inflight: config.runtime.max_inflight,
                load: config.memory_load_options(),
            };
            let llm = setup::llm_backend(&config);
            let agent = setup::agent_backend(&config);
            let summary = seed::run_seed(questions, &output, llm.as_ref(), agent.as_ref(), &options)?;
            print_json(out, &summary)?;
        }
        Command::Index { output } => {
            let summary = commands::run_index(&config, output.as_deref())?;
            print_json(out, &summary)?;
        }
        Command::Route { question } => {
            let decision = commands::run_route(&config, setup::router_backend(&config), question)?;
            print_json(out, &decision)?;
        }
        Command::Answer { question } => {
            let llm = setup::llm_backend(&config);
            let agent = setup::agent_backend(&config);
            let answer = commands::run_answer(&config, setup::router_backend(&config), llm.as_ref(), agent.as_ref(), question)?;
            print_json(out, &answer)?;
            if answer.result.error.is_some() {
                return Ok(EXIT_UPSTREAM);
            }
        }
        Command::Eval => {
            let report = commands::run_eval(&config, setup::router_backend(&config))?;
            write!(out, "{}", render_tables(&report))?;
        }
        Command::Serve { .. } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(routegate_gateway::serve(config))?;
        }
        Command::Score { .. } => unreachable!("handled above"),
    }
    Ok(EXIT_OK)
}
