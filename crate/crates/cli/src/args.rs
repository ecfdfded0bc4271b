use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "routegate", version, about = "Route questions between a direct LLM and a tool-using agent")]
pub struct Cli {
    /// TOML config file; repeat to layer several (later files win).
    #[arg(long = "config", value_name = "FILE", global = true)]
    pub config: Vec<PathBuf>,

    /// Experience memory (JSONL).
    #[arg(long, value_name = "FILE", global = true)]
    pub memory: Option<PathBuf>,

    /// Benchmark file (JSONL).
    #[arg(long, value_name = "FILE", global = true)]
    pub bench: Option<PathBuf>,

    /// prompt_only, rag_direct, regular_cot or rubric_cot.
    #[arg(long, value_name = "NAME", global = true)]
    pub strategy: Option<String>,

    /// Number of retrieved examples.
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Weight of the lexical score in the fused ranking.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Where `eval` writes its JSON report.
    #[arg(long, value_name = "FILE", global = true)]
    pub report: Option<PathBuf>,

    /// Cap on concurrent upstream calls in batch commands.
    #[arg(long, value_name = "N", global = true)]
    pub max_inflight: Option<usize>,

    /// Reject unknown keys in config, memory and bench files.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Override any config key, e.g. `--set router.model=gpt-5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run both solvers on seed questions and append the results to the memory.
    Seed {
        /// Line-delimited `{"id": ..., "question": ...}` objects.
        #[arg(long, value_name = "FILE")]
        questions: PathBuf,
        /// Memory file to append to; defaults to memory.path.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Build the retrieval index for the memory and write it to a cache file.
    Index {
        /// Defaults to retrieval.index_cache.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Print the routing decision for one question.
    Route { question: String },
    /// Route one question and answer it with the chosen solver.
    Answer { question: String },
    /// Evaluate the router on a benchmark file.
    Eval,
    /// Serve the HTTP API.
    Serve {
        /// Defaults to service.listen.
        #[arg(long, value_name = "ADDR")]
        listen: Option<String>,
    },
    /// Compute scores from precomputed per-class F1 values.
    Score {
        /// Line-delimited rows with f1_llm_gaia, f1_agent_gaia, f1_llm_mmlu and f1_agent_mmlu.
        file: PathBuf,
    },
}

impl Cli {
    /// Dotted-key overrides carried by the flags. `--set` pairs come first so
    /// that named flags win over them.
    pub fn flag_overrides(&self) -> Result<Vec<(String, String)>, routegate_core::ConfigError> {
        let mut out = self
            .overrides
            .iter()
            .map(|raw| routegate_core::config::parse_override(raw))
            .collect::<Result<Vec<_>, _>>()?;
        let path = |p: &PathBuf| p.display().to_string();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v));
            }
        };
        push("memory.path", self.memory.as_ref().map(path));
        push("bench.path", self.bench.as_ref().map(path));
        push("router.strategy", self.strategy.clone());
        push("retrieval.k", self.k.map(|k| k.to_string()));
        push("retrieval.alpha", self.alpha.map(|a| a.to_string()));
        push("eval.report", self.report.as_ref().map(path));
        push("runtime.max_inflight", self.max_inflight.map(|n| n.to_string()));
        push("strict", self.strict.then(|| "true".to_string()));
        if let Command::Serve { listen: Some(addr) } = &self.command {
            push("service.listen", Some(addr.clone()));
        }
        Ok(out)
    }
}
