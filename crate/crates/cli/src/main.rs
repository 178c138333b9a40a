//! `kgexplain`: build the knowledge graph, recommend paths, explain learning
//! objects, run the paired evaluation and serve the dialogue API.
//!
//! Settings resolve as built-in defaults, then the `--config` TOML file,
//! then command-line flags.

mod commands;
mod failure;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgexplain_core::BackendKind;

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "kgexplain", version, about = "Knowledge-graph grounded explanations of learning paths")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Graph file written by build-kg.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,

    /// Community assignment written by build-kg; recomputed when absent.
    #[arg(long, value_name = "FILE")]
    pub communities: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus, add similarity edges, detect communities.
    BuildKg {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Similarity threshold in [0, 1].
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        min_doc_tokens: Option<usize>,
    },
    /// Recommend a learning path and print its rationale.
    Recommend {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        discount: Option<f64>,
        #[arg(long)]
        max_path_len: Option<usize>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Explain one learning object.
    Explain {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        target: String,
        /// Learning goal node; defaults to the root of the target's taxonomy.
        #[arg(long)]
        goal: Option<String>,
        /// Ground the prompt in KG context (the default).
        #[arg(long, conflicts_with = "no_context")]
        with_context: bool,
        #[arg(long)]
        no_context: bool,
        /// Also print the rendered KG context.
        #[arg(long)]
        dump_context: bool,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<BackendKind>,
    },
    /// Run the paired with/without-context evaluation.
    Evaluate {
        #[command(flatten)]
        input: GraphInput,
        /// Path list: one JSON object per line, `{"start","goal"}` or `{"steps","goal"}`.
        #[arg(long, value_name = "FILE")]
        paths: PathBuf,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<BackendKind>,
        /// Worker threads; the reports do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Serve the dialogue HTTP API.
    Serve {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<BackendKind>,
    },
    /// Write the synthetic demonstration corpus and path list.
    Synth {
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
}

fn parse_backend(s: &str) -> Result<BackendKind, String> {
    s.parse().map_err(|e: kgexplain_core::ConfigError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code() as u8)
        }
    }
}

pub type CmdResult = Result<(), Failure>;
