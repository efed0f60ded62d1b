//! Command line front end: every subcommand reads JSON documents, writes
//! JSON reports and maps its verdict to an exit code (0 ok, 1 assertion
//! failure, 2 bad input, 3 budget exhausted).

mod commands;
pub mod error;
pub mod pipeline;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use error::CliError;
pub use pipeline::{run_pipeline, PipelineOutcome, PipelineSpec, StepSummary};

/// Version of every JSON report written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

const SCHEMAS: &str = "\
JSON documents:
  poset     {\"elements\":[{\"id\":0,\"tag\":\"ground\",\"step\":0}], \"lt\":[[a,b]]}  (Hasse edges)
  creature  poset document plus \"F\":[[x,y,z]] and \"H\":[[x,y,z]]
  step      {\"ground\": creature, \"R\": [[a,b]]}
  map       {\"g\": [[x,gx]]}
  family    {\"sets\": [[ids]]}
  marked    {\"marked\": [{\"set\": [ids], \"mark\": id}]}
  pipeline  {\"seed\": S, \"depth_budget\": 3, \"spare_floor\": 4096, \"check_conditions\": false,
             \"ground\": creature, \"steps\": [{\"R\": [[a,b]]}]}
Reports carry \"schema_version\" and, where randomness is used, \"seed\".
Exit codes: 0 ok, 1 assertion failure, 2 bad input, 3 budget exhausted.";

#[derive(Debug, Parser)]
#[command(name = "creature", version, about = "Gadget coding, generic builds and definability audits", after_help = SCHEMAS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allocate gadgets for a step and write the encoded F.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = pipeline::DEFAULT_SPARE_FLOOR)]
        spares: usize,
    },
    /// Build the generic structure for a step.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        /// Only `auto` (ground, e and gadgets) is supported.
        #[arg(long, default_value = "auto")]
        core: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = pipeline::DEFAULT_SPARE_FLOOR)]
        spares: usize,
        /// Check every intermediate condition.
        #[arg(long)]
        check_conditions: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decode the relation coded at `e` from the creature's F.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        e: u32,
        /// Replace F by the unique-minimal-upper-bound map of the order.
        #[arg(long)]
        order_f: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode the relation coded at `e` by evaluating the decoder formula.
    DecodeFo {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        e: u32,
        #[arg(long, default_value_t = creature_core::logic::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize and verify a definition of a monotone map's graph.
    DefineMonotone {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the smallness conditions against a threshold.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        threshold: usize,
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random sets sampled for the definability condition.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a largest subfamily with a common pairwise intersection.
    DeltaSystem {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        min: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for two marked substructures whose amalgam sits inside the structure.
    ProbeScc {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run encode, build, audit and decode for every step of a pipeline.
    Pipeline {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the extension of a formula over the free variables given.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        formula: String,
        /// Comma-separated free variables, in output order.
        #[arg(long, default_value = "")]
        vars: String,
        #[arg(long, default_value_t = creature_core::logic::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs a command; `Ok(false)` means it finished but found a violation.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    commands::dispatch(cli.command)
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<bool, CliError>) -> i32 {
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => e.exit_code(),
    }
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_pretty(value))?;
    Ok(())
}
