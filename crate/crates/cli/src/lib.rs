//! Batch front end over `persym-core`: `enumerate`, `eval`, `verify`,
//! `derive` and `count-solutions`.
//!
//! [`run`] takes a validated [`RunConfig`] and returns the full report text
//! plus an exit code; the binary only parses arguments and prints.

mod args;
pub mod config;
mod derive;
mod enumerate;
pub mod error;
mod eval;
mod solutions;
mod verify;

use persym_core::cache::DistributionCache;
use persym_core::enumeration::enumerate_exact_with;
use persym_core::{FamilyId, RankDistribution};
use serde::Serialize;

pub use args::{default_workers, Cli, Command};
pub use config::{Check, CommandName, FamilyArg, Format, KRange, RunConfig, SolutionMethod};
pub use error::CliError;

pub const EXIT_PASS: i32 = 0;
/// A check or reference comparison did not hold.
pub const EXIT_FAIL: i32 = 1;
/// Bad arguments or a failed computation.
pub const EXIT_ERROR: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub output: String,
    pub exit_code: i32,
}

impl Report {
    fn new(output: String, passed: bool) -> Self {
        Self {
            output,
            exit_code: if passed { EXIT_PASS } else { EXIT_FAIL },
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    match config.subcommand {
        CommandName::Enumerate => enumerate::run(config),
        CommandName::Eval => eval::run(config),
        CommandName::Verify => verify::run(config),
        CommandName::Derive => derive::run(config),
        CommandName::CountSolutions => solutions::run(config),
    }
}

/// Pretty-printed JSON with a trailing newline.
fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Exact distribution through the cache when one is configured.
fn exact_distribution(config: &RunConfig, n: usize, k: usize) -> Result<RankDistribution, CliError> {
    let d = match &config.cache_dir {
        Some(dir) => DistributionCache::new(dir).get_or_compute(n, k, config.workers, config.limits())?,
        None => enumerate_exact_with(n, k, config.workers, config.limits())?,
    };
    Ok(d)
}

/// Family name as written in tables and CSV.
fn family_label(id: FamilyId) -> String {
    match id {
        FamilyId::General(n) => format!("general-n{n}"),
        other => other.to_string(),
    }
}
