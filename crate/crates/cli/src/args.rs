//! Command-line grammar.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use persym_core::cache::CACHE_ENV;

use crate::config::{Check, CommandName, FamilyArg, Format, KRange, RunConfig, SolutionMethod};

#[derive(Debug, Parser)]
#[command(
    name = "persym",
    version,
    about = "Rank distributions of stacked persymmetric matrices over GF(2)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; csv is only meaningful for eval.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads for exhaustive sweeps [default: available cores].
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Cache directory for exact distributions [default: $PERSYM_CACHE_DIR].
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Ignore the cache entirely.
    #[arg(long, global = true, conflicts_with = "cache_dir")]
    pub no_cache: bool,

    /// Raise the exhaustive-sweep budget from 2^32 to 2^40 tuples.
    #[arg(long, global = true)]
    pub allow_huge: bool,

    /// Seed for sampling and random tuple checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank distribution Γ_0..Γ_max by exhaustive sweep, or by sampling with --samples.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Evaluate a closed-form family over one k or an inclusive range A:B.
    Eval {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, required_unless_present = "k_range", conflicts_with = "k_range")]
        k: Option<usize>,
        #[arg(long, value_name = "A:B")]
        k_range: Option<KRange>,
        #[arg(long)]
        i: Option<usize>,
        /// Evaluate ranks below their validity threshold instead of omitting them.
        #[arg(long)]
        allow_below_validity: bool,
    },
    /// Run a check suite; exits 0 only if every item passes.
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Only this q for the solutions check.
        #[arg(long)]
        q: Option<usize>,
        /// Random tuples for expsum when the space is too big to sweep [default: 1000].
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Re-derive the six-block forms for ranks 8..12 and compare with the stored table.
    Derive,
    /// Number of solutions of the bilinear system Σ_i Y_i U_j^(i) = 0.
    CountSolutions {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SolutionMethod::Brute)]
        method: SolutionMethod,
    },
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl Cli {
    /// Resolves defaults and the cache environment variable.
    pub fn into_config(self) -> RunConfig {
        let cache_dir = if self.no_cache {
            None
        } else {
            self.cache_dir
                .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        };
        let base = RunConfig {
            seed: self.seed,
            workers: self.workers.unwrap_or_else(default_workers),
            cache_dir,
            format: self.format,
            allow_huge: self.allow_huge,
            ..RunConfig::new(CommandName::Derive)
        };
        match self.command {
            Command::Enumerate { n, k, samples } => RunConfig {
                subcommand: CommandName::Enumerate,
                n: Some(n),
                k: Some(k),
                samples,
                ..base
            },
            Command::Eval {
                family,
                n,
                k,
                k_range,
                i,
                allow_below_validity,
            } => RunConfig {
                subcommand: CommandName::Eval,
                family: Some(family),
                n,
                k,
                k_range,
                i,
                allow_below_validity,
                ..base
            },
            Command::Verify {
                check,
                n,
                k,
                q,
                samples,
            } => RunConfig {
                subcommand: CommandName::Verify,
                check: Some(check),
                n: Some(n),
                k: Some(k),
                q,
                samples,
                ..base
            },
            Command::Derive => base,
            Command::CountSolutions { q, n, k, method } => RunConfig {
                subcommand: CommandName::CountSolutions,
                method: Some(method),
                q: Some(q),
                n: Some(n),
                k: Some(k),
                ..base
            },
        }
    }
}
