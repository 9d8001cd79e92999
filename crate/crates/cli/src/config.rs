//! Resolved run configuration and its up-front validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use persym_core::closedform::ClosedFormFamily;
use persym_core::enumeration::SweepLimits;
use persym_core::gf2matrix::MAX_COLS;
use persym_core::polysys::{EXPSUM_MAX_K, EXPSUM_MAX_N, SOLUTION_BUDGET_BITS};
use persym_core::FamilyId;
use serde::Serialize;

use crate::error::CliError;

/// Widest k range `eval` accepts in one call.
pub const MAX_K_SPAN: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Enumerate,
    Eval,
    Verify,
    Derive,
    CountSolutions,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    General,
    N2,
    N3,
    N6,
}

impl FamilyArg {
    pub fn resolve(self, n: Option<usize>) -> Result<FamilyId, CliError> {
        let fixed = |id: FamilyId| match n {
            Some(n) if n != id.blocks() => Err(CliError::Usage(format!(
                "family {id} has n = {}, got --n {n}",
                id.blocks()
            ))),
            _ => Ok(id),
        };
        match self {
            FamilyArg::General => match n {
                Some(n) if n >= 1 => Ok(FamilyId::General(n)),
                Some(_) => Err(CliError::Usage("--n must be at least 1".into())),
                None => Err(CliError::Usage("--family general needs --n".into())),
            },
            FamilyArg::N2 => fixed(FamilyId::N2),
            FamilyArg::N3 => fixed(FamilyId::N3),
            FamilyArg::N6 => fixed(FamilyId::N6),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Sums,
    Moments,
    Fullrank,
    Expsum,
    Solutions,
    Crossform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionMethod {
    #[default]
    Brute,
    FromDistribution,
}

/// Inclusive range of k, written `A:B` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KRange {
    pub first: u32,
    pub last: u32,
}

impl KRange {
    pub fn values(self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("{t:?} is not a non-negative integer"))
        };
        Ok(KRange {
            first: parse(a)?,
            last: parse(b)?,
        })
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

/// Everything a run needs, already resolved (defaults, environment). It is
/// echoed verbatim at the top of every JSON report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub subcommand: CommandName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<SolutionMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_range: Option<KRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
    pub allow_huge: bool,
    pub allow_below_validity: bool,
}

impl RunConfig {
    /// Bare configuration for `subcommand`: one worker, seed 0, JSON, no cache.
    pub fn new(subcommand: CommandName) -> Self {
        Self {
            subcommand,
            family: None,
            check: None,
            method: None,
            n: None,
            k: None,
            k_range: None,
            i: None,
            q: None,
            samples: None,
            seed: 0,
            workers: 1,
            cache_dir: None,
            format: Format::Json,
            allow_huge: false,
            allow_below_validity: false,
        }
    }

    pub fn limits(&self) -> SweepLimits {
        SweepLimits {
            allow_huge: self.allow_huge,
        }
    }

    pub(crate) fn n(&self) -> Result<usize, CliError> {
        required(self.n, "--n")
    }

    pub(crate) fn k(&self) -> Result<usize, CliError> {
        required(self.k, "--k")
    }

    /// The k values an `eval` run covers.
    pub fn k_values(&self) -> Result<Vec<u32>, CliError> {
        match (self.k, self.k_range) {
            (Some(k), None) => Ok(vec![u32::try_from(k)
                .map_err(|_| CliError::Usage(format!("--k {k} is out of range")))?]),
            (None, Some(r)) => Ok(r.values().collect()),
            (Some(_), Some(_)) => Err(CliError::Usage("give either --k or --k-range, not both".into())),
            (None, None) => Err(CliError::Usage("one of --k or --k-range is required".into())),
        }
    }

    /// Rejects anything that would fail later, before any compute starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.workers < 1 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        if self.format == Format::Csv && self.subcommand != CommandName::Eval {
            return Err(CliError::Usage("--format csv is only available for eval".into()));
        }
        match self.subcommand {
            CommandName::Enumerate => {
                let (n, k) = self.shape()?;
                match self.samples {
                    Some(0) => return Err(CliError::Usage("--samples must be at least 1".into())),
                    Some(_) if k > MAX_COLS => {
                        return Err(persym_core::Error::TooManyColumns { cols: k }.into())
                    }
                    Some(_) => {}
                    None => self.limits().check(n, k)?,
                }
            }
            CommandName::Eval => {
                let family = required(self.family, "--family")?;
                let id = family.resolve(self.n)?;
                if let Some(r) = self.k_range {
                    if r.first > r.last {
                        return Err(CliError::Usage(format!("empty k range {r}")));
                    }
                    if r.last - r.first >= MAX_K_SPAN {
                        return Err(CliError::Usage(format!(
                            "k range {r} spans more than {MAX_K_SPAN} values"
                        )));
                    }
                }
                self.k_values()?;
                if let Some(i) = self.i {
                    if ClosedFormFamily::new(id)?.entry(i).is_none() {
                        return Err(persym_core::Error::NoClosedForm {
                            family: id.to_string(),
                            i,
                        }
                        .into());
                    }
                }
            }
            CommandName::Verify => {
                let check = required(self.check, "--check")?;
                let (n, k) = self.shape()?;
                match check {
                    Check::Sums | Check::Moments => self.limits().check(n, k)?,
                    Check::Fullrank => {
                        self.limits().check(n, k)?;
                        if k < n {
                            return Err(CliError::Usage(format!(
                                "the full-rank product only applies for k >= n (got n = {n}, k = {k})"
                            )));
                        }
                    }
                    Check::Expsum => {
                        if n > EXPSUM_MAX_N || k > EXPSUM_MAX_K {
                            return Err(CliError::Usage(format!(
                                "expsum needs n <= {EXPSUM_MAX_N} and k <= {EXPSUM_MAX_K}"
                            )));
                        }
                        if self.samples == Some(0) {
                            return Err(CliError::Usage("--samples must be at least 1".into()));
                        }
                    }
                    Check::Solutions => {
                        self.limits().check(n, k)?;
                        if let Some(q) = self.q {
                            check_solution_budget(q, n, k)?;
                        }
                    }
                    Check::Crossform => {
                        if k > MAX_COLS {
                            return Err(persym_core::Error::TooManyColumns { cols: k }.into());
                        }
                    }
                }
            }
            CommandName::Derive => {}
            CommandName::CountSolutions => {
                let q = required(self.q, "--q")?;
                let (n, k) = self.shape()?;
                match self.method.unwrap_or_default() {
                    SolutionMethod::Brute => check_solution_budget(q, n, k)?,
                    SolutionMethod::FromDistribution => {
                        if q < 1 {
                            return Err(CliError::Usage("--q must be at least 1".into()));
                        }
                        self.limits().check(n, k)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn shape(&self) -> Result<(usize, usize), CliError> {
        let (n, k) = (self.n()?, self.k()?);
        if n < 1 || k < 1 {
            return Err(CliError::Usage("--n and --k must be at least 1".into()));
        }
        Ok((n, k))
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

fn check_solution_budget(q: usize, n: usize, k: usize) -> Result<(), CliError> {
    if q < 1 {
        return Err(CliError::Usage("--q must be at least 1".into()));
    }
    let needed = q * k + 2 * q * n;
    if needed > SOLUTION_BUDGET_BITS as usize {
        return Err(persym_core::Error::BudgetExceeded {
            needed: needed as u32,
            cap: SOLUTION_BUDGET_BITS,
        }
        .into());
    }
    Ok(())
}
