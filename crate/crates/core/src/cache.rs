//! JSON records for rank distributions and the on-disk cache of exact sweeps.
//!
//! Counts are written as decimal strings. Cache entries are immutable and
//! named by (n, k, method, tool version); each carries a SHA-256 of its
//! record so a damaged file is detected instead of trusted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::enumeration::{enumerate_exact_with, Method, RankDistribution, SampleMeta, SweepLimits};
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "PERSYM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMetaRecord {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub n: usize,
    pub k: usize,
    pub method: String,
    pub counts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_meta: Option<SampleMetaRecord>,
    pub tool_version: String,
}

impl From<&RankDistribution> for DistributionRecord {
    fn from(d: &RankDistribution) -> Self {
        Self {
            n: d.n(),
            k: d.k(),
            method: d.method().as_str().to_owned(),
            counts: d.counts().iter().map(|c| c.to_string()).collect(),
            sample_meta: d.sample_meta().map(|m| SampleMetaRecord {
                samples: m.samples,
                seed: m.seed,
            }),
            tool_version: TOOL_VERSION.to_owned(),
        }
    }
}

impl TryFrom<&DistributionRecord> for RankDistribution {
    type Error = Error;

    fn try_from(r: &DistributionRecord) -> Result<Self> {
        let counts = r
            .counts
            .iter()
            .map(|s| {
                s.parse::<BigUint>()
                    .map_err(|_| Error::InvalidShape(format!("count {s:?} is not a decimal integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        match (r.method.as_str(), &r.sample_meta) {
            ("exact", None) => RankDistribution::exact(r.n, r.k, counts),
            ("sampled", Some(m)) => RankDistribution::sampled(
                r.n,
                r.k,
                counts,
                SampleMeta {
                    samples: m.samples,
                    seed: m.seed,
                },
            ),
            (m, _) => Err(Error::InvalidShape(format!(
                "method {m:?} with inconsistent sample metadata"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    #[serde(flatten)]
    record: DistributionRecord,
    checksum: String,
}

fn checksum(record: &DistributionRecord) -> Result<String> {
    let canonical = serde_json::to_vec(record)?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

#[derive(Clone, Debug)]
pub struct DistributionCache {
    dir: PathBuf,
}

impl DistributionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache rooted at `$PERSYM_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n: usize, k: usize, method: Method) -> PathBuf {
        self.dir.join(format!(
            "rankdist-n{n}-k{k}-{}-v{TOOL_VERSION}.json",
            method.as_str()
        ))
    }

    pub fn load(&self, n: usize, k: usize) -> Result<Option<RankDistribution>> {
        let path = self.path_for(n, k, Method::Exact);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| Error::CorruptCache {
            path: path.display().to_string(),
            reason,
        };
        let entry: CacheEntry =
            serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if checksum(&entry.record)? != entry.checksum {
            return Err(corrupt("checksum mismatch".into()));
        }
        if (entry.record.n, entry.record.k) != (n, k) {
            return Err(corrupt("record is for different parameters".into()));
        }
        let d = RankDistribution::try_from(&entry.record).map_err(|e| corrupt(e.to_string()))?;
        if !d.is_complete() {
            return Err(corrupt("counts do not sum to 2^{n(k+1)}".into()));
        }
        Ok(Some(d))
    }

    /// Writes an exact distribution unless an entry already exists.
    pub fn store(&self, d: &RankDistribution) -> Result<PathBuf> {
        d.require_exact()?;
        let path = self.path_for(d.n(), d.k(), Method::Exact);
        if path.exists() {
            return Ok(path);
        }
        fs::create_dir_all(&self.dir)?;
        let record = DistributionRecord::from(d);
        let entry = CacheEntry {
            checksum: checksum(&record)?,
            record,
        };
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&serde_json::to_vec_pretty(&entry)?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn get_or_compute(
        &self,
        n: usize,
        k: usize,
        workers: usize,
        limits: SweepLimits,
    ) -> Result<RankDistribution> {
        if let Some(d) = self.load(n, k)? {
            log::debug!("cache hit for n={n} k={k}");
            return Ok(d);
        }
        let d = enumerate_exact_with(n, k, workers, limits)?;
        self.store(&d)?;
        Ok(d)
    }
}
