use std::fmt::Write;

use persym_core::cache::DistributionRecord;
use persym_core::enumeration::enumerate_sampled;
use serde::Serialize;

use crate::{exact_distribution, to_json, CliError, Format, Report, RunConfig};

#[derive(Serialize)]
struct Output<'a> {
    config: &'a RunConfig,
    distribution: DistributionRecord,
    total: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    frequencies: Vec<FrequencyRow>,
}

#[derive(Serialize)]
struct FrequencyRow {
    rank: usize,
    frequency: f64,
    std_error: f64,
}

pub(crate) fn run(config: &RunConfig) -> Result<Report, CliError> {
    let (n, k) = (config.n()?, config.k()?);
    let d = match config.samples {
        Some(samples) => enumerate_sampled(n, k, samples, config.seed)?,
        None => exact_distribution(config, n, k)?,
    };
    let frequencies: Vec<FrequencyRow> = if config.samples.is_some() {
        d.frequencies()
            .into_iter()
            .map(|f| FrequencyRow {
                rank: f.rank,
                frequency: f.frequency,
                std_error: f.std_error,
            })
            .collect()
    } else {
        Vec::new()
    };
    let out = Output {
        config,
        distribution: DistributionRecord::from(&d),
        total: d.total().to_string(),
        frequencies,
    };
    let text = match config.format {
        Format::Pretty => pretty(&out),
        _ => to_json(&out)?,
    };
    Ok(Report::new(text, true))
}

fn pretty(out: &Output) -> String {
    let d = &out.distribution;
    let mut s = format!(
        "rank distribution n = {}, k = {} ({}), total {}\n",
        d.n, d.k, d.method, out.total
    );
    if let Some(m) = &d.sample_meta {
        let _ = writeln!(s, "samples {} seed {}", m.samples, m.seed);
    }
    for (i, c) in d.counts.iter().enumerate() {
        match out.frequencies.get(i) {
            Some(f) => {
                let _ = writeln!(s, "{i:>4}  {c:>20}  {:.6e} ± {:.2e}", f.frequency, f.std_error);
            }
            None => {
                let _ = writeln!(s, "{i:>4}  {c}");
            }
        }
    }
    s
}
