use persym_core::polysys::{count_solutions_brute, r_from_distribution};
use serde::Serialize;

use crate::{exact_distribution, to_json, CliError, Format, Report, RunConfig, SolutionMethod};

#[derive(Serialize)]
struct Output<'a> {
    config: &'a RunConfig,
    q: usize,
    n: usize,
    k: usize,
    method: SolutionMethod,
    value: String,
}

pub(crate) fn run(config: &RunConfig) -> Result<Report, CliError> {
    let q = config.q.expect("validated");
    let (n, k) = (config.n()?, config.k()?);
    let method = config.method.unwrap_or_default();
    let value = match method {
        SolutionMethod::Brute => count_solutions_brute(q, n, k)?.to_string(),
        SolutionMethod::FromDistribution => {
            r_from_distribution(q, &exact_distribution(config, n, k)?)?.to_string()
        }
    };
    let text = match config.format {
        Format::Pretty => format!("R(q={q}, n={n}, k={k}) = {value}\n"),
        _ => to_json(&Output {
            config,
            q,
            n,
            k,
            method,
            value,
        })?,
    };
    Ok(Report::new(text, true))
}
