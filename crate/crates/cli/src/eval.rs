use std::fmt::Write;

use persym_core::closedform::{gamma_rows, to_csv, GammaRow, PUBLISHED_N6_K6};
use persym_core::{BigInt, ClosedFormFamily, FamilyId, RangePolicy};
use serde::Serialize;

use crate::{family_label, to_json, CliError, Format, Report, RunConfig};

/// The k at which published six-block values are compared.
const REFERENCE_K: u32 = 6;

#[derive(Serialize)]
struct Output<'a> {
    config: &'a RunConfig,
    family: String,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reference: Vec<Reference>,
}

#[derive(Serialize)]
struct Row {
    family: String,
    i: usize,
    k: u32,
    value: Option<String>,
    in_range: bool,
    k_min: u32,
}

/// A published value against the evaluated closed form.
#[derive(Serialize)]
struct Reference {
    i: usize,
    k: u32,
    published: String,
    published_value: String,
    computed: String,
    in_range: bool,
    /// "pass" or "erratum".
    status: &'static str,
}

pub(crate) fn run(config: &RunConfig) -> Result<Report, CliError> {
    let id = config.family.expect("validated").resolve(config.n)?;
    let family = ClosedFormFamily::new(id)?;
    let ks = config.k_values()?;
    let policy = if config.allow_below_validity {
        RangePolicy::AllowBelow
    } else {
        RangePolicy::Enforce
    };
    let ranks = config.i.map(|i| vec![i]);
    let rows = gamma_rows(&family, ks.iter().copied(), ranks.as_deref(), policy)?;
    let reference = if id == FamilyId::N6 && ks.contains(&REFERENCE_K) {
        reference_checks(&family, config.i)?
    } else {
        Vec::new()
    };
    let passed = reference.iter().all(|r| r.status == "pass");

    let text = match config.format {
        Format::Csv => to_csv(&rows),
        Format::Pretty => pretty(&family, &rows, &reference),
        Format::Json => {
            let out = Output {
                config,
                family: family_label(id),
                rows: rows.iter().map(|r| json_row(&family, r)).collect(),
                reference,
            };
            to_json(&out)?
        }
    };
    Ok(Report::new(text, passed))
}

fn json_row(family: &ClosedFormFamily, r: &GammaRow) -> Row {
    Row {
        family: family_label(r.family),
        i: r.i,
        k: r.k,
        value: r.value.as_ref().map(ToString::to_string),
        in_range: r.in_range,
        k_min: family.entry(r.i).map_or(0, |e| e.k_min),
    }
}

/// Published k = 6 values; ranks below their validity threshold are
/// evaluated through the override so the comparison is still made.
fn reference_checks(family: &ClosedFormFamily, only: Option<usize>) -> Result<Vec<Reference>, CliError> {
    PUBLISHED_N6_K6
        .iter()
        .filter(|(i, _, _)| only.is_none_or(|o| o == *i))
        .map(|&(i, printed, value)| {
            let computed = family.gamma(i, REFERENCE_K, RangePolicy::AllowBelow)?;
            let expected = BigInt::from(value);
            Ok(Reference {
                i,
                k: REFERENCE_K,
                published: printed.to_owned(),
                published_value: expected.to_string(),
                computed: computed.to_string(),
                in_range: family.in_range(i, REFERENCE_K),
                status: if computed == expected { "pass" } else { "erratum" },
            })
        })
        .collect()
}

fn pretty(family: &ClosedFormFamily, rows: &[GammaRow], reference: &[Reference]) -> String {
    let mut s = format!("closed forms for {}\n", family_label(family.id()));
    let _ = writeln!(s, "{:>4} {:>5}  value", "k", "i");
    for r in rows {
        let value = match &r.value {
            Some(v) if r.in_range => v.to_string(),
            Some(v) => format!("{v}  (below validity range)"),
            None => "-  (below validity range)".to_owned(),
        };
        let _ = writeln!(s, "{:>4} {:>5}  {value}", r.k, r.i);
    }
    if !reference.is_empty() {
        let _ = writeln!(s, "\npublished k = {REFERENCE_K} values:");
        for r in reference {
            let note = if r.in_range { "" } else { " [evaluated below validity range]" };
            let _ = writeln!(
                s,
                "[{}] i = {}: published {} = {}, computed {}{note}",
                r.status.to_uppercase(),
                r.i,
                r.published,
                r.published_value,
                r.computed
            );
        }
    }
    s
}
