use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use persym_core::closedform::{full_rank_count, full_rank_poly, moment_lhs, moment_rhs, q1_solution_count};
use persym_core::enumeration::{max_rank, seeded_tuples, tuple_count};
use persym_core::persym::{build_stacked, index_bits, tuple_from_index};
use persym_core::polysys::{
    count_solutions_brute, exponential_sum_direct, exponential_sum_from_rank, r_from_distribution,
    SOLUTION_BUDGET_BITS,
};
use persym_core::{ClosedFormFamily, FamilyId, RangePolicy, SequenceTuple};
use serde::Serialize;

use crate::{exact_distribution, family_label, to_json, Check, CliError, Format, Report, RunConfig};

/// Index spaces up to this many bits are swept completely by `expsum`.
const EXPSUM_EXHAUSTIVE_BITS: u32 = 12;
const EXPSUM_DEFAULT_SAMPLES: u64 = 1000;

#[derive(Clone, Debug, Serialize)]
pub(crate) struct Item {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn item(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Item {
    let (expected, actual) = (expected.to_string(), actual.to_string());
    Item {
        name: name.into(),
        pass: expected == actual,
        expected,
        actual,
    }
}

#[derive(Serialize)]
struct Output<'a> {
    config: &'a RunConfig,
    check: Check,
    items: Vec<Item>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped: Vec<String>,
    passed: bool,
}

#[derive(Default)]
struct Suite {
    items: Vec<Item>,
    skipped: Vec<String>,
}

pub(crate) fn run(config: &RunConfig) -> Result<Report, CliError> {
    let check = config.check.expect("validated");
    let (n, k) = (config.n()?, config.k()?);
    let mut suite = Suite::default();
    match check {
        Check::Sums => sums(config, n, k, &mut suite)?,
        Check::Moments => moments(config, n, k, &mut suite)?,
        Check::Fullrank => fullrank(config, n, k, &mut suite)?,
        Check::Expsum => expsum(config, n, k, &mut suite)?,
        Check::Solutions => solutions(config, n, k, &mut suite)?,
        Check::Crossform => crossform(config, n, k, &mut suite)?,
    }
    let passed = !suite.items.is_empty() && suite.items.iter().all(|i| i.pass);
    let out = Output {
        config,
        check,
        items: suite.items,
        skipped: suite.skipped,
        passed,
    };
    let text = match config.format {
        Format::Pretty => pretty(&out),
        _ => to_json(&out)?,
    };
    Ok(Report::new(text, passed))
}

fn sums(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let d = exact_distribution(config, n, k)?;
    suite.items.push(item(
        format!("sum of Γ_i equals 2^{}", n * (k + 1)),
        tuple_count(n, k),
        d.total(),
    ));
    Ok(())
}

fn moments(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let d = exact_distribution(config, n, k)?;
    for s in 0..=2 {
        suite.items.push(item(
            format!("moment s={s}: Σ Γ_i 2^(({}−i)·{s})", 2 * n),
            moment_rhs(n, k as u32, s)?,
            moment_lhs(&d, s)?,
        ));
    }
    Ok(())
}

fn fullrank(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let d = exact_distribution(config, n, k)?;
    suite.items.push(item(
        format!("Γ_{} against the full-rank product", 2 * n),
        full_rank_count(n, k as u32),
        d.count(2 * n),
    ));
    Ok(())
}

fn expsum(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let bits = index_bits(n, k);
    let tuples: Vec<SequenceTuple> = if bits <= EXPSUM_EXHAUSTIVE_BITS {
        (0..1u128 << bits)
            .map(|idx| tuple_from_index(idx, n, k))
            .collect::<Result<_, _>>()?
    } else {
        let count = config.samples.unwrap_or(EXPSUM_DEFAULT_SAMPLES) as usize;
        seeded_tuples(n, k, count, config.seed)?
    };
    // rank -> (tuples seen, distinct sums observed)
    let mut by_rank: BTreeMap<usize, (usize, BTreeSet<String>)> = BTreeMap::new();
    for t in &tuples {
        let rank = build_stacked(t).rank();
        let f = exponential_sum_direct(t)?;
        let slot = by_rank.entry(rank).or_default();
        slot.0 += 1;
        slot.1.insert(f.to_string());
    }
    for (rank, (count, seen)) in by_rank {
        suite.items.push(item(
            format!("rank {rank}: f_k over {count} tuples equals 2^(2n+k−rank)"),
            exponential_sum_from_rank(n, k, rank),
            seen.into_iter().collect::<Vec<_>>().join("|"),
        ));
    }
    Ok(())
}

fn solutions(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let d = exact_distribution(config, n, k)?;
    suite.items.push(item(
        "q=1: rank distribution gives 4^n + 2^k − 1",
        q1_solution_count(n, k as u32),
        r_from_distribution(1, &d)?,
    ));
    let qs: Vec<usize> = match config.q {
        Some(q) => vec![q],
        None => (1..)
            .take_while(|q| q * k + 2 * q * n <= SOLUTION_BUDGET_BITS as usize)
            .collect(),
    };
    for q in qs {
        suite.items.push(item(
            format!("q={q}: brute-force count equals the rank-distribution sum"),
            count_solutions_brute(q, n, k)?,
            r_from_distribution(q, &d)?,
        ));
    }
    Ok(())
}

fn table_family(n: usize) -> Option<FamilyId> {
    match n {
        2 => Some(FamilyId::N2),
        3 => Some(FamilyId::N3),
        6 => Some(FamilyId::N6),
        _ => None,
    }
}

/// Closed forms against each other as polynomials, and against an exact
/// sweep when the sweep fits the budget.
fn crossform(config: &RunConfig, n: usize, k: usize, suite: &mut Suite) -> Result<(), CliError> {
    let general = ClosedFormFamily::general(n)?;
    let table = table_family(n).map(ClosedFormFamily::new).transpose()?;

    if let Some(table) = &table {
        let tl = family_label(table.id());
        let gl = family_label(general.id());
        for i in 0..=table.max_rank().min(general.max_rank()) {
            suite.items.push(item(
                format!("rank {i}: {gl} polynomial equals {tl}"),
                table.poly(i)?,
                general.poly(i)?,
            ));
        }
        if table.max_rank() == 2 * n {
            suite.items.push(item(
                format!("rank {}: full-rank product equals {tl}", 2 * n),
                table.poly(2 * n)?,
                full_rank_poly(n),
            ));
        }
    }

    if let Err(e) = config.limits().check(n, k) {
        suite.skipped.push(format!("comparison with an exact sweep: {e}"));
        return Ok(());
    }
    let d = exact_distribution(config, n, k)?;
    let top = max_rank(n, k);
    for family in std::iter::once(&general).chain(table.as_ref()) {
        let label = family_label(family.id());
        for (i, _) in family.entries() {
            if !family.in_range(i, k as u32) {
                continue;
            }
            let name = if i > top {
                format!("{label} rank {i} at k={k} (impossible rank, count 0)")
            } else {
                format!("{label} rank {i} at k={k} equals the sweep")
            };
            suite.items.push(item(
                name,
                family.gamma(i, k as u32, RangePolicy::Enforce)?,
                d.count(i),
            ));
        }
    }
    Ok(())
}

fn pretty(out: &Output) -> String {
    let mut s = String::new();
    for i in &out.items {
        let tag = if i.pass { "PASS" } else { "FAIL" };
        if i.pass {
            let _ = writeln!(s, "[{tag}] {}: {}", i.name, i.actual);
        } else {
            let _ = writeln!(s, "[{tag}] {}: expected {}, actual {}", i.name, i.expected, i.actual);
        }
    }
    for sk in &out.skipped {
        let _ = writeln!(s, "[SKIP] {sk}");
    }
    let passed = out.items.iter().filter(|i| i.pass).count();
    let _ = writeln!(s, "{passed}/{} checks passed", out.items.len());
    s
}
