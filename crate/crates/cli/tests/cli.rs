use std::path::Path;
use std::process::{Command, Output};

use persym_cli::{run, Check, CliError, CommandName, FamilyArg, Format, KRange, RunConfig, SolutionMethod, EXIT_FAIL, EXIT_PASS};
use persym_core::cache::{DistributionCache, CACHE_ENV};
use persym_core::{BigUint, Method, RankDistribution};
use serde_json::Value;

fn persym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persym"))
        .args(args)
        .env_remove(CACHE_ENV)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn config(subcommand: CommandName) -> RunConfig {
    RunConfig::new(subcommand)
}

fn verify(check: Check, n: usize, k: usize) -> RunConfig {
    RunConfig {
        check: Some(check),
        n: Some(n),
        k: Some(k),
        ..config(CommandName::Verify)
    }
}

#[test]
fn enumerate_prints_counts_as_strings() {
    let out = persym(&["enumerate", "--n", "2", "--k", "4", "--workers", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["distribution"]["counts"], serde_json::json!(["1", "9", "126", "504", "384"]));
    assert_eq!(v["distribution"]["method"], "exact");
    assert_eq!(v["total"], "1024");
    assert_eq!(v["config"]["workers"], 2);
    assert_eq!(v["config"]["subcommand"], "enumerate");
}

#[test]
fn sampled_enumeration_reports_frequencies() {
    let out = persym(&["enumerate", "--n", "2", "--k", "4", "--samples", "4000", "--seed", "9"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["distribution"]["method"], "sampled");
    assert_eq!(v["distribution"]["sample_meta"]["seed"], 9);
    assert_eq!(v["frequencies"].as_array().unwrap().len(), 5);
    assert_eq!(out.stdout, persym(&["enumerate", "--n", "2", "--k", "4", "--samples", "4000", "--seed", "9"]).stdout);
}

#[test]
fn every_report_echoes_the_resolved_config() {
    let cfg = RunConfig {
        family: Some(FamilyArg::General),
        n: Some(4),
        k_range: Some(KRange { first: 8, last: 9 }),
        i: Some(2),
        ..config(CommandName::Eval)
    };
    let v: Value = serde_json::from_str(&run(&cfg).unwrap().output).unwrap();
    let c = &v["config"];
    assert_eq!(c["subcommand"], "eval");
    assert_eq!(c["family"], "general");
    assert_eq!(c["k_range"], serde_json::json!({"first": 8, "last": 9}));
    assert_eq!(c["i"], 2);
    assert_eq!(c["seed"], 0);
    assert_eq!(c["format"], "json");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn eval_n6_matches_published_k6_values() {
    let cfg = RunConfig {
        family: Some(FamilyArg::N6),
        k: Some(6),
        ..config(CommandName::Eval)
    };
    let report = run(&cfg).unwrap();
    assert_eq!(report.exit_code, EXIT_PASS);
    let v: Value = serde_json::from_str(&report.output).unwrap();
    let values: Vec<&str> = v["rows"].as_array().unwrap()[..5]
        .iter()
        .map(|r| r["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["1", "189", "35154", "5155920", "645271200"]);
    // rank 6 needs k >= 7, so its row is withheld but the reference still compares it
    assert_eq!(v["rows"][6]["value"], Value::Null);
    assert_eq!(v["rows"][6]["in_range"], false);
    let r6 = &v["reference"][6];
    assert_eq!(r6["computed"], "4331722752000");
    assert_eq!(r6["status"], "pass");
    assert_eq!(r6["in_range"], false);
}

#[test]
fn eval_below_validity_only_with_override() {
    let base = RunConfig {
        family: Some(FamilyArg::N6),
        k: Some(6),
        i: Some(7),
        ..config(CommandName::Eval)
    };
    let v: Value = serde_json::from_str(&run(&base).unwrap().output).unwrap();
    assert_eq!(v["rows"][0]["value"], Value::Null);
    let forced = RunConfig {
        allow_below_validity: true,
        ..base
    };
    let v: Value = serde_json::from_str(&run(&forced).unwrap().output).unwrap();
    assert_eq!(v["rows"][0]["value"], "0");
    assert_eq!(v["rows"][0]["in_range"], false);
}

#[test]
fn eval_csv() {
    let out = persym(&["eval", "--family", "n2", "--k-range", "4:5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,i,k,value,in_range");
    assert_eq!(lines[3], "n2,2,4,126,true");
    assert_eq!(lines.len(), 1 + 2 * 5);
    assert_eq!(lines[10], "n2,4,5,2688,true");
}

#[test]
fn verify_sums_passes() {
    let report = run(&verify(Check::Sums, 3, 5)).unwrap();
    assert_eq!(report.exit_code, EXIT_PASS);
    let v: Value = serde_json::from_str(&report.output).unwrap();
    assert_eq!(v["items"][0]["expected"], "262144");
    assert_eq!(v["items"][0]["actual"], "262144");
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_suites_pass_on_small_shapes() {
    for check in [Check::Moments, Check::Fullrank, Check::Expsum, Check::Solutions, Check::Crossform] {
        for (n, k) in [(1, 3), (2, 4), (3, 5), (6, 3)] {
            if check == Check::Fullrank && k < n {
                continue;
            }
            let report = run(&verify(check, n, k)).unwrap();
            assert_eq!(report.exit_code, EXIT_PASS, "{check:?} n={n} k={k}\n{}", report.output);
        }
    }
}

#[test]
fn crossform_skips_the_sweep_when_too_large() {
    let v: Value = serde_json::from_str(&run(&verify(Check::Crossform, 6, 8)).unwrap().output).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["skipped"][0].as_str().unwrap().contains("exceeds the budget"));
}

/// A cached distribution with the right total but a wrong split fails the
/// moment check while the plain sum still passes.
#[test]
fn verify_exit_status_reflects_failed_items() {
    let dir = tempfile::tempdir().unwrap();
    let counts = [1u32, 9, 126, 505, 383].map(BigUint::from).to_vec();
    DistributionCache::new(dir.path())
        .store(&RankDistribution::exact(2, 4, counts).unwrap())
        .unwrap();
    let with_cache = |check| RunConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..verify(check, 2, 4)
    };
    assert_eq!(run(&with_cache(Check::Sums)).unwrap().exit_code, EXIT_PASS);
    let report = run(&with_cache(Check::Moments)).unwrap();
    assert_eq!(report.exit_code, EXIT_FAIL);
    let v: Value = serde_json::from_str(&report.output).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["items"][0]["pass"], true);
    assert_eq!(v["items"][1]["pass"], false);
}

fn corrupt_entry(dir: &Path) {
    let path = DistributionCache::new(dir).path_for(2, 4, Method::Exact);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("\"504\"", "\"505\"")).unwrap();
}

#[test]
fn cache_corruption_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = persym(&["enumerate", "--n", "2", "--k", "4", "--cache-dir", d]);
    assert!(first.status.success());
    let second = persym(&["enumerate", "--n", "2", "--k", "4", "--cache-dir", d]);
    assert_eq!(first.stdout, second.stdout);
    corrupt_entry(dir.path());
    let bad = persym(&["enumerate", "--n", "2", "--k", "4", "--cache-dir", d]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("corrupt"));
    assert!(bad.stdout.is_empty());
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_persym"))
        .args(["enumerate", "--n", "2", "--k", "3"])
        .env(CACHE_ENV, dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(DistributionCache::new(dir.path()).load(2, 3).unwrap().is_some());
    assert_eq!(json(&out)["config"]["cache_dir"], dir.path().to_str().unwrap());
    let ignored = Command::new(env!("CARGO_BIN_EXE_persym"))
        .args(["enumerate", "--n", "2", "--k", "3", "--no-cache"])
        .env(CACHE_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(json(&ignored)["config"]["cache_dir"], Value::Null);
}

#[test]
fn count_solutions_schema() {
    for (method, flag) in [(SolutionMethod::Brute, "brute"), (SolutionMethod::FromDistribution, "from-distribution")] {
        let cfg = RunConfig {
            q: Some(2),
            n: Some(1),
            k: Some(1),
            method: Some(method),
            ..config(CommandName::CountSolutions)
        };
        let v: Value = serde_json::from_str(&run(&cfg).unwrap().output).unwrap();
        assert_eq!(v["value"], "28");
        assert_eq!(v["method"], flag);
        assert_eq!((v["q"].clone(), v["n"].clone(), v["k"].clone()), (2.into(), 1.into(), 1.into()));
    }
    let out = persym(&["count-solutions", "--q", "2", "--n", "6", "--k", "2"]);
    assert_eq!(json(&out)["value"], "16814464");
}

#[test]
fn derive_reports_a_clean_round_trip() {
    let report = run(&config(CommandName::Derive)).unwrap();
    assert_eq!(report.exit_code, EXIT_PASS);
    let v: Value = serde_json::from_str(&report.output).unwrap();
    assert_eq!(v["equations"], 21);
    assert_eq!(v["unknowns"], 8);
    assert_eq!(v["clean"], true);
    assert!(v["mismatches"].as_array().unwrap().is_empty());
    let a8 = v["solution"].as_array().unwrap().iter().find(|c| c["rank"] == 8 && c["power"] == 2).unwrap();
    assert_eq!(a8["value"], "10416");
    assert_eq!(v["vanishing"].as_array().unwrap().len(), 21);
    assert_eq!(v["moment_defects"]["derived"], serde_json::json!(["0", "0", "0"]));
}

#[test]
fn invalid_configs_fail_before_compute() {
    let usage = |cfg: RunConfig| matches!(run(&cfg), Err(CliError::Usage(_)));
    assert!(usage(RunConfig {
        format: Format::Csv,
        n: Some(2),
        k: Some(3),
        ..config(CommandName::Enumerate)
    }));
    assert!(usage(RunConfig {
        family: Some(FamilyArg::General),
        k: Some(3),
        ..config(CommandName::Eval)
    }));
    assert!(usage(RunConfig {
        family: Some(FamilyArg::N3),
        n: Some(4),
        k: Some(3),
        ..config(CommandName::Eval)
    }));
    assert!(usage(RunConfig {
        family: Some(FamilyArg::N2),
        k_range: Some(KRange { first: 9, last: 3 }),
        ..config(CommandName::Eval)
    }));
    assert!(usage(RunConfig {
        workers: 0,
        ..verify(Check::Sums, 2, 2)
    }));
    assert!(usage(verify(Check::Fullrank, 3, 2)));
    assert!(matches!(
        run(&RunConfig {
            q: Some(3),
            ..verify(Check::Solutions, 6, 1)
        }),
        Err(CliError::Core(persym_core::Error::BudgetExceeded { .. }))
    ));
}

#[test]
fn oversized_sweeps_need_allow_huge() {
    let out = persym(&["enumerate", "--n", "6", "--k", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("36 bits") && err.contains("--allow-huge"), "{err}");
    let out = persym(&["enumerate", "--n", "6", "--k", "6", "--allow-huge"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("42 bits"));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = persym(&["plot"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn pretty_output_is_human_readable() {
    let out = persym(&["verify", "--check", "moments", "--n", "2", "--k", "3", "--format", "pretty"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("[PASS] moment s=0"), "{text}");
    assert!(text.ends_with("3/3 checks passed\n"));
}
