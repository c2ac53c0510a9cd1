//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! cargo test --test acceptance

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cartan_forge::cartan::reference::{compare_with_paper, Expectation};
use cartan_forge::cli;
use cartan_forge::jet::Mode;
use cartan_forge::verify::{self, Check, CheckFn, Config};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/cli");

type Outcome = Result<String, String>;

struct Criterion {
    number: u32,
    title: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn checks(list: &[(&'static str, CheckFn)]) -> Outcome {
    let cfg = Config::default();
    let results: Vec<Check> = list.iter().map(|&(name, f)| verify::run_check(name, f, &cfg)).collect();
    let summary = results
        .iter()
        .map(|c| format!("{} {}/{}", c.name, c.passed, c.total))
        .collect::<Vec<_>>()
        .join(", ");
    match results.iter().find(|c| !c.ok()) {
        None => Ok(summary),
        Some(bad) => Err(format!("{summary}\n{bad}")),
    }
}

fn fixture(name: &str) -> String {
    Path::new(FIXTURES).join(name).display().to_string()
}

fn cli(args: &[&str]) -> cli::Outcome {
    cli::run(std::iter::once("cartan-forge".to_string()).chain(args.iter().map(|s| s.to_string())))
}

fn engine_soundness() -> Outcome {
    checks(&[
        ("dd_base_coframes", verify::dd_base_coframes),
        ("dd_random_one_forms", verify::dd_random_one_forms),
        ("leibniz", verify::leibniz),
        ("antisymmetry", verify::antisymmetry),
    ])
}

fn torsion_reproduction() -> Outcome {
    let detail = checks(&[("free_torsion", verify::free_torsion)])?;
    if detail.ends_with("10/10") {
        Ok(detail)
    } else {
        Err(format!("expected five coefficients per mode, got {detail}"))
    }
}

fn normalization_schedule() -> Outcome {
    checks(&[("normalization_targets", verify::normalization_targets)])
}

fn final_structure_equations() -> Outcome {
    let rigid = checks(&[("constants_rigid", verify::constants_rigid)])?;
    let mut lines = vec![rigid];
    for mode in Mode::ALL {
        let report = compare_with_paper(mode).map_err(|e| e.to_string())?;
        let worst = report
            .rows
            .iter()
            .filter(|r| r.expect == Expectation::Equal)
            .filter_map(|r| r.deviation)
            .fold(0.0f64, f64::max);
        let unexpected: Vec<&str> = report.unexpected().map(|r| r.key.as_str()).collect();
        if !unexpected.is_empty() {
            return Err(format!("{mode}: unexpected rows {unexpected:?}"));
        }
        if worst > 1e-10 {
            return Err(format!("{mode}: equal rows deviate by {worst:e}"));
        }
        lines.push(format!("{mode} {} rows as expected, worst deviation {worst:.1e}", report.rows.len()));
    }
    for mode in ["direct", "gauge"] {
        let out = cli(&["verify-paper", "--mode", mode]);
        if out.code != cli::EXIT_OK {
            return Err(format!("verify-paper --mode {mode} exited {}", out.code));
        }
    }
    Ok(lines.join("; "))
}

fn invariance() -> Outcome {
    checks(&[
        ("invariance", verify::invariance),
        ("operator_identity", verify::operator_identity),
    ])
}

fn coframe_equivariance() -> Outcome {
    checks(&[("coframe_equivariance", verify::coframe_equivariance)])
}

fn bianchi_closure() -> Outcome {
    checks(&[("bianchi", verify::bianchi)])
}

fn gauge_homogeneity() -> Outcome {
    checks(&[("gauge_homogeneity", verify::gauge_homogeneity)])
}

fn parser() -> Outcome {
    let detail = checks(&[
        ("round_trip", verify::parser_round_trip),
        ("error_spans", verify::parser_error_spans),
    ])?;
    let cases = [
        ("bad_syntax.op", "d4.op", "identity.map"),
        ("d4.op", "bad_symbol.op", "identity.map"),
        ("d4.op", "d4.op", "missing_phi.map"),
    ];
    for (a, b, map) in cases {
        let file = if a != "d4.op" { a } else if b != "d4.op" { b } else { map };
        let out = cli(&[
            "check-equiv", "--mode", "direct", "--op", &fixture(a), "--op2", &fixture(b), "--map", &fixture(map),
        ]);
        if out.code != cli::EXIT_USAGE {
            return Err(format!("{file}: exit {} instead of 2", out.code));
        }
        if file.ends_with(".op") && !(out.stderr.contains("line ") && out.stderr.contains('^')) {
            return Err(format!("{file}: no span in {:?}", out.stderr));
        }
    }
    Ok(format!("{detail}, 3 bad input files exit 2"))
}

fn end_to_end() -> Outcome {
    let cases = [
        ("d4.op", "half_d4.op", "scale_u.map", "direct", cli::EXIT_OK),
        ("d4.op", "d4_plus_one.op", "identity.map", "direct", cli::EXIT_FAILED),
        ("d4.op", "d4_plus_one.op", "identity.map", "gauge", cli::EXIT_FAILED),
        ("d4.op", "sixteen_d4.op", "double_x.map", "direct", cli::EXIT_OK),
    ];
    for (a, b, map, mode, want) in cases {
        let out = cli(&[
            "check-equiv", "--mode", mode, "--op", &fixture(a), "--op2", &fixture(b), "--map", &fixture(map),
            "--format", "kv",
        ]);
        if out.code != want {
            return Err(format!("{a} vs {b} under {map} ({mode}): exit {} instead of {want}", out.code));
        }
        let verdict = format!("{mode}.check.equivalent = {}", want == cli::EXIT_OK);
        if !out.stdout.contains(&verdict) {
            return Err(format!("{a} vs {b}: missing `{verdict}`"));
        }
    }
    let start = Instant::now();
    let first = cli(&["selftest", "--seed", "3", "--format", "kv"]);
    let elapsed = start.elapsed();
    let second = cli(&["selftest", "--seed", "3", "--format", "kv"]);
    if first.code != cli::EXIT_OK {
        return Err(format!("selftest exited {}:\n{}", first.code, first.stdout));
    }
    if first.stdout != second.stdout {
        return Err("selftest output differs between equal seeds".into());
    }
    if elapsed > Duration::from_secs(120) {
        return Err(format!("selftest took {elapsed:.1?}"));
    }
    Ok(format!("4 check-equiv goldens, selftest deterministic, {elapsed:.1?} per run"))
}

const CRITERIA: &[Criterion] = &[
    Criterion { number: 1, title: "engine soundness", budget: Some(Duration::from_secs(10)), run: engine_soundness },
    Criterion { number: 2, title: "torsion reproduction", budget: Some(Duration::from_secs(10)), run: torsion_reproduction },
    Criterion { number: 3, title: "normalization schedule", budget: None, run: normalization_schedule },
    Criterion { number: 4, title: "final structure equations", budget: Some(Duration::from_secs(60)), run: final_structure_equations },
    Criterion { number: 5, title: "invariance", budget: Some(Duration::from_secs(30)), run: invariance },
    Criterion { number: 6, title: "coframe equivariance", budget: None, run: coframe_equivariance },
    Criterion { number: 7, title: "Bianchi closure", budget: None, run: bianchi_closure },
    Criterion { number: 8, title: "gauge homogeneity", budget: None, run: gauge_homogeneity },
    Criterion { number: 9, title: "parser", budget: None, run: parser },
    Criterion { number: 10, title: "end-to-end CLI", budget: None, run: end_to_end },
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in CRITERIA {
        let label = format!("criterion {:>2} {}", c.number, c.title);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {elapsed:.1?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {label} ({elapsed:.1?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {label} ({elapsed:.1?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
