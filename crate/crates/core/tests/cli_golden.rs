use std::io::Write;
use std::process::Command;

use cartan_forge::cli::{self, Outcome, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/cli");

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

fn run(args: &[&str]) -> Outcome {
    cli::run(std::iter::once("cartan-forge").chain(args.iter().copied()))
}

fn kv(out: &Outcome, key: &str) -> String {
    out.stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{}", out.stdout))
        .to_string()
}

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn derive_direct_d4() {
    let out = run(&["derive", "--mode", "direct", "--op", &fixture("d4.op")]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("dθ1 = (1/4) θ1∧θ2"), "{}", out.stdout);
    let out = run(&["derive", "--mode", "direct", "--op", &fixture("d4.op"), "--format", "kv"]);
    assert_eq!(kv(&out, "direct.dtheta.1.coeff.1_2"), "1/4");
    assert_eq!(kv(&out, "direct.dtheta.6.terms"), "0");
    assert_eq!(kv(&out, "direct.invariant.I"), "-s");
}

#[test]
fn derive_gauge_d4() {
    let out = run(&["derive", "--mode", "gauge", "--op", &fixture("d4.op")]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("dθ1 = 0"), "{}", out.stdout);
    assert!(out.stdout.contains("I2 = -4*u^(-1)*p"));
    let out = run(&["derive", "--mode", "gauge", "--op", &fixture("d4.op"), "--format", "kv"]);
    assert_eq!(kv(&out, "gauge.dtheta.1.terms"), "0");
    assert_eq!(kv(&out, "gauge.dtheta.5.coeff.3_4"), "4");
}

#[test]
fn derive_without_operator_uses_free_coefficients() {
    let out = run(&["derive", "--mode", "direct", "--format", "kv"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(kv(&out, "direct.invariant.I"), "-u*f0 - p*f1 - q*f2 - r*f3 - s*f4");
    assert_eq!(kv(&out, "direct.dtheta.5.coeff.2_5"), "3/4");
    assert_eq!(kv(&out, "direct.dtheta.5.coeff.3_4"), "3");
}

#[test]
fn derive_errors() {
    let missing = run(&["derive", "--mode", "direct", "--op", "/nonexistent/op.op"]);
    assert_eq!(missing.code, EXIT_USAGE);
    assert!(missing.stderr.contains("cannot read"));
    let no_mode = run(&["derive", "--op", &fixture("d4.op")]);
    assert_eq!(no_mode.code, EXIT_USAGE);
    let bad = run(&["derive", "--mode", "direct", "--op", &fixture("bad_syntax.op")]);
    assert_eq!(bad.code, EXIT_USAGE);
    assert!(bad.stderr.contains("line 2, column 11"), "{}", bad.stderr);
    assert!(bad.stderr.contains("  | f3 = 2*x +"));
    let negative = temp_file("f4 = x - 3/2\n");
    let out = run(&["derive", "--mode", "direct", "--op", negative.path().to_str().unwrap()]);
    assert_eq!(out.code, EXIT_USAGE, "f4 changes sign on the interval");
}

#[test]
fn invariants_of_d4() {
    let out = run(&[
        "invariants", "--mode", "direct", "--op", &fixture("d4.op"), "--point", "1,1,0,0,0,2", "--format", "kv",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(kv(&out, "direct.invariant.I.value"), "-2");
    assert_eq!(kv(&out, "direct.invariant.I.expr"), "-s");
}

#[test]
fn gauge_invariants_are_scale_free() {
    let at = |point: &str| {
        let out = run(&[
            "invariants", "--mode", "gauge", "--op", &fixture("d4.op"), "--point", point, "--format", "kv",
        ]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        out.stdout
            .lines()
            .filter(|l| l.contains(".value"))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let a = at("1.5,0.75,0.5,-1,0.25,2");
    let b = at("1.5,1.5,1,-2,0.5,4");
    assert_eq!(a.len(), 5);
    assert_eq!(a, b);
}

#[test]
fn invariants_reject_points_off_the_domain() {
    for point in ["1,0,0,0,0,2", "1,-1,0,0,0,2"] {
        let out = run(&["invariants", "--mode", "direct", "--op", &fixture("d4.op"), "--point", point]);
        assert_eq!(out.code, EXIT_USAGE, "{point}");
    }
    let short = run(&["invariants", "--mode", "direct", "--op", &fixture("d4.op"), "--point", "1,2,3"]);
    assert_eq!(short.code, EXIT_USAGE);
    let negative = temp_file("f4 = -1\n");
    let out = run(&["invariants", "--mode", "direct", "--op", negative.path().to_str().unwrap(), "--point", "1,1,0,0,0,0"]);
    assert_eq!(out.code, EXIT_USAGE);
}

fn check_equiv(mode: &str, b: &str, map: &str) -> Outcome {
    run(&[
        "check-equiv", "--mode", mode, "--op", &fixture("d4.op"), "--op2", &fixture(b), "--map", &fixture(map),
        "--format", "kv",
    ])
}

#[test]
fn half_d4_under_constant_scaling() {
    let out = check_equiv("direct", "half_d4.op", "scale_u.map");
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert_eq!(kv(&out, "direct.check.equivalent"), "true");
    assert_eq!(kv(&out, "direct.check.operator.ok"), "true");
}

#[test]
fn sixteen_d4_under_stretching() {
    let out = check_equiv("direct", "sixteen_d4.op", "double_x.map");
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert_eq!(kv(&out, "direct.check.equivalent"), "true");
}

#[test]
fn shifted_d4_is_not_equivalent() {
    for mode in ["direct", "gauge"] {
        let out = check_equiv(mode, "d4_plus_one.op", "identity.map");
        assert_eq!(out.code, EXIT_FAILED, "{mode}: {}", out.stdout);
        assert_eq!(kv(&out, &format!("{mode}.check.equivalent")), "false");
        assert_eq!(kv(&out, &format!("{mode}.check.invariant.I.ok")), "false");
    }
}

#[test]
fn check_equiv_input_errors() {
    let out = check_equiv("direct", "bad_symbol.op", "identity.map");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("unknown symbol `u`"), "{}", out.stderr);
    assert!(out.stderr.contains('^'));
    let out = check_equiv("direct", "d4.op", "missing_phi.map");
    assert_eq!(out.code, EXIT_USAGE);
    let out = run(&["check-equiv", "--mode", "direct", "--op", &fixture("d4.op")]);
    assert_eq!(out.code, EXIT_USAGE);
    let flip = temp_file("xi = -x\nphi = 1\n");
    let out = run(&[
        "check-equiv", "--mode", "direct", "--op", &fixture("d4.op"), "--op2", &fixture("d4.op"),
        "--map", flip.path().to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_USAGE, "orientation-reversing map: {}", out.stderr);
}

#[test]
fn verify_paper_matches_annotations() {
    for mode in ["direct", "gauge"] {
        let out = run(&["verify-paper", "--mode", mode, "--format", "kv"]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
        assert_eq!(kv(&out, &format!("{mode}.paper.unexpected")), "0");
    }
    let out = run(&["verify-paper", "--mode", "direct", "--format", "kv"]);
    assert_eq!(kv(&out, "direct.paper.final.6.pattern.verdict"), "same pattern");
}

#[test]
fn selftest_is_deterministic() {
    let a = run(&["selftest", "--seed", "11", "--format", "kv"]);
    let b = run(&["selftest", "--seed", "11", "--format", "kv"]);
    assert_eq!(a.code, EXIT_OK, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(kv(&a, "selftest.ok"), "true");
    assert_eq!(kv(&a, "selftest.seed"), "11");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&[]).code, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["derive", "--mode", "projective"]).code, EXIT_USAGE);
    assert_eq!(run(&["selftest", "--interval", "2:1"]).code, EXIT_USAGE);
    let help = run(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("check-equiv"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cartan-forge");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    let d4 = fixture("d4.op");
    let plus = fixture("d4_plus_one.op");
    let id = fixture("identity.map");
    assert_eq!(status(&["check-equiv", "--mode", "direct", "--op", &d4, "--op2", &plus, "--map", &id]), Some(1));
    assert_eq!(status(&["invariants", "--mode", "direct", "--op", &d4, "--point", "1,0,0,0,0,2"]), Some(2));
    assert_eq!(status(&["derive", "--mode", "gauge", "--op", &d4]), Some(0));
}
