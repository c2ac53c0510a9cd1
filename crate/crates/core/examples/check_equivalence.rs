//! Drives the `check-equiv` subcommand on the bundled operator and map files.
//!
//! cargo run --example check_equivalence

use cartan_forge::cli;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/cli");

fn main() {
    let cases = [
        ("direct", "d4.op", "half_d4.op", "scale_u.map"),
        ("direct", "d4.op", "sixteen_d4.op", "double_x.map"),
        ("direct", "d4.op", "d4_plus_one.op", "identity.map"),
        ("gauge", "d4.op", "d4_plus_one.op", "identity.map"),
    ];
    for (mode, a, b, map) in cases {
        let out = cli::run([
            "cartan-forge".to_string(),
            "check-equiv".into(),
            "--mode".into(),
            mode.into(),
            "--op".into(),
            format!("{FIXTURES}/{a}"),
            "--op2".into(),
            format!("{FIXTURES}/{b}"),
            "--map".into(),
            format!("{FIXTURES}/{map}"),
        ]);
        println!("== {mode}: {a} -> {b} under {map} (exit {})", out.code);
        print!("{}", out.stdout);
        eprint!("{}", out.stderr);
    }
}
