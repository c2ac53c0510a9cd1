//! Runs every property suite with a chosen seed.
//!
//! cargo run --example property_suites -- 7

use cartan_forge::verify::{run_all, Config};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = Config { seed, ..Config::default() };
    let start = std::time::Instant::now();
    let reports = run_all(&cfg);
    for suite in &reports {
        println!("[{}] {}/{}", suite.name, suite.passed(), suite.checks.len());
        for check in &suite.checks {
            println!("  {check}");
        }
    }
    let ok = reports.iter().all(|s| s.ok());
    println!("seed {seed}: {} in {:.1?}", if ok { "all passed" } else { "FAILED" }, start.elapsed());
    std::process::exit(if ok { 0 } else { 1 });
}
