//! Compares the derivation against the bundled reference transcriptions.
//!
//! cargo run --example verify_reference

use cartan_forge::cartan::reference::{compare_with_paper, Expectation};
use cartan_forge::jet::Mode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for mode in Mode::ALL {
        let report = compare_with_paper(mode)?;
        let typos = report.rows.iter().filter(|r| r.expect == Expectation::Typo).count();
        println!(
            "{mode}: {} rows, {} annotated typos, {} unexpected",
            report.rows.len(),
            typos,
            report.unexpected().count()
        );
        for row in report.rows.iter().filter(|r| r.expect == Expectation::Typo).take(4) {
            println!("  {}: {}", row.key, row.verdict);
            println!("    derived     {}", row.derived);
            println!("    transcribed {}", row.paper);
        }
    }
    Ok(())
}
