//! Runs the normalization for gauge equivalence and prints each stage.
//!
//! cargo run --example derive_gauge

use cartan_forge::cartan::{generic_pipeline, run_pipeline, Model};
use cartan_forge::jet::{base_invariant_value, JetPoint, Mode, OperatorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = generic_pipeline(Mode::Gauge)?;
    for stage in &result.stages {
        println!("stage {}", stage.stage.index);
        for (i, e) in &stage.bindings {
            println!("  a{i} = {e}");
        }
        for ((i, j, k), v) in &stage.achieved {
            println!("  T({i};{j},{k}) = {v}");
        }
    }
    println!("\nfinal structure equations\n{}", result.equations);
    println!("invariants");
    println!("  I = {} (dI = θ6)", result.model.finalize(&result.model.invariant_function()));
    for inv in result.invariants.iter() {
        println!("  {} = {}", inv.name, inv.expr);
    }

    let d4 = run_pipeline(&Model::concrete(&OperatorSpec::d4(), Mode::Gauge))?;
    let jp = JetPoint::new(1.0, 1.0, 0.0, 0.0, 0.0, 2.0);
    let values = d4.invariants.evaluate(&OperatorSpec::d4(), &jp)?;
    println!("\nD^4 at (1, 1, 0, 0, 0, 2):");
    println!("  I = {}", base_invariant_value(&OperatorSpec::d4(), &jp, Mode::Gauge)?);
    for (inv, v) in d4.invariants.iter().zip(values) {
        println!("  {} = {v}", inv.name);
    }
    Ok(())
}
