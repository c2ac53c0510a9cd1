//! Prolonging a fiber-preserving map to fourth-order jets and transforming an operator.
//!
//! cargo run --example prolongation

use cartan_forge::cartan::derived_invariants;
use cartan_forge::jet::{JetPoint, Mode, OperatorSpec, Transformation};
use cartan_forge::parse::{parse_expr, VarSet};
use cartan_forge::verify::jet_of;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = Transformation::from_strs("2*x + 1", "x + 1")?;
    let names = ["ubar", "pbar", "qbar", "rbar", "sbar"];
    println!("xbar = {}", t.xi());
    for (name, f) in names.iter().zip(t.prolongation_formulas()) {
        println!("{name} = {f}");
    }

    // the prolonged jet of u agrees with the jet of ubar = phi(x) u(x) in xbar
    let u = parse_expr("x^3 + x/2 + 1", &VarSet::only_x())?;
    let x0 = 1.25;
    let jp = jet_of(&u, x0)?;
    let bar = t.prolong(&jp)?;
    println!("\njet of u at x = {x0}:    {:?}", jp.as_array());
    println!("prolonged jet:          {:?}", bar.as_array());

    // operator coefficients transform so the operator identity holds
    let op = OperatorSpec::from_strs(["1", "0", "x", "0", "x^2 + 1"])?;
    for mode in Mode::ALL {
        let spec = t.transform_operator(&op, mode)?.explicit()?;
        println!("\n{mode}: transformed coefficients in xbar");
        for i in (0..5).rev() {
            println!("  f{i}bar = {}", spec.coefficient(i));
        }
        let inv = derived_invariants(&op, mode)?;
        let inv_bar = derived_invariants(&spec, mode)?;
        let before = inv.evaluate(&op, &jp)?;
        let after = inv_bar.evaluate(&spec, &bar)?;
        for ((e, a), b) in inv.iter().zip(&before).zip(&after) {
            println!("  {}: {a:.12} -> {b:.12}", e.name);
        }
    }

    let far = JetPoint::new(1.0, 1.0, 0.5, -0.5, 0.25, 2.0);
    let there_and_back = t.prolong(&far)?;
    println!("\n{:?} maps to {:?}", far.as_array(), there_and_back.as_array());
    Ok(())
}
